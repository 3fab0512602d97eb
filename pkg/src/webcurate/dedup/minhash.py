"""MinHash signatures and LSH bucket keys.

Shingles are sets of word 5-grams. Each shingle gets a 64-bit BLAKE2b base
hash ``x``; hash function ``i`` is ``(a_i * x + b_i) mod p`` with the
Mersenne prime ``p = 2**61 - 1`` and constants drawn from ``hash_seed``.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..words import word_tokenize

MERSENNE_61 = (1 << 61) - 1
_P = np.uint64(MERSENNE_61)
_LO32 = np.uint64(0xFFFFFFFF)
_LO29 = np.uint64((1 << 29) - 1)


@dataclass(frozen=True)
class DedupParams:
    ngram_size: int = 5
    num_hashes: int = 112
    buckets: int = 14
    rows_per_bucket: int = 8
    hash_seed: int = 1

    def __post_init__(self):
        if self.ngram_size < 1:
            raise ValueError("ngram_size must be >= 1")
        if self.buckets * self.rows_per_bucket != self.num_hashes:
            raise ValueError(
                f"buckets * rows_per_bucket ({self.buckets} * {self.rows_per_bucket}) "
                f"!= num_hashes ({self.num_hashes})"
            )


@dataclass(frozen=True, eq=False)
class MinHashSignature:
    doc_id: str
    values: np.ndarray  # uint64, one minimum per hash function

    def __eq__(self, other):
        if not isinstance(other, MinHashSignature):
            return NotImplemented
        return self.doc_id == other.doc_id and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.doc_id, self.values.tobytes()))


def shingle(text: str, n: int = 5) -> set[str]:
    words = word_tokenize(text)
    return {" ".join(words[i : i + n]) for i in range(len(words) - n + 1)}


def base_hash(s: str) -> int:
    return int.from_bytes(hashlib.blake2b(s.encode("utf-8"), digest_size=8).digest(), "little")


@lru_cache(maxsize=32)
def hash_constants(num_hashes: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    a = rng.integers(1, MERSENNE_61, size=num_hashes, dtype=np.uint64)
    b = rng.integers(0, MERSENNE_61, size=num_hashes, dtype=np.uint64)
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _fold(y: np.ndarray) -> np.ndarray:
    """Reduce values below 2**63 modulo 2**61 - 1."""
    y = (y & _P) + (y >> np.uint64(61))
    y = (y & _P) + (y >> np.uint64(61))
    return np.where(y >= _P, y - _P, y)


def affine_mod_p(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``(a * x + b) mod (2**61 - 1)`` elementwise (broadcasting), exact in uint64.

    All inputs must already be below the modulus.
    """
    a_hi, a_lo = a >> np.uint64(32), a & _LO32
    x_hi, x_lo = x >> np.uint64(32), x & _LO32
    hh = a_hi * x_hi  # < 2**58, weight 2**64 == 8 (mod p)
    mid = a_hi * x_lo + a_lo * x_hi  # < 2**62, weight 2**32
    ll = a_lo * x_lo  # < 2**64
    acc = (
        (hh << np.uint64(3))
        + (mid >> np.uint64(29))
        + ((mid & _LO29) << np.uint64(32))
        + (ll & _P)
        + (ll >> np.uint64(61))
    )
    return _fold(_fold(acc) + b)


def signature_values(shingles, params: DedupParams = DedupParams()) -> np.ndarray:
    if not shingles:
        raise ValueError("cannot sign an empty shingle set")
    x = np.fromiter((base_hash(s) for s in shingles), dtype=np.uint64, count=len(shingles))
    x = x % _P
    a, b = hash_constants(params.num_hashes, params.hash_seed)
    return affine_mod_p(a[None, :], b[None, :], x[:, None]).min(axis=0)


def signature(shingles, params: DedupParams = DedupParams(), doc_id: str = "") -> MinHashSignature:
    return MinHashSignature(doc_id, signature_values(shingles, params))


def bucket_keys(sig: MinHashSignature | np.ndarray, params: DedupParams = DedupParams()) -> list[int]:
    values = sig.values if isinstance(sig, MinHashSignature) else sig
    raw = np.ascontiguousarray(values, dtype="<u8")
    r = params.rows_per_bucket
    keys = []
    for j in range(params.buckets):
        h = hashlib.blake2b(struct.pack("<I", j) + raw[j * r : (j + 1) * r].tobytes(), digest_size=8)
        keys.append(int.from_bytes(h.digest(), "little"))
    return keys


def match_probability(s: float, params: DedupParams = DedupParams()) -> float:
    """Probability that two documents of Jaccard similarity ``s`` share a bucket."""
    if not 0.0 <= s <= 1.0 or math.isnan(s):
        raise ValueError(f"similarity {s} outside [0, 1]")
    if s == 1.0:
        return 1.0
    # 1 - (1 - s^r)^b, evaluated without cancellation
    return -math.expm1(params.buckets * math.log1p(-(s**params.rows_per_bucket))) + 0.0
