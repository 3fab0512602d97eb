"""On-disk signatures and key-sorted posting runs.

Signature file ("MHSG1"): magic, then per document
``u32 id_len | id utf-8 | num_hashes x u64``, little-endian.

Posting file ("MHPS1"): magic, then postings sorted by
``(key, scope, doc_id)``, each ``u64 key | u16 scope_len | scope | u32 id_len | id``.
``scope`` is the dump for per-snapshot dedup. Sorted runs from many shards
are merged with a k-way heap merge and grouped by ``(key, scope)``, which
is the single reduce step of the clustering.
"""

from __future__ import annotations

import heapq
import struct
from collections.abc import Iterable, Iterator
from itertools import groupby
from pathlib import Path

import numpy as np

from .minhash import MinHashSignature

SIG_MAGIC = b"MHSG1"
POSTING_MAGIC = b"MHPS1"

Posting = tuple[int, str, str]  # (key, scope, doc_id)


class SpillFormatError(ValueError):
    pass


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise SpillFormatError(f"{getattr(fh, 'name', 'spill')}: truncated {what}")
    return data


def _check_magic(fh, magic: bytes) -> None:
    head = fh.read(len(magic))
    if head != magic:
        raise SpillFormatError(f"{getattr(fh, 'name', 'spill')}: bad magic {head!r}, expected {magic!r}")


def write_signatures(path: str | Path, signatures: Iterable[MinHashSignature]) -> int:
    count = 0
    with open(path, "wb") as fh:
        fh.write(SIG_MAGIC)
        for sig in signatures:
            raw_id = sig.doc_id.encode("utf-8")
            fh.write(struct.pack("<I", len(raw_id)))
            fh.write(raw_id)
            fh.write(np.ascontiguousarray(sig.values, dtype="<u8").tobytes())
            count += 1
    return count


def read_signatures(path: str | Path, num_hashes: int = 112) -> Iterator[MinHashSignature]:
    with open(path, "rb") as fh:
        _check_magic(fh, SIG_MAGIC)
        while True:
            head = fh.read(4)
            if not head:
                return
            if len(head) != 4:
                raise SpillFormatError(f"{path}: truncated id length")
            (n,) = struct.unpack("<I", head)
            doc_id = _read_exact(fh, n, "doc id").decode("utf-8")
            raw = _read_exact(fh, 8 * num_hashes, "signature")
            yield MinHashSignature(doc_id, np.frombuffer(raw, dtype="<u8").astype(np.uint64))


def write_postings(path: str | Path, postings: Iterable[Posting]) -> int:
    """Sort and write one run. Returns the number of postings."""
    run = sorted(postings)
    with open(path, "wb") as fh:
        fh.write(POSTING_MAGIC)
        for key, scope, doc_id in run:
            raw_scope = scope.encode("utf-8")
            raw_id = doc_id.encode("utf-8")
            fh.write(struct.pack("<QH", key, len(raw_scope)))
            fh.write(raw_scope)
            fh.write(struct.pack("<I", len(raw_id)))
            fh.write(raw_id)
    return len(run)


def read_postings(path: str | Path) -> Iterator[Posting]:
    with open(path, "rb") as fh:
        _check_magic(fh, POSTING_MAGIC)
        while True:
            head = fh.read(10)
            if not head:
                return
            if len(head) != 10:
                raise SpillFormatError(f"{path}: truncated posting header")
            key, n_scope = struct.unpack("<QH", head)
            scope = _read_exact(fh, n_scope, "scope").decode("utf-8")
            (n_id,) = struct.unpack("<I", _read_exact(fh, 4, "id length"))
            yield key, scope, _read_exact(fh, n_id, "doc id").decode("utf-8")


def merge_postings(paths: Iterable[str | Path]) -> Iterator[Posting]:
    return heapq.merge(*(read_postings(p) for p in paths))


def group_by_key(postings: Iterable[Posting]) -> Iterator[tuple[tuple[int, str], list[str]]]:
    """Group sorted postings into ``((key, scope), doc_ids)``."""
    for group_key, group in groupby(postings, key=lambda p: (p[0], p[1])):
        yield group_key, [doc_id for _, _, doc_id in group]
