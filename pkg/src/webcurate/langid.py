"""Bag of hashed character n-grams + multinomial logistic regression.

Features are the 2..4-grams of the lowercased, whitespace-collapsed text
(padded with one space on each side), hashed into ``hash_dim`` buckets by
multiply-shift over a 64-bit BLAKE2b base hash, L2-normalized.
"""

from __future__ import annotations

import hashlib
import logging
import math
import re
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

MAGIC = b"LIDM1"
DEFAULT_HASH_BITS = 18
_MULT = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1
_WS_RE = re.compile(r"\s+")


@lru_cache(maxsize=1 << 20)
def _bucket(ngram: str, bits: int) -> int:
    x = int.from_bytes(hashlib.blake2b(ngram.encode("utf-8"), digest_size=8).digest(), "little")
    return ((x * _MULT) & _MASK64) >> (64 - bits)


def featurize(text: str, hash_dim: int, ngram_range: tuple[int, int] = (2, 4)) -> tuple[np.ndarray, np.ndarray]:
    """Sparse (indices, values) feature vector; values have unit L2 norm."""
    bits = hash_dim.bit_length() - 1
    padded = " " + _WS_RE.sub(" ", text.lower()).strip() + " "
    lo, hi = ngram_range
    idx = [
        _bucket(padded[i : i + n], bits)
        for n in range(lo, hi + 1)
        for i in range(len(padded) - n + 1)
    ]
    if not idx:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    indices, counts = np.unique(np.asarray(idx, dtype=np.int64), return_counts=True)
    values = counts.astype(np.float64)
    values /= np.sqrt(values @ values)
    return indices, values


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


@dataclass
class LangModel:
    labels: list[str]
    weights: np.ndarray  # (n_labels, hash_dim)
    bias: np.ndarray  # (n_labels,)
    ngram_range: tuple[int, int] = (2, 4)
    heldout_accuracy: float | None = field(default=None, compare=False)
    skipped_samples: int = field(default=0, compare=False)

    @property
    def hash_dim(self) -> int:
        return self.weights.shape[1]

    def scores(self, text: str) -> dict[str, float]:
        if not text or not text.strip():
            raise ValueError("cannot classify empty text")
        idx, vals = featurize(text, self.hash_dim, self.ngram_range)
        probs = _softmax(self.weights[:, idx] @ vals + self.bias)
        return {label: float(p) for label, p in zip(self.labels, probs)}

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    def to_bytes(self) -> bytes:
        n_labels, dim = self.weights.shape
        parts = [MAGIC, struct.pack("<IIII", n_labels, dim, *self.ngram_range)]
        for label in self.labels:
            raw = label.encode("utf-8")
            parts.append(struct.pack("<H", len(raw)) + raw)
        parts.append(self.bias.astype("<f8").tobytes())
        parts.append(self.weights.astype("<f8").tobytes())
        return b"".join(parts)

    @classmethod
    def load(cls, path: str | Path) -> "LangModel":
        return cls.from_bytes(Path(path).read_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "LangModel":
        if not data.startswith(MAGIC):
            raise ValueError("not a LIDM1 model file")
        pos = len(MAGIC)
        n_labels, dim, lo, hi = struct.unpack_from("<IIII", data, pos)
        pos += 16
        labels = []
        for _ in range(n_labels):
            (n,) = struct.unpack_from("<H", data, pos)
            labels.append(data[pos + 2 : pos + 2 + n].decode("utf-8"))
            pos += 2 + n
        bias = np.frombuffer(data, dtype="<f8", count=n_labels, offset=pos).astype(np.float64)
        pos += 8 * n_labels
        expected = pos + 8 * n_labels * dim
        if len(data) != expected:
            raise ValueError(f"model file size {len(data)} != expected {expected}")
        weights = np.frombuffer(data, dtype="<f8", count=n_labels * dim, offset=pos)
        return cls(labels, weights.reshape(n_labels, dim).astype(np.float64), bias, (lo, hi))


def train(
    labeled_texts,
    epochs: int = 10,
    learning_rate: float = 0.5,
    seed: int = 0,
    *,
    hash_dim: int = 1 << DEFAULT_HASH_BITS,
    heldout_fraction: float = 0.2,
    min_samples_per_label: int = 10,
) -> LangModel:
    """Fit the classifier by per-sample SGD on the softmax loss.

    Samples are canonically sorted before the seeded split and shuffles,
    so the result depends only on the sample multiset and ``seed``.
    The held-out accuracy is stored on the returned model.
    """
    if hash_dim & (hash_dim - 1):
        raise ValueError("hash_dim must be a power of two")
    samples = []
    skipped = 0
    for text, label in labeled_texts:
        if not text or not text.strip():
            skipped += 1
            continue
        samples.append((text, label))
    if skipped:
        logger.warning("skipped %d empty training samples", skipped)
    labels = sorted({label for _, label in samples})
    if len(labels) < 2:
        raise ValueError("training needs at least two distinct labels")
    for label in labels:
        n = sum(1 for _, lab in samples if lab == label)
        if n < min_samples_per_label:
            raise ValueError(f"label {label!r} has {n} samples, need {min_samples_per_label}")

    samples.sort(key=lambda s: (s[1], s[0]))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(samples))
    n_held = int(round(len(samples) * heldout_fraction))
    held = [samples[i] for i in order[:n_held]]
    fit = [samples[i] for i in order[n_held:]]

    label_index = {label: i for i, label in enumerate(labels)}
    feats = [featurize(text, hash_dim) for text, _ in fit]
    targets = [label_index[label] for _, label in fit]
    weights = np.zeros((len(labels), hash_dim))
    bias = np.zeros(len(labels))
    for _ in range(epochs):
        for i in rng.permutation(len(fit)):
            idx, vals = feats[i]
            grad = _softmax(weights[:, idx] @ vals + bias)
            grad[targets[i]] -= 1.0
            weights[:, idx] -= learning_rate * np.outer(grad, vals)
            bias -= learning_rate * grad

    model = LangModel(labels, weights, bias, skipped_samples=skipped)
    if held:
        correct = sum(1 for text, label in held if classify(model, text)[0] == label)
        model.heldout_accuracy = correct / len(held)
    return model


def classify(model: LangModel, text: str) -> tuple[str, float, dict[str, float]]:
    scores = model.scores(text)
    top = max(model.labels, key=lambda label: scores[label])
    return top, scores[top], scores


def passes_gate(score: float, threshold: float = 0.65) -> bool:
    return score >= threshold


def language_decision(
    label: str, score: float, *, target: str = "en", threshold: float = 0.65, mode: str = "threshold"
) -> bool:
    """Gate on the classifier output.

    ``threshold`` mode keeps the target language at or above ``threshold``;
    ``argmax`` mode keeps it whenever it is the top label.
    """
    if mode == "argmax":
        return label == target
    if mode != "threshold":
        raise ValueError(f"unknown language gate mode {mode!r}")
    return label == target and passes_gate(score, threshold)


def read_score_file(path: str | Path) -> dict[str, tuple[str, float]]:
    """``record_id<TAB>label<TAB>score`` lines."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            score = float(parts[2])
            if not 0.0 <= score <= 1.0 or math.isnan(score):
                raise ValueError(f"{path}:{lineno}: score {score} outside [0, 1]")
            out[parts[0]] = (parts[1], score)
    return out


def write_score_file(path: str | Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record_id, label, score in rows:
            fh.write(f"{record_id}\t{label}\t{score!r}\n")
