"""How often does a random sample contain copies of the same document?

Worst case: every snapshot is an exact copy of every other one. Sampling
``n`` items without replacement from ``S`` copies of ``D`` documents gives
each document a hypergeometric multiplicity, which is the closed form the
simulation is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import hypergeom


@dataclass
class DuplicateDistribution:
    # index k holds the number of sampled documents seen exactly k times
    counts: np.ndarray
    expected: np.ndarray
    variance: np.ndarray
    docs_per_snapshot: int
    sample_size: int
    replicates: int

    @property
    def sampled_documents(self) -> int:
        return int(self.counts[1:].sum())

    def unique_fraction(self) -> float:
        seen = self.sampled_documents
        return float(self.counts[1] / seen) if seen else 0.0

    def histogram(self) -> dict[int, int]:
        return {k: int(c) for k, c in enumerate(self.counts) if k >= 1 and c}

    def merged_bins(self, min_expected: float = 5.0) -> list[tuple[int, int, int, float, float]]:
        """Bins ``(k_lo, k_hi, observed, expected, variance)`` over k >= 1.

        Sparse bins are folded into their neighbours until every bin expects
        at least ``min_expected`` documents, so a 3-sigma comparison is
        meaningful. Variances add, which treats bins as independent.
        """
        bins: list[list] = []
        for k in range(1, len(self.counts)):
            entry = [k, k, int(self.counts[k]), float(self.expected[k]), float(self.variance[k])]
            if bins and bins[-1][3] < min_expected:
                last = bins[-1]
                last[1] = k
                last[2] += entry[2]
                last[3] += entry[3]
                last[4] += entry[4]
            else:
                bins.append(entry)
        while len(bins) > 1 and bins[-1][3] < min_expected:
            tail = bins.pop()
            last = bins[-1]
            last[1] = tail[1]
            for i in (2, 3, 4):
                last[i] += tail[i]
        return [tuple(b) for b in bins]


def expected_multiplicities(num_snapshots: int, docs_per_snapshot: int, sample_size: int) -> np.ndarray:
    """Expected number of documents seen k times, for k = 0..num_snapshots."""
    total = num_snapshots * docs_per_snapshot
    k = np.arange(num_snapshots + 1)
    return docs_per_snapshot * hypergeom(total, num_snapshots, sample_size).pmf(k)


def simulate_duplicate_distribution(
    num_snapshots: int = 100,
    tokens_per_snapshot: int = 1_000_000,
    tokens_per_doc: int = 1_000,
    sample_tokens: int = 50_000,
    seed: int = 0,
    replicates: int = 1,
) -> DuplicateDistribution:
    """Sample documents from ``num_snapshots`` identical snapshots.

    Token budgets are converted to document counts, so a 1B-token sample of a 20T
    crawl becomes a sample fraction of 5e-5 of a desk-sized population.
    Histograms of ``replicates`` independent samples are summed.
    """
    if min(num_snapshots, tokens_per_snapshot, tokens_per_doc, replicates) < 1:
        raise ValueError("snapshot count, token sizes and replicates must be positive")
    docs = tokens_per_snapshot // tokens_per_doc
    if docs < 1:
        raise ValueError("tokens_per_snapshot must cover at least one document")
    total = docs * num_snapshots
    n = sample_tokens // tokens_per_doc
    if not 0 <= n <= total:
        raise ValueError(f"sample of {n} documents outside [0, {total}]")

    rng = np.random.default_rng(seed)
    counts = np.zeros(num_snapshots + 1, dtype=np.int64)
    for _ in range(replicates):
        picks = rng.choice(total, size=n, replace=False)
        per_doc = np.bincount(picks % docs, minlength=docs)
        counts += np.bincount(per_doc, minlength=num_snapshots + 1)

    p = hypergeom(total, num_snapshots, n).pmf(np.arange(num_snapshots + 1))
    expected = replicates * docs * p
    variance = replicates * docs * p * (1 - p)
    return DuplicateDistribution(counts, expected, variance, docs, n, replicates)
