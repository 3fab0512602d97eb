"""Compare a metric's histogram on a good and a bad corpus; propose cutoffs.

Bins are left-closed ``[e_i, e_{i+1})`` except the last, which also holds
its right edge (the numpy convention). A low-side suggestion therefore
reads "drop value < t" and a high-side one "drop value >= t"; with ``t`` on
a bin edge the removed mass equals the summed bin mass exactly.
Suggestions are advisory.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .filters.metrics import compute_metrics


@dataclass
class Histogram:
    metric_name: str
    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.counts) != len(self.bin_edges) - 1:
            raise ValueError("need exactly one more edge than bins")
        if np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")

    @property
    def sample_count(self) -> int:
        return int(self.counts.sum())

    @property
    def densities(self) -> np.ndarray:
        """Fraction of samples per bin (sums to 1)."""
        n = self.sample_count
        return self.counts / n if n else np.zeros(len(self.counts))

    def merge(self, other: "Histogram") -> "Histogram":
        if self.metric_name != other.metric_name or not np.array_equal(self.bin_edges, other.bin_edges):
            raise ValueError("can only merge histograms of one metric with identical bins")
        return Histogram(self.metric_name, self.bin_edges, self.counts + other.counts)


@dataclass(frozen=True)
class Binning:
    """Fixed-width bins over ``[lo, hi]`` or ``bins`` quantile bins."""

    bins: int = 50
    lo: float | None = 0.0
    hi: float | None = 1.0
    kind: str = "fixed"

    def edges(self, values: np.ndarray) -> np.ndarray:
        if self.bins < 1:
            raise ValueError("need at least one bin")
        if self.kind == "fixed":
            lo = float(values.min()) if self.lo is None else self.lo
            hi = float(values.max()) if self.hi is None else self.hi
            if hi <= lo:
                hi = lo + 1.0
            return np.linspace(lo, hi, self.bins + 1)
        if self.kind == "quantile":
            edges = np.unique(np.quantile(values, np.linspace(0, 1, self.bins + 1)))
            if len(edges) < 2:
                edges = np.array([edges[0], edges[0] + 1.0])
            return edges
        raise ValueError(f"unknown binning kind {self.kind!r}")


def histogram_of(metric_name: str, values, edges) -> Histogram:
    values = np.asarray(values, dtype=float)
    edges = np.asarray(edges, dtype=float)
    # values outside the range are clipped into the end bins
    clipped = np.clip(values, edges[0], edges[-1])
    counts, _ = np.histogram(clipped, bins=edges)
    return Histogram(metric_name, edges, counts)


def metric_values(corpus: Iterable, selector: str, short_line_len: int = 30) -> np.ndarray:
    """Evaluate ``selector`` (e.g. ``lines_end_punct_fraction`` or
    ``top_ngram_char_fraction.2``) on every text of the corpus.

    Corpus items may be strings or objects with a ``text`` attribute.
    """
    out = []
    for item in corpus:
        text = item if isinstance(item, str) else item.text
        out.append(compute_metrics(text, short_line_len).get(selector))
    return np.asarray(out, dtype=float)


def collect(corpus: Iterable, selector: str, binning: Binning = Binning(), edges=None) -> Histogram:
    values = metric_values(corpus, selector)
    if not len(values):
        raise ValueError("empty corpus")
    if edges is None:
        edges = binning.edges(values)
    return histogram_of(selector, values, edges)


@dataclass(frozen=True)
class Suggestion:
    metric: str
    direction: str  # "<" drops values below threshold, ">=" drops values at or above
    threshold: float
    mass_removed_low: float
    mass_removed_high: float

    def drops(self, value: float) -> bool:
        return value < self.threshold if self.direction == "<" else value >= self.threshold

    def row(self) -> dict:
        return {
            "metric": self.metric,
            "direction": self.direction,
            "threshold": self.threshold,
            "mass_removed_low": self.mass_removed_low,
            "mass_removed_high": self.mass_removed_high,
        }


@dataclass(frozen=True)
class Region:
    """Bins ``[first, last]`` where the low-quality density dominates."""

    first: int
    last: int
    lo_edge: float
    hi_edge: float
    mass_low: float
    mass_high: float


def _regions(gap: np.ndarray, min_gap: float) -> list[tuple[int, int]]:
    hot = gap >= min_gap
    out, start = [], None
    for i, flag in enumerate(hot):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            out.append((start, i - 1))
            start = None
    if start is not None:
        out.append((start, len(hot) - 1))
    return out


def _check_pair(high: Histogram, low: Histogram) -> None:
    if not np.array_equal(high.bin_edges, low.bin_edges):
        raise ValueError("histograms must share bin edges")


def dominant_regions(high: Histogram, low: Histogram, min_gap: float = 0.01) -> list[Region]:
    _check_pair(high, low)
    dh, dl = high.densities, low.densities
    out = []
    for a, b in _regions(dl - dh, min_gap):
        out.append(
            Region(a, b, float(high.bin_edges[a]), float(high.bin_edges[b + 1]),
                   float(dl[a : b + 1].sum()), float(dh[a : b + 1].sum()))
        )
    return out


def suggest_thresholds(high: Histogram, low: Histogram, min_gap: float = 0.01) -> list[Suggestion]:
    """One-sided thresholds for regions touching either end of the range.

    Interior regions are only diagnostics (see ``dominant_regions``).
    """
    _check_pair(high, low)
    n_bins = len(high.counts)
    out = []
    for r in dominant_regions(high, low, min_gap):
        if r.first == 0:
            out.append(Suggestion(high.metric_name, "<", r.hi_edge, r.mass_low, r.mass_high))
        if r.last == n_bins - 1 and r.first > 0:
            out.append(Suggestion(high.metric_name, ">=", r.lo_edge, r.mass_low, r.mass_high))
    return out


def report(high: Histogram, low: Histogram, min_gap: float = 0.01) -> tuple[str, list[dict]]:
    """Text table plus machine-readable rows (one per suggestion)."""
    rows = [s.row() for s in suggest_thresholds(high, low, min_gap)]
    lines = [f"{'metric':<36} {'rule':<6} {'threshold':>10} {'low removed':>12} {'high removed':>13}"]
    for r in rows:
        lines.append(
            f"{r['metric']:<36} {r['direction']:<6} {r['threshold']:>10.4g} "
            f"{100 * r['mass_removed_low']:>11.2f}% {100 * r['mass_removed_high']:>12.2f}%"
        )
    n_bins = len(high.counts)
    interior = [g for g in dominant_regions(high, low, min_gap) if g.first > 0 and g.last < n_bins - 1]
    for g in interior:
        lines.append(f"  interior region [{g.lo_edge:.4g}, {g.hi_edge:.4g}): low {g.mass_low:.3f} high {g.mass_high:.3f}")
    if not rows:
        lines.append("  no edge-anchored region where low-quality density dominates")
    return "\n".join(lines) + "\n", rows
