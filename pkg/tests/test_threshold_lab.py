import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webcurate.threshold_lab import (
    Binning,
    Histogram,
    collect,
    dominant_regions,
    histogram_of,
    metric_values,
    report,
    suggest_thresholds,
)

EDGES = np.linspace(0, 1, 51)


def test_left_closed_bins_and_clipping():
    h = histogram_of("m", [0.0, 0.02, 0.5, 1.0, 1.7, -3], EDGES)
    assert h.counts[0] == 2 and h.counts[1] == 1 and h.counts[25] == 1 and h.counts[-1] == 2
    assert h.sample_count == 6


def test_uniform_densities():
    values = (np.arange(5000) + 0.5) / 5000
    h = histogram_of("m", values, EDGES)
    assert np.allclose(h.densities, 1 / 50)
    assert abs(h.densities.sum() - 1) < 1e-12


def test_constant_corpus_uses_one_bin():
    h = collect(["A line.\nAnother line."] * 10, "lines_end_punct_fraction")
    assert h.counts[-1] == 10 and h.sample_count == 10
    q = collect(["A line.\nAnother line."] * 10, "lines_end_punct_fraction", Binning(kind="quantile"))
    assert q.sample_count == 10


def test_metric_values_selector():
    vals = metric_values(["a b a b", "x y z w"], "top_ngram_char_fraction.2")
    assert vals.tolist() == [1.0, 0.0]


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        collect([], "word_count")


def test_low_side_suggestion_at_a_bin_edge():
    rng = np.random.default_rng(0)
    high = histogram_of("lines_end_punct_fraction", rng.uniform(0.3, 1.0, 2000), EDGES)
    low = histogram_of("lines_end_punct_fraction", np.r_[rng.uniform(0, 0.12, 1500), rng.uniform(0.3, 1, 500)], EDGES)
    (s,) = suggest_thresholds(high, low)
    assert s.direction == "<"
    assert s.threshold == pytest.approx(0.12)
    assert s.mass_removed_high == 0.0
    assert s.mass_removed_low == pytest.approx(0.75)
    assert s.drops(0.1) and not s.drops(0.12)


def test_high_side_suggestion():
    high = histogram_of("m", np.full(100, 0.05), EDGES)
    low = histogram_of("m", np.r_[np.full(50, 0.05), np.full(50, 0.99)], EDGES)
    (s,) = suggest_thresholds(high, low)
    assert (s.direction, s.threshold, s.mass_removed_low, s.mass_removed_high) == (">=", 0.98, 0.5, 0.0)


def test_disjoint_supports():
    high = histogram_of("m", np.full(10, 0.9), EDGES)
    low = histogram_of("m", np.full(10, 0.1), EDGES)
    (region,) = dominant_regions(high, low)
    assert (region.first, region.last) == (5, 5)
    assert suggest_thresholds(high, low) == []
    text, rows = report(high, low)
    assert rows == [] and "interior region" in text


def test_mismatched_edges_rejected():
    with pytest.raises(ValueError):
        suggest_thresholds(histogram_of("m", [0.1], EDGES), histogram_of("m", [0.1], np.linspace(0, 1, 11)))
    with pytest.raises(ValueError):
        Histogram("m", [0, 1, 1], [1, 2])


def test_merge():
    a = histogram_of("m", [0.1, 0.2], EDGES)
    b = histogram_of("m", [0.1], EDGES)
    assert a.merge(b).sample_count == 3
    with pytest.raises(ValueError):
        a.merge(histogram_of("other", [0.1], EDGES))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=60), st.lists(st.floats(0, 1), min_size=1, max_size=60),
       st.sampled_from([2.0, 4.0, 0.5]))
def test_scale_equivariance(hi_vals, lo_vals, k):
    a = suggest_thresholds(histogram_of("m", hi_vals, EDGES), histogram_of("m", lo_vals, EDGES))
    b = suggest_thresholds(histogram_of("m", np.array(hi_vals) * k, EDGES * k),
                           histogram_of("m", np.array(lo_vals) * k, EDGES * k))
    assert [(s.direction, s.mass_removed_low, s.mass_removed_high) for s in a] == \
           [(s.direction, s.mass_removed_low, s.mass_removed_high) for s in b]
    assert all(x.threshold * k == pytest.approx(y.threshold) for x, y in zip(a, b))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=60), st.lists(st.floats(0, 1), min_size=1, max_size=60))
def test_reported_mass_matches_rule(hi_vals, lo_vals):
    for s in suggest_thresholds(histogram_of("m", hi_vals, EDGES), histogram_of("m", lo_vals, EDGES)):
        assert s.mass_removed_low == pytest.approx(np.mean([s.drops(v) for v in lo_vals]))
        assert s.mass_removed_high == pytest.approx(np.mean([s.drops(v) for v in hi_vals]))
