import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.special import kolmogorov
from scipy.stats import ks_2samp

from oracles import entropy_eq, exhaustive_entropy_split, permutation_ks_pvalue, scipy_best_split
from paramctl.core import DomainError, RngStream
from paramctl.stats import (
    EXACT_PRODUCT_LIMIT,
    best_entropy_split,
    best_ks_split,
    entropy_of_split,
    kmeans2,
    ks_asymptotic_pvalue,
    ks_two_sample,
)

# Frozen oracle values (computed once from the definitions, see oracles.py)
H_EXAMPLE = 1.2730283365896256          # 2 * (-(2/3) ln(2/3) - (1/3) ln(1/3))
P_DISJOINT_10_10 = 1.082508822446903e-05  # 2 / C(20, 10)
P_DISJOINT_8_8 = 0.0001554001554001554    # 2 / C(16, 8)
P_ASYMPTOTIC_05_10_12 = 0.08729785202156963  # kolmogorov(lambda) for d=0.5, n=(10, 12)

samples = st.lists(st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False), min_size=1, max_size=15)


def test_identical_samples():
    r = ks_two_sample([1, 2, 3], [1, 2, 3])
    assert r.d_statistic == 0.0 and r.p_value >= 0.99


def test_disjoint_samples():
    r = ks_two_sample([1, 2, 3], [10, 11, 12])
    assert r.d_statistic == 1.0
    assert r.p_value == pytest.approx(2 / math.comb(6, 3), rel=1e-12)


def test_disjoint_frozen_values():
    assert ks_two_sample(range(10), range(100, 110)).p_value == pytest.approx(P_DISJOINT_10_10, rel=1e-12)
    assert ks_two_sample(range(8), range(100, 108)).p_value == pytest.approx(P_DISJOINT_8_8, rel=1e-12)


def test_size_eight_against_permutation_oracle():
    rng = np.random.default_rng(8)
    for _ in range(10):
        x = rng.normal(size=8)
        y = rng.normal(rng.uniform(0, 2), size=8)
        assert abs(ks_two_sample(x, y).p_value - permutation_ks_pvalue(x, y)) <= 0.05


def test_exact_mode_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n1, n2 = rng.integers(1, 60, 2)
        x = rng.normal(size=n1)
        y = rng.normal(rng.uniform(0, 1.5), size=n2)
        ours = ks_two_sample(x, y)
        ref = ks_2samp(x, y, method="exact")
        assert ours.d_statistic == pytest.approx(ref.statistic, abs=1e-12)
        assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-14)


def test_asymptotic_formula():
    assert ks_asymptotic_pvalue(0.5, 10, 12) == pytest.approx(P_ASYMPTOTIC_05_10_12, rel=1e-12)
    for d, n1, n2 in ((0.1, 100, 200), (0.3, 50, 50), (0.05, 1000, 900)):
        ne = n1 * n2 / (n1 + n2)
        lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
        assert ks_asymptotic_pvalue(d, n1, n2) == pytest.approx(float(kolmogorov(lam)), abs=1e-9)
    # lambda < 0.2 short-circuits to 1
    assert ks_asymptotic_pvalue(0.01, 10, 10) == 1.0


def test_large_samples_use_asymptotic_formula():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=120), rng.normal(0.3, size=100)
    assert len(x) * len(y) >= EXACT_PRODUCT_LIMIT
    r = ks_two_sample(x, y)
    assert r.p_value == ks_asymptotic_pvalue(r.d_statistic, 120, 100)


def test_perfect_separation_small_p():
    assert ks_two_sample(np.arange(30.0), np.arange(30.0) + 100).p_value < 1e-10


def test_empty_sample_rejected():
    with pytest.raises(DomainError):
        ks_two_sample([], [1.0])


@settings(max_examples=200, deadline=None)
@given(samples, samples)
def test_ks_symmetric(x, y):
    a, b = ks_two_sample(x, y), ks_two_sample(y, x)
    assert a == b
    assert 0.0 <= a.d_statistic <= 1.0 and 0.0 <= a.p_value <= 1.0


@settings(max_examples=200, deadline=None)
@given(samples, samples)
def test_ks_d_invariant_under_monotone_transform(x, y):
    f = lambda v: np.arctan(np.asarray(v) / 100.0) * 7 + 3  # strictly increasing  # noqa: E731
    # the transform must not merge distinct values through rounding
    assume(len(np.unique(f(x + y))) == len(np.unique(x + y)))
    assert ks_two_sample(f(x), f(y)).d_statistic == ks_two_sample(x, y).d_statistic


# -- entropy ------------------------------------------------------------------


def test_entropy_perfect_separation():
    assert entropy_of_split((3, 0), (0, 4), (3, 4)) == 0.0


def test_entropy_balanced_side():
    # side 1 holds one of each: its entropy is ln 2, side 2 is pure
    assert entropy_of_split((1, 1), (0, 3), (1, 4)) == pytest.approx(2 / 1 * math.log(2), rel=1e-12)


def test_entropy_hand_example():
    h = entropy_of_split((2, 1), (1, 2), (3, 3))
    assert h == pytest.approx(H_EXAMPLE, rel=1e-9)
    assert round(h, 4) == 1.2730


def test_entropy_conventional_weights():
    # |p1| = 3, |p2| = 1, N = 4: (3/4) * H(2/3, 1/3) + (1/4) * 0
    h = entropy_of_split((2, 1), (1, 0), (3, 1), conventional=True)
    assert h == pytest.approx(0.75 * (-(2 / 3) * math.log(2 / 3) - (1 / 3) * math.log(1 / 3)), rel=1e-12)


def test_entropy_empty_side_signalled():
    with pytest.raises(DomainError):
        entropy_of_split((0, 0), (1, 2), (1, 2))


counts = st.integers(0, 20)


@settings(max_examples=300, deadline=None)
@given(counts, counts, counts, counts)
def test_entropy_symmetric_under_label_swap(a, b, c, d):
    assume(a + b > 0 and c + d > 0)
    # printed weights |p_j|/|c_j|: swapping labels swaps the cluster sizes, so the
    # value is preserved when the sides are relabelled together with the clusters
    assume(a + c > 0 and b + d > 0)
    h = entropy_of_split((a, b), (c, d), (a + c, b + d))
    assert entropy_of_split((d, c), (b, a), (b + d, a + c)) == pytest.approx(h, rel=1e-12, abs=1e-15)
    # conventional weights: a label swap alone leaves the value unchanged
    hc = entropy_of_split((a, b), (c, d), (a + c, b + d), conventional=True)
    assert entropy_of_split((b, a), (d, c), (b + d, a + c), conventional=True) == pytest.approx(hc, rel=1e-12, abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(counts, counts, counts, counts)
def test_entropy_matches_oracle(a, b, c, d):
    assume(a + b > 0 and c + d > 0 and a + c > 0 and b + d > 0)
    assert entropy_of_split((a, b), (c, d), (a + c, b + d)) == pytest.approx(entropy_eq(a, b, c, d), rel=1e-12, abs=1e-15)


def test_best_entropy_split_perfect():
    c = best_entropy_split([(0, 1), (1, 1), (2, 2), (3, 2)])
    assert c.split_value == 1.5 and c.score == 0.0


def test_best_entropy_split_single_value():
    assert best_entropy_split([(1.0, 1), (1.0, 2), (1.0, 1)]) is None


def test_best_entropy_split_bad_label():
    with pytest.raises(DomainError):
        best_entropy_split([(0, 1), (1, 3)])


def test_best_entropy_split_tie_smallest():
    # alternating labels: several midpoints tie; the smallest wins
    pairs = [(0, 1), (1, 2), (2, 1), (3, 2)]
    ref = exhaustive_entropy_split(pairs)
    c = best_entropy_split(pairs)
    assert c.split_value == ref[0]


@pytest.mark.parametrize("conventional", [False, True])
def test_best_entropy_split_random_vs_exhaustive(conventional):
    rng = np.random.default_rng(12)
    for _ in range(200):
        n = int(rng.integers(2, 13))
        vals = rng.integers(0, 8, size=n).astype(float) / 2
        labs = rng.integers(1, 3, size=n)
        pairs = list(zip(vals.tolist(), labs.tolist()))
        ref = exhaustive_entropy_split(pairs, conventional)
        got = best_entropy_split(pairs, conventional)
        if ref is None:
            assert got is None
            continue
        assert got.split_value == ref[0]
        assert got.score == pytest.approx(ref[1], rel=1e-12, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.sampled_from([1, 2])), min_size=2, max_size=12))
def test_best_entropy_split_is_minimal(pairs):
    got = best_entropy_split(pairs)
    values = sorted({v for v, _ in pairs})
    if len(values) < 2:
        assert got is None
        return
    for lo, hi in zip(values, values[1:]):
        s = (lo + hi) / 2
        h = entropy_eq(
            sum(1 for v, c in pairs if v <= s and c == 1), sum(1 for v, c in pairs if v <= s and c == 2),
            sum(1 for v, c in pairs if v > s and c == 1), sum(1 for v, c in pairs if v > s and c == 2),
        )
        assert got.score <= h + 1e-12


# -- KS split search ----------------------------------------------------------


def test_best_ks_split_matches_scipy_bruteforce():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(4, 60))
        keys = rng.uniform(0, 1, n)
        vals = np.where(keys < rng.uniform(0.2, 0.8), rng.normal(0, 1, n), rng.normal(rng.uniform(0, 2), 1, n))
        got = best_ks_split(keys, vals)
        ref = scipy_best_split(keys, vals)
        if ref is None:
            assert got is None
            continue
        assert got.score == pytest.approx(ref[1], rel=1e-9, abs=1e-14)
        assert got.split_value == pytest.approx(ref[0])


def test_best_ks_split_candidates_between_distinct_keys():
    keys = [0, 0, 0, 1, 1, 2, 2, 2]
    vals = [0, 0, 0, 5, 5, 9, 9, 9]
    c = best_ks_split(keys, vals)
    assert c.split_value in (0.5, 1.5)
    assert c.candidates == 2


def test_best_ks_split_min_side():
    assert best_ks_split([0, 1, 2], [0, 0, 1], min_side=2) is None


# -- k-means ------------------------------------------------------------------


def _same_up_to_relabel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.array_equal(a, b) or np.array_equal(a, 3 - b)


def test_kmeans_well_separated():
    for seed in range(10):
        c = kmeans2([0, 0.1, 10, 10.1], RngStream(seed))
        assert _same_up_to_relabel(c.labels, [1, 1, 2, 2]) and not c.degenerate


def test_kmeans_two_points():
    c = kmeans2([[0.0, 1.0], [2.0, 3.0]], RngStream(0))
    assert sorted(c.labels.tolist()) == [1, 2]


def test_kmeans_identical_points_degenerate():
    c = kmeans2([1.0] * 5, RngStream(0))
    assert c.degenerate
    assert set(c.labels.tolist()) == {1, 2}


def test_kmeans_gaussian_mixture():
    rng = np.random.default_rng(5)
    truth = np.repeat([1, 2], 10)
    pts = np.where(truth[:, None] == 1, rng.normal(0, 1, (20, 2)), rng.normal(8, 1, (20, 2)))
    labels = kmeans2(pts, RngStream(1)).labels
    agree = max(np.sum(labels == truth), np.sum(labels == 3 - truth))
    assert agree >= 19


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=30), st.integers(0, 1000))
def test_kmeans_both_clusters_nonempty(points, seed):
    labels = kmeans2(points, RngStream(seed)).labels
    assert set(labels.tolist()) == {1, 2}


def test_kmeans_needs_two_points():
    with pytest.raises(DomainError):
        kmeans2([1.0], RngStream(0))
