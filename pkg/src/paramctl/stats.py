"""Statistical kernels used by the controllers.

Two-sample Kolmogorov-Smirnov test, entropy-minimising split search and
two-cluster k-means.  The inner loops live in :mod:`paramctl.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .core import DomainError

# Below this n1*n2 product p-values come from exact lattice-path counting;
# above it from the Kolmogorov limit with the effective-size correction.
EXACT_PRODUCT_LIMIT = 10_000


@dataclass(frozen=True)
class KsResult:
    d_statistic: float
    p_value: float


@dataclass(frozen=True)
class SplitCandidate:
    split_value: float
    score: float
    index: int = -1
    candidates: int = 0


def ks_two_sample(x: Sequence[float], y: Sequence[float], exact_limit: int = EXACT_PRODUCT_LIMIT) -> KsResult:
    """Two-sided two-sample KS test.

    ``d`` is the largest gap between the empirical CDFs.  The p-value is
    exact (no-ties null distribution) when ``len(x) * len(y)`` is below
    ``exact_limit`` and asymptotic otherwise.
    """
    xs = np.sort(np.asarray(x, dtype=np.float64))
    ys = np.sort(np.asarray(y, dtype=np.float64))
    n1, n2 = len(xs), len(ys)
    if n1 == 0 or n2 == 0:
        raise DomainError("KS test needs two non-empty samples")
    dnum = kernels.ks_stat_int(xs, ys)
    return KsResult(dnum / (n1 * n2), kernels.ks_sf(dnum, n1, n2, exact_limit))


def ks_asymptotic_pvalue(d: float, n1: int, n2: int) -> float:
    """Kolmogorov limiting tail with ``lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * d``."""
    return kernels.ks_sf_asymptotic(float(d), int(n1), int(n2))


def best_ks_split(
    keys: Sequence[float],
    values: Sequence[float],
    min_side: int = 2,
    exact_limit: int = EXACT_PRODUCT_LIMIT,
) -> SplitCandidate | None:
    """Midpoint of ``keys`` whose induced split of ``values`` has the smallest KS p-value.

    Candidates sit between distinct consecutive sorted keys and need at
    least ``min_side`` samples on each side.  Ties keep the smaller split.
    Returns ``None`` when no candidate qualifies.
    """
    k = np.asarray(keys, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if len(k) != len(v):
        raise DomainError("keys and values differ in length")
    if len(k) < 2:
        return None
    order = np.argsort(k, kind="stable")
    k = np.ascontiguousarray(k[order])
    uniq, groups = np.unique(v[order], return_inverse=True)
    groups = np.ascontiguousarray(groups, dtype=np.intp)
    p, split, idx, n_cand = kernels.best_ks_split(k, groups, len(uniq), int(min_side), int(exact_limit))
    if idx < 0:
        return None
    return SplitCandidate(float(split), float(p), int(idx), int(n_cand))


def _side_entropy(a: int, b: int) -> float:
    tot = a + b
    e = 0.0
    for c in (a, b):
        if c > 0:
            q = c / tot
            e -= q * math.log(q)
    return e


def entropy_of_split(
    p1_counts: tuple[int, int],
    p2_counts: tuple[int, int],
    cluster_sizes: tuple[int, int],
    conventional: bool = False,
) -> float:
    """Weighted cluster-label entropy of a two-way split.

    ``p1_counts``/``p2_counts`` are ``(|c1 ∩ p|, |c2 ∩ p|)`` for each side.
    By default side entropies are weighted by ``|p1|/|c1|`` and
    ``|p2|/|c2|``; ``conventional=True`` weights by ``|p_j| / N`` instead.
    ``0 ln 0`` is taken as 0.
    """
    counts = (*p1_counts, *p2_counts, *cluster_sizes)
    if any(c < 0 for c in counts):
        raise DomainError("counts must be non-negative")
    n1, n2 = sum(p1_counts), sum(p2_counts)
    if n1 == 0 or n2 == 0:
        raise DomainError("both sides of the split must be non-empty")
    e1 = _side_entropy(*p1_counts)
    e2 = _side_entropy(*p2_counts)
    if conventional:
        total = n1 + n2
        return n1 / total * e1 + n2 / total * e2
    c1, c2 = cluster_sizes
    if c1 == 0 or c2 == 0:
        raise DomainError("cluster sizes must be positive")
    return n1 / c1 * e1 + n2 / c2 * e2


def best_entropy_split(values: Iterable[tuple[float, int]], conventional: bool = False) -> SplitCandidate | None:
    """Minimum-entropy midpoint for ``(value, cluster)`` pairs, clusters in {1, 2}.

    Returns ``None`` when fewer than two distinct values are present.
    """
    pairs = list(values)
    if len(pairs) < 2:
        return None
    v = np.array([p[0] for p in pairs], dtype=np.float64)
    lab = np.array([p[1] for p in pairs])
    if not np.all((lab == 1) | (lab == 2)):
        raise DomainError("cluster labels must be 1 or 2")
    order = np.argsort(v, kind="stable")
    v = np.ascontiguousarray(v[order])
    lab = np.ascontiguousarray(lab[order] - 1, dtype=np.int8)
    h, split, idx = kernels.best_entropy_split(v, lab, bool(conventional))
    if idx < 0:
        return None
    return SplitCandidate(float(split), float(h), int(idx), len(v) - 1)


class Clustering(NamedTuple):
    labels: np.ndarray  # values in {1, 2}
    degenerate: bool


def kmeans2(points: Sequence, rng, max_iter: int = 100) -> Clustering:
    """Lloyd's algorithm with two clusters and squared Euclidean distance.

    Centres start at two distinct points drawn uniformly.  If a cluster
    empties, the point farthest from the other centre is moved into it.
    Identical points yield a balanced split flagged ``degenerate``.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = len(x)
    if n < 2:
        raise DomainError("k-means with two clusters needs at least two points")
    first = int(rng.integers(n))
    distinct = np.flatnonzero(np.any(x != x[first], axis=1))
    if distinct.size == 0:
        labels = np.where(np.arange(n) < (n + 1) // 2, 1, 2)
        return Clustering(labels, True)
    second = int(distinct[rng.integers(distinct.size)])
    centres = np.stack([x[first], x[second]])
    labels = None
    for _ in range(max_iter):
        d = ((x[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2)
        new = np.where(d[:, 1] < d[:, 0], 2, 1)
        for c in (1, 2):
            if not np.any(new == c):
                other = 2 if c == 1 else 1
                far = int(np.argmax(d[:, other - 1]))
                new[far] = c
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centres = np.stack([x[labels == 1].mean(axis=0), x[labels == 2].mean(axis=0)])
    return Clustering(labels, False)
