"""Pure-Python/numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` function for function; :mod:`paramctl.kernels`
picks whichever is importable.  KS statistics are kept as the integer
numerator ``|c_x * n_y - c_y * n_x|`` so exact tail counting never
compares floats.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def _binom(a: int, b: int) -> float:
    # same multiplication order as the compiled kernel
    if b < 0 or b > a:
        return 0.0
    b = min(b, a - b)
    c = 1.0
    for t in range(1, b + 1):
        c = c * (a - b + t) / t
    return c


def ks_stat_int(x_sorted: np.ndarray, y_sorted: np.ndarray) -> int:
    n1, n2 = len(x_sorted), len(y_sorted)
    pooled = np.concatenate([x_sorted, y_sorted])
    cx = np.searchsorted(x_sorted, pooled, side="right")
    cy = np.searchsorted(y_sorted, pooled, side="right")
    return int(np.max(np.abs(cx * n2 - cy * n1)))


def ks_sf_exact(dnum: int, n1: int, n2: int) -> float:
    """P(D >= dnum / (n1*n2)) under the null, by lattice-path counting.

    Paths from (0, 0) to (n1, n2) stay inside while
    ``|i*n2 - j*n1| < dnum``; the mass of paths that leave is
    accumulated directly so tiny tail probabilities stay accurate.
    Only the inside band of each row is visited.
    """
    if dnum <= 0:
        return 1.0
    prev = np.zeros(n2 + 1)
    plo, phi = 0, -1
    exit_mass = 0.0
    for i in range(n1 + 1):
        lo = max((i * n2 - dnum) // n1 + 1, 0)
        hi = min((i * n2 + dnum - 1) // n1, n2)
        seed = np.zeros(hi - lo + 1)
        a, b = max(lo, plo), min(hi, phi)
        if i > 0 and a <= b:
            seed[a - lo : b - lo + 1] = prev[a : b + 1]
        if i == 0:
            seed[0] = 1.0
        cur = np.zeros(n2 + 1)
        # along a row u[j] = u[j-1] + u_below[j]: a prefix sum over the band
        cur[lo : hi + 1] = np.cumsum(seed)
        if hi < n2:
            exit_mass += cur[hi] * _binom(n1 - i + n2 - hi - 1, n1 - i)
        if i < n1:
            up_hi = min((((i + 1) * n2 - dnum) // n1 + 1) - 1, hi)
            for j in range(lo, up_hi + 1):
                if cur[j] != 0.0:
                    exit_mass += cur[j] * _binom(n1 - i - 1 + n2 - j, n2 - j)
        prev, plo, phi = cur, lo, hi
    p = exit_mass / _binom(n1 + n2, n1)
    return min(1.0, max(0.0, p))


def ks_sf_asymptotic(d: float, n1: int, n2: int) -> float:
    """Kolmogorov tail with the effective-size correction."""
    if d <= 0.0:
        return 1.0
    ne = n1 * n2 / (n1 + n2)
    sq = math.sqrt(ne)
    lam = (sq + 0.12 + 0.11 / sq) * d
    if lam < 0.2:
        return 1.0
    a = -2.0 * lam * lam
    total = 0.0
    sign = 1.0
    for k in range(1, 10001):
        term = math.exp(a * k * k)
        total += sign * term
        if term < 1e-10:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_sf(dnum: int, n1: int, n2: int, exact_limit: int) -> float:
    if n1 * n2 < exact_limit:
        return ks_sf_exact(dnum, n1, n2)
    return ks_sf_asymptotic(dnum / (n1 * n2), n1, n2)


def best_ks_split(
    keys: np.ndarray, groups: np.ndarray, n_groups: int, min_side: int, exact_limit: int
) -> tuple[float, float, int, int]:
    """Scan midpoints of sorted ``keys``; KS-compare the value groups on each side.

    ``groups`` are dense ranks (0..n_groups-1) of the values aligned with
    ``keys``.  Returns ``(best_p, split, index, candidates)``; ``index``
    is -1 when no candidate has ``min_side`` samples on both sides.
    """
    n = len(keys)
    best_p, best_split, best_idx, n_cand = math.inf, math.nan, -1, 0
    if n < 2 * min_side:
        return best_p, best_split, best_idx, n_cand
    totals = np.cumsum(np.bincount(groups, minlength=n_groups)).astype(np.int64)
    onehot = np.zeros((n, n_groups), dtype=np.int64)
    onehot[np.arange(n), groups] = 1
    left = np.cumsum(np.cumsum(onehot, axis=0), axis=1)  # left[j-1, g]: first j items with rank <= g
    for j in range(min_side, n - min_side + 1):
        if not keys[j - 1] < keys[j]:
            continue
        n_cand += 1
        dnum = int(np.max(np.abs(left[j - 1] * n - totals * j)))
        p = ks_sf(dnum, j, n - j, exact_limit)
        if p < best_p:
            best_p, best_idx = p, j
            best_split = (keys[j - 1] + keys[j]) / 2.0
    return best_p, best_split, best_idx, n_cand


def _side_entropy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    tot = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        pa, pb = a / tot, b / tot
        ea = np.where(a > 0, -pa * np.log(np.where(a > 0, pa, 1.0)), 0.0)
        eb = np.where(b > 0, -pb * np.log(np.where(b > 0, pb, 1.0)), 0.0)
    return ea + eb


def best_entropy_split(values: np.ndarray, labels: np.ndarray, conventional: bool) -> tuple[float, float, int]:
    """Minimum-entropy midpoint of sorted ``values`` with 0/1 cluster ``labels``."""
    n = len(values)
    c1_total = int(np.sum(labels == 0))
    c2_total = n - c1_total
    best_h, best_split, best_idx = math.inf, math.nan, -1
    if n < 2:
        return best_h, best_split, best_idx
    a_left = np.cumsum(labels == 0)[:-1].astype(float)
    b_left = np.cumsum(labels == 1)[:-1].astype(float)
    a_right = c1_total - a_left
    b_right = c2_total - b_left
    e1 = _side_entropy(a_left, b_left)
    e2 = _side_entropy(a_right, b_right)
    p1 = a_left + b_left
    p2 = a_right + b_right
    if conventional:
        h = p1 / n * e1 + p2 / n * e2
    else:
        h = p1 / max(c1_total, 1) * e1 + p2 / max(c2_total, 1) * e2
    for j in range(1, n):
        if values[j - 1] < values[j] and h[j - 1] < best_h:
            best_h, best_idx = float(h[j - 1]), j
            best_split = (values[j - 1] + values[j]) / 2.0
    return best_h, best_split, best_idx
