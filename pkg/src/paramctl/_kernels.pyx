# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_kernels_py.py`` for the reference version."""

from libc.math cimport exp, log, sqrt, INFINITY, NAN
from libc.stdlib cimport malloc, free, calloc

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef inline long long _iabs(long long v) nogil:
    return -v if v < 0 else v


cdef double _binom(long long a, long long b) nogil:
    cdef long long t
    cdef double c = 1.0
    if b < 0 or b > a:
        return 0.0
    if a - b < b:
        b = a - b
    for t in range(1, b + 1):
        c = c * <double>(a - b + t) / <double>t
    return c


def ks_stat_int(const double[::1] x_sorted, const double[::1] y_sorted):
    cdef Py_ssize_t n1 = x_sorted.shape[0], n2 = y_sorted.shape[0]
    cdef Py_ssize_t i = 0, j = 0
    cdef long long d, best = 0
    cdef double v
    while i < n1 or j < n2:
        if j >= n2 or (i < n1 and x_sorted[i] <= y_sorted[j]):
            v = x_sorted[i]
        else:
            v = y_sorted[j]
        while i < n1 and x_sorted[i] <= v:
            i += 1
        while j < n2 and y_sorted[j] <= v:
            j += 1
        d = _iabs(<long long>i * n2 - <long long>j * n1)
        if d > best:
            best = d
    return best


cdef inline long long _floordiv(long long a, long long b) nogil:
    # b > 0
    cdef long long q = a / b
    if a % b != 0 and a < 0:
        q -= 1
    return q


cdef double _sf_exact(long long dnum, long long n1, long long n2) nogil:
    # only the band |i*n2 - j*n1| < dnum of each row is touched
    cdef double *prev
    cdef double *cur
    cdef double *tmp
    cdef double exit_mass = 0.0, total, p, from_below
    cdef long long i, j, lo, hi, plo = 0, phi = -1, nlo, up_hi
    if dnum <= 0:
        return 1.0
    prev = <double *> malloc((n2 + 1) * sizeof(double))
    cur = <double *> malloc((n2 + 1) * sizeof(double))
    for i in range(n1 + 1):
        lo = _floordiv(i * n2 - dnum, n1) + 1
        hi = _floordiv(i * n2 + dnum - 1, n1)
        if lo < 0:
            lo = 0
        if hi > n2:
            hi = n2
        for j in range(lo, hi + 1):
            from_below = prev[j] if (i > 0 and plo <= j <= phi) else 0.0
            if i == 0 and j == 0:
                cur[j] = 1.0
            elif j == lo:
                cur[j] = from_below
            else:
                cur[j] = cur[j - 1] + from_below
        if hi < n2:
            exit_mass += cur[hi] * _binom(n1 - i + n2 - hi - 1, n1 - i)
        if i < n1:
            nlo = _floordiv((i + 1) * n2 - dnum, n1) + 1
            up_hi = nlo - 1 if nlo - 1 < hi else hi
            for j in range(lo, up_hi + 1):
                if cur[j] != 0.0:
                    exit_mass += cur[j] * _binom(n1 - i - 1 + n2 - j, n2 - j)
        plo = lo
        phi = hi
        tmp = prev
        prev = cur
        cur = tmp
    free(prev)
    free(cur)
    total = _binom(n1 + n2, n1)
    p = exit_mass / total
    if p > 1.0:
        return 1.0
    if p < 0.0:
        return 0.0
    return p


cdef double _sf_asymptotic(double d, long long n1, long long n2) nogil:
    cdef double ne, sq, lam, a, term, total = 0.0, sign = 1.0, p
    cdef int k
    if d <= 0.0:
        return 1.0
    ne = <double>(n1 * n2) / <double>(n1 + n2)
    sq = sqrt(ne)
    lam = (sq + 0.12 + 0.11 / sq) * d
    if lam < 0.2:
        return 1.0
    a = -2.0 * lam * lam
    for k in range(1, 10001):
        term = exp(a * k * k)
        total += sign * term
        if term < 1e-10:
            break
        sign = -sign
    p = 2.0 * total
    if p > 1.0:
        return 1.0
    if p < 0.0:
        return 0.0
    return p


cdef inline double _sf(long long dnum, long long n1, long long n2, long long exact_limit) nogil:
    if n1 * n2 < exact_limit:
        return _sf_exact(dnum, n1, n2)
    return _sf_asymptotic(<double>dnum / <double>(n1 * n2), n1, n2)


def ks_sf_exact(long long dnum, long long n1, long long n2):
    return _sf_exact(dnum, n1, n2)


def ks_sf_asymptotic(double d, long long n1, long long n2):
    return _sf_asymptotic(d, n1, n2)


def ks_sf(long long dnum, long long n1, long long n2, long long exact_limit):
    return _sf(dnum, n1, n2, exact_limit)


def best_ks_split(const double[::1] keys, const cnp.intp_t[::1] groups, Py_ssize_t n_groups,
                  Py_ssize_t min_side, long long exact_limit):
    cdef Py_ssize_t n = keys.shape[0]
    cdef Py_ssize_t j, g
    cdef long long *left
    cdef long long *totals
    cdef long long cum_l, cum_t, d, dnum, nn = n
    cdef double p, best_p = INFINITY, best_split = NAN
    cdef Py_ssize_t best_idx = -1, n_cand = 0
    if n < 2 * min_side or n_groups <= 0:
        return best_p, best_split, best_idx, n_cand
    left = <long long *> calloc(n_groups, sizeof(long long))
    totals = <long long *> calloc(n_groups, sizeof(long long))
    with nogil:
        for j in range(n):
            totals[groups[j]] += 1
        for j in range(1, n - min_side + 1):
            left[groups[j - 1]] += 1
            if j < min_side or not keys[j - 1] < keys[j]:
                continue
            n_cand += 1
            cum_l = 0
            cum_t = 0
            dnum = 0
            for g in range(n_groups):
                cum_l += left[g]
                cum_t += totals[g]
                d = _iabs(cum_l * nn - cum_t * j)
                if d > dnum:
                    dnum = d
            p = _sf(dnum, j, nn - j, exact_limit)
            if p < best_p:
                best_p = p
                best_idx = j
                best_split = (keys[j - 1] + keys[j]) / 2.0
    free(left)
    free(totals)
    return best_p, best_split, best_idx, n_cand


cdef inline double _xlogx_side(double a, double b) nogil:
    cdef double tot = a + b, e = 0.0, q
    if a > 0:
        q = a / tot
        e -= q * log(q)
    if b > 0:
        q = b / tot
        e -= q * log(q)
    return e


def best_entropy_split(const double[::1] values, const signed char[::1] labels, bint conventional):
    cdef Py_ssize_t n = values.shape[0], j
    cdef double c1 = 0.0, c2, a_l = 0.0, b_l = 0.0, a_r, b_r, h, w1, w2
    cdef double best_h = INFINITY, best_split = NAN
    cdef Py_ssize_t best_idx = -1
    if n < 2:
        return best_h, best_split, best_idx
    for j in range(n):
        if labels[j] == 0:
            c1 += 1.0
    c2 = n - c1
    w1 = c1 if c1 > 0 else 1.0
    w2 = c2 if c2 > 0 else 1.0
    for j in range(1, n):
        if labels[j - 1] == 0:
            a_l += 1.0
        else:
            b_l += 1.0
        if not values[j - 1] < values[j]:
            continue
        a_r = c1 - a_l
        b_r = c2 - b_l
        if conventional:
            h = (a_l + b_l) / n * _xlogx_side(a_l, b_l) + (a_r + b_r) / n * _xlogx_side(a_r, b_r)
        else:
            h = (a_l + b_l) / w1 * _xlogx_side(a_l, b_l) + (a_r + b_r) / w2 * _xlogx_side(a_r, b_r)
        if h < best_h:
            best_h = h
            best_idx = j
            best_split = (values[j - 1] + values[j]) / 2.0
    return best_h, best_split, best_idx
