# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for distance sums and per-split test statistics.

Semantics match ``_kernels_py`` one to one; that module is the fallback
when this extension is missing.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

NAME = "compiled"


def nearest_dists(const cnp.float64_t[::1] query, const cnp.float64_t[::1] target):
    """Distance from each query point to its nearest target point."""
    cdef Py_ssize_t nq = query.shape[0]
    cdef Py_ssize_t nt = target.shape[0]
    out_arr = np.empty(nq, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t i, t = 0
    cdef double q, d
    for i in range(nq):
        q = query[i]
        while t + 1 < nt and target[t + 1] <= q:
            t += 1
        d = fabs(q - target[t])
        if t + 1 < nt and target[t + 1] - q < d:
            d = target[t + 1] - q
        out[i] = d
    return out_arr


def midranks(const cnp.float64_t[::1] x):
    """Ranks 1..n with ties assigned the mean rank of their group."""
    cdef Py_ssize_t n = x.shape[0]
    order_arr = np.argsort(np.asarray(x), kind="stable")
    cdef cnp.intp_t[::1] order = order_arr
    ranks_arr = np.empty(n, dtype=np.float64)
    cdef cnp.float64_t[::1] ranks = ranks_arr
    cdef Py_ssize_t i = 0, j, m
    cdef double r
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        r = 0.5 * (i + j) + 1.0
        for m in range(i, j + 1):
            ranks[order[m]] = r
        i = j + 1
    return ranks_arr


def mw_stats(const cnp.float64_t[::1] x, int min_segment):
    """Normalized Mann-Whitney statistic for every admissible split."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nk = n - 2 * min_segment + 1
    if nk <= 0:
        return np.empty(0, dtype=np.float64)
    cdef cnp.float64_t[::1] ranks = midranks(x)
    out_arr = np.empty(nk, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double csum = 0.0, k, u, mu, sigma, stat
    for i in range(min_segment - 1):
        csum += ranks[i]
    for i in range(min_segment - 1, n - min_segment):
        csum += ranks[i]
        k = i + 1.0
        u = csum - k * (k + 1.0) / 2.0
        mu = k * (n - k) / 2.0
        sigma = sqrt(k * (n - k) * (n + 1.0) / 12.0)
        stat = fabs(u - mu)
        out[i - (min_segment - 1)] = stat / sigma if sigma > 0 else 0.0
    return out_arr


def ks_stats(const cnp.float64_t[::1] x, int min_segment):
    """Scaled two-sample Kolmogorov-Smirnov statistic for every split."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nk = n - 2 * min_segment + 1
    if nk <= 0:
        return np.empty(0, dtype=np.float64)
    values_arr = np.unique(np.asarray(x))
    cdef cnp.float64_t[::1] values = values_arr
    cdef Py_ssize_t m = values.shape[0]
    cdef cnp.float64_t[::1] total = np.searchsorted(
        np.sort(np.asarray(x)), values_arr, side="right"
    ).astype(np.float64)
    cnt_arr = np.zeros(m, dtype=np.float64)
    cdef cnp.float64_t[::1] cnt = cnt_arr
    out_arr = np.empty(nk, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t i, j, lo, hi, mid
    cdef double k, sup, d, xi
    for i in range(n):
        xi = x[i]
        # first value index with values[j] >= x[i]
        lo = 0
        hi = m
        while lo < hi:
            mid = (lo + hi) // 2
            if values[mid] < xi:
                lo = mid + 1
            else:
                hi = mid
        for j in range(lo, m):
            cnt[j] += 1.0
        if i + 1 >= min_segment and i + 1 <= n - min_segment:
            k = i + 1.0
            sup = 0.0
            for j in range(m):
                d = fabs(cnt[j] / k - (total[j] - cnt[j]) / (n - k))
                if d > sup:
                    sup = d
            out[i + 1 - min_segment] = sqrt(k * (n - k) / n) * sup
    return out_arr


def wasserstein_cdf(const cnp.float64_t[::1] a, const cnp.float64_t[::1] b):
    """First Wasserstein distance between empirical measures on the line."""
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t ia = 0, ib = 0
    cdef double total = 0.0, prev, cur, f = 0.0, g = 0.0
    cdef bint started = False
    prev = 0.0
    while ia < na or ib < nb:
        if ib >= nb or (ia < na and a[ia] <= b[ib]):
            cur = a[ia]
        else:
            cur = b[ib]
        if started and cur > prev:
            total += fabs(f - g) * (cur - prev)
        while ia < na and a[ia] == cur:
            ia += 1
        while ib < nb and b[ib] == cur:
            ib += 1
        f = ia / <double>na
        g = ib / <double>nb
        prev = cur
        started = True
    return total
