"""Pure NumPy implementations of the hot kernels.

These are the fallback for environments where the compiled extension is
unavailable.  Each function mirrors the signature and semantics of its
counterpart in ``_ckernels`` exactly; parity is enforced by tests.

All inputs are float64 arrays sorted in non-decreasing order unless noted.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def nearest_dists(query: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Distance from each query point to its nearest target point."""
    nt = target.size
    idx = np.searchsorted(target, query)
    left = target[np.clip(idx - 1, 0, nt - 1)]
    right = target[np.clip(idx, 0, nt - 1)]
    d_left = np.where(idx > 0, np.abs(query - left), np.inf)
    d_right = np.where(idx < nt, np.abs(right - query), np.inf)
    return np.minimum(d_left, d_right)


def midranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties assigned the mean rank of their group."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    lo = np.searchsorted(xs, xs, side="left")
    hi = np.searchsorted(xs, xs, side="right")
    ranks = np.empty(x.size, dtype=np.float64)
    ranks[order] = 0.5 * (lo + hi + 1.0)
    return ranks


def mw_stats(x: np.ndarray, min_segment: int) -> np.ndarray:
    """Normalized Mann-Whitney statistic for every admissible split.

    Returns |U_k - mu_k| / sigma_k for k = min_segment .. n - min_segment,
    where U_k is the rank-sum form of the two-sample statistic comparing
    x[:k] against x[k:].
    """
    n = x.size
    ks = np.arange(min_segment, n - min_segment + 1, dtype=np.float64)
    if ks.size == 0:
        return np.empty(0, dtype=np.float64)
    csum = np.cumsum(midranks(x))
    u = csum[min_segment - 1 : n - min_segment] - ks * (ks + 1.0) / 2.0
    mu = ks * (n - ks) / 2.0
    sigma = np.sqrt(ks * (n - ks) * (n + 1.0) / 12.0)
    out = np.abs(u - mu)
    np.divide(out, sigma, out=out, where=sigma > 0)
    out[sigma == 0] = 0.0
    return out


def ks_stats(x: np.ndarray, min_segment: int) -> np.ndarray:
    """Scaled two-sample Kolmogorov-Smirnov statistic for every split.

    Returns sqrt(k (n-k) / n) * sup |F1 - F2| for k = min_segment ..
    n - min_segment, with F1, F2 the empirical CDFs of x[:k] and x[k:].
    """
    n = x.size
    nk = n - 2 * min_segment + 1
    if nk <= 0:
        return np.empty(0, dtype=np.float64)
    values = np.unique(x)
    # le[i, j] counts how many of x[:i+1] are <= values[j]
    le = np.cumsum(x[:, None] <= values[None, :], axis=0, dtype=np.float64)
    total = le[-1]
    ks = np.arange(min_segment, n - min_segment + 1, dtype=np.float64)
    c = le[min_segment - 1 : n - min_segment]
    f1 = c / ks[:, None]
    f2 = (total[None, :] - c) / (n - ks)[:, None]
    sup = np.max(np.abs(f1 - f2), axis=1)
    return np.sqrt(ks * (n - ks) / n) * sup


def wasserstein_cdf(a: np.ndarray, b: np.ndarray) -> float:
    """First Wasserstein distance between empirical measures on the line.

    Integrates |F - G| over the real line, where F and G are the empirical
    CDFs of a and b; both are piecewise constant so the integral is an
    exact finite sum.
    """
    v = np.union1d(a, b)
    if v.size < 2:
        return 0.0
    f = np.searchsorted(a, v, side="right") / a.size
    g = np.searchsorted(b, v, side="right") / b.size
    return float(np.sum(np.abs(f[:-1] - g[:-1]) * np.diff(v)))
