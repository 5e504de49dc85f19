#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the NumPy fallback.

Runs each hot kernel on synthetic inputs of increasing size and reports
best-of-N wall time per call for both implementations, plus an end-to-end
distance-matrix build.  The two backends are imported directly, so one
process measures both regardless of the BREAKDIST_PURE setting.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats 5] [--sizes 100,1000,10000]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from breakdist import _kernels_py  # noqa: E402
from breakdist.matrix import build_distance_matrix  # noqa: E402
from breakdist.metrics import MetricSpec  # noqa: E402
from breakdist.sets import ChangePointSet  # noqa: E402

try:
    from breakdist import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def sorted_points(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.sort(rng.uniform(0, 1000.0, n))


def kernel_cases(n: int, rng: np.random.Generator):
    a = sorted_points(rng, n)
    b = sorted_points(rng, n)
    x = rng.normal(0, 1, n)
    ms = max(2, n // 20)
    return [
        ("nearest_dists", lambda impl: impl.nearest_dists(a, b)),
        ("midranks", lambda impl: impl.midranks(x)),
        ("mw_stats", lambda impl: impl.mw_stats(x, ms)),
        ("ks_stats", lambda impl: impl.ks_stats(x, ms)),
        ("wasserstein_cdf", lambda impl: impl.wasserstein_cdf(a, b)),
    ]


def bench_kernels(sizes, repeats: int) -> None:
    print(f"{'kernel':<16} {'n':>7} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for n in sizes:
        rng = np.random.default_rng(0)
        for name, call in kernel_cases(n, rng):
            t_py = best_of(lambda: call(_kernels_py), repeats)
            if _ckernels is None:
                print(f"{name:<16} {n:>7} {t_py * 1e3:>10.3f}ms {'-':>12} {'-':>9}")
                continue
            t_c = best_of(lambda: call(_ckernels), repeats)
            ratio = t_py / t_c if t_c > 0 else float("inf")
            print(f"{name:<16} {n:>7} {t_py * 1e3:>10.3f}ms {t_c * 1e3:>10.3f}ms {ratio:>8.1f}x")


def bench_matrix(repeats: int) -> None:
    """Full pairwise MJ_1 matrix over 40 sets of ~200 points each."""
    rng = np.random.default_rng(1)
    sets = [
        ChangePointSet(np.unique(rng.integers(0, 100_000, 200)), label=f"s{i}")
        for i in range(40)
    ]
    spec = MetricSpec("mj", 1.0)

    import breakdist.backend as backend

    saved = {k: getattr(backend, k) for k in
             ("nearest_dists", "midranks", "mw_stats", "ks_stats", "wasserstein_cdf")}
    impls = [("python", _kernels_py)] + ([("compiled", _ckernels)] if _ckernels else [])
    print(f"\n{'distance matrix (40x40, mj1)':<32} {'time':>12}")
    try:
        for name, impl in impls:
            for k in saved:
                setattr(backend, k, getattr(impl, k))
            t = best_of(lambda: build_distance_matrix(sets, spec), repeats)
            print(f"{name:<32} {t * 1e3:>10.1f}ms")
    finally:
        for k, v in saved.items():
            setattr(backend, k, v)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--sizes", default="100,1000,10000",
                    help="comma-separated input lengths")
    ns = ap.parse_args(argv)
    sizes = [int(s) for s in ns.sizes.split(",") if s.strip()]
    if _ckernels is None:
        print("note: compiled extension not importable; showing fallback only\n")
    bench_kernels(sizes, ns.repeats)
    bench_matrix(ns.repeats)
    return 0


if __name__ == "__main__":
    sys.exit(main())
