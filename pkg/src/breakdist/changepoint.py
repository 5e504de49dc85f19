"""Two-phase nonparametric change-point detection.

Phase I (:func:`batch_detect`) scans a complete series for a single
distributional change.  Phase II (:func:`sequential_detect`) consumes
observations in order, flags a change as soon as the monitoring
statistic crosses its calibrated threshold, and restarts after the
flagged observation.  Both phases rank the data, so they are invariant
under strictly increasing transforms and free of the observations'
marginal distribution.

Thresholds have no closed form and are calibrated by seeded Monte-Carlo
simulation of the null (no-change) process; tables are cached on disk
and regenerated transparently when deleted.
"""
from __future__ import annotations

import hashlib
import os
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .backend import ks_stats, midranks, mw_stats
from .errors import DataError

__all__ = [
    "Series",
    "DetectorConfig",
    "DetectionResult",
    "BatchDetection",
    "ThresholdTable",
    "mann_whitney_norm",
    "ks_statistic",
    "ks_norm",
    "batch_detect",
    "sequential_detect",
    "null_thresholds",
    "batch_threshold",
    "clear_table_memo",
]

_STAT_ALIASES = {
    "mw": "mw",
    "mann-whitney": "mw",
    "mann_whitney": "mw",
    "mannwhitney": "mw",
    "ks": "ks",
    "kolmogorov-smirnov": "ks",
    "kolmogorov_smirnov": "ks",
    "kolmogorovsmirnov": "ks",
}

_CACHE_VERSION = 1

# once fewer than this many simulated null paths survive, conditional
# quantiles become too noisy; the last reliable threshold is carried
# forward instead
_SURVIVOR_FLOOR = 50

_KIND_CODE = {"batch": 1, "sequential": 2}
_STAT_CODE = {"mw": 1, "ks": 2}


@dataclass(frozen=True)
class Series:
    """An ordered sequence of real observations with an identifier."""

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise DataError(f"series {self.label!r} must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise DataError(f"series {self.label!r} has a non-finite value at position {bad}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)


def as_series(obj, label: str = "") -> Series:
    if isinstance(obj, Series):
        return obj
    return Series(np.asarray(obj, dtype=np.float64), label)


@dataclass(frozen=True)
class DetectorConfig:
    """Settings shared by both detection phases.

    Exactly one of ``alpha`` (per-test level, Phase I) and ``arl0``
    (average run length under the null, Phase II; equals 1/alpha) may be
    given; each is derived from the other, and alpha defaults to 0.05
    when neither is set.
    """

    statistic: str = "mw"
    alpha: Optional[float] = None
    arl0: Optional[float] = None
    min_segment: int = 20
    mc_replicates: int = 5000
    rng_seed: int = 0
    cache_dir: Optional[str] = None

    def __post_init__(self):
        key = str(self.statistic).strip().lower()
        if key not in _STAT_ALIASES:
            raise DataError(
                f"unknown statistic {self.statistic!r}; choose mann-whitney or kolmogorov-smirnov"
            )
        object.__setattr__(self, "statistic", _STAT_ALIASES[key])
        if self.alpha is not None and self.arl0 is not None:
            raise DataError("give either alpha or arl0, not both")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise DataError("alpha must lie strictly between 0 and 1")
        if self.arl0 is not None and self.arl0 <= 1.0:
            raise DataError("arl0 must exceed 1")
        if self.min_segment < 2:
            raise DataError("min_segment must be at least 2")
        if self.mc_replicates < 1000:
            raise DataError("mc_replicates must be at least 1000")

    @property
    def effective_alpha(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        if self.arl0 is not None:
            return 1.0 / float(self.arl0)
        return 0.05

    @property
    def effective_arl0(self) -> float:
        return 1.0 / self.effective_alpha


@dataclass(frozen=True)
class BatchDetection:
    """Outcome of a Phase-I scan that found a change."""

    change_point: int
    statistic: float
    threshold: float


@dataclass(frozen=True)
class DetectionResult:
    """All changes flagged by a Phase-II run, in order of detection."""

    change_points: np.ndarray
    statistics: np.ndarray
    thresholds: np.ndarray
    status: str = "ok"

    def __post_init__(self):
        cps = np.asarray(self.change_points, dtype=np.int64)
        st = np.asarray(self.statistics, dtype=np.float64)
        th = np.asarray(self.thresholds, dtype=np.float64)
        if not cps.size == st.size == th.size:
            raise DataError("change points, statistics and thresholds must align")
        if cps.size and np.any(np.diff(cps) <= 0):
            raise DataError("detected change points must be strictly increasing")
        if np.any(st <= th):
            raise DataError("every recorded statistic must exceed its threshold")
        for name, arr in (("change_points", cps), ("statistics", st), ("thresholds", th)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.change_points.size)


def _check_split(n: int, k: int, min_segment: int) -> None:
    lo, hi = min_segment, n - min_segment
    if not lo <= k <= hi:
        raise DataError(f"split index {k} outside [{lo}, {hi}] for series of length {n}")


def mann_whitney_norm(x, k: int, min_segment: int = 1) -> float:
    """Normalized Mann-Whitney statistic for the split at index ``k``.

    The first segment is ``x[:k]``; ties receive midranks.  Returns
    |U_k - mu| / sigma with mu = k(n-k)/2 and
    sigma = sqrt(k(n-k)(n+1)/12).
    """
    v = as_series(x).values
    n = v.size
    _check_split(n, int(k), max(1, int(min_segment)))
    k = int(k)
    r = midranks(v)
    u = float(r[:k].sum()) - k * (k + 1) / 2.0
    mu = k * (n - k) / 2.0
    sigma = np.sqrt(k * (n - k) * (n + 1) / 12.0)
    if sigma == 0.0:
        return 0.0
    return abs(u - mu) / sigma


def ks_statistic(x, k: int) -> float:
    """Raw two-sample KS statistic sup |F1 - F2| for the split at ``k``."""
    v = as_series(x).values
    n = v.size
    _check_split(n, int(k), 1)
    k = int(k)
    a = np.sort(v[:k])
    b = np.sort(v[k:])
    grid = np.unique(v)
    f1 = np.searchsorted(a, grid, side="right") / k
    f2 = np.searchsorted(b, grid, side="right") / (n - k)
    return float(np.abs(f1 - f2).max())


def ks_norm(x, k: int, cfg: Optional[DetectorConfig] = None) -> float:
    """KS statistic scaled by sqrt(k(n-k)/n) and standardized to the null.

    The null mean and standard deviation for this (k, n) come from the
    same Monte-Carlo table that calibrates the Phase-I threshold.
    """
    if cfg is None:
        cfg = DetectorConfig(statistic="ks")
    elif cfg.statistic != "ks":
        raise DataError("ks_norm needs a config with the kolmogorov-smirnov statistic")
    v = as_series(x).values
    n = v.size
    _check_split(n, int(k), cfg.min_segment)
    k = int(k)
    scaled = np.sqrt(k * (n - k) / n) * ks_statistic(v, k)
    table = _get_table("batch", n, cfg)
    mu = table.ks_mu[n, k]
    sd = table.ks_sd[n, k]
    if not np.isfinite(sd) or sd == 0.0:
        return 0.0
    return float((scaled - mu) / sd)


# --------------------------------------------------------------------------
# threshold tables


@dataclass(frozen=True)
class ThresholdTable:
    """Calibrated null thresholds, indexed by window length.

    ``thresholds[t]`` is the level crossed by a change flag in a window
    of ``t`` observations; entries below ``2*min_segment`` are NaN.  For
    the KS statistic, ``ks_mu[t, k]`` / ``ks_sd[t, k]`` hold the null
    moments used to standardize the scaled statistic.
    """

    kind: str
    statistic: str
    alpha: float
    min_segment: int
    n_max: int
    mc_replicates: int
    rng_seed: int
    thresholds: np.ndarray
    ks_mu: Optional[np.ndarray] = None
    ks_sd: Optional[np.ndarray] = None

    def threshold_at(self, t: int) -> float:
        if not 2 * self.min_segment <= t <= self.n_max:
            raise DataError(f"no threshold calibrated for window length {t}")
        return float(self.thresholds[t])


def _uniform_null(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.random(shape)


def _cache_root(cfg: DetectorConfig) -> Path:
    if cfg.cache_dir:
        return Path(cfg.cache_dir)
    env = os.environ.get("BREAKDIST_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "breakdist"


def _cache_key(kind: str, n_max: int, cfg: DetectorConfig) -> str:
    parts = (
        _CACHE_VERSION,
        kind,
        cfg.statistic,
        f"{cfg.effective_alpha:.12g}",
        cfg.min_segment,
        n_max,
        cfg.mc_replicates,
        cfg.rng_seed,
    )
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


def _table_path(kind: str, n_max: int, cfg: DetectorConfig) -> Path:
    key = _cache_key(kind, n_max, cfg)
    return _cache_root(cfg) / f"{kind}-{cfg.statistic}-{key}.npz"


def _save_table(path: Path, table: ThresholdTable) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "meta": np.asarray(
            [
                _CACHE_VERSION,
                _KIND_CODE[table.kind],
                _STAT_CODE[table.statistic],
                table.min_segment,
                table.n_max,
                table.mc_replicates,
                table.rng_seed,
            ],
            dtype=np.int64,
        ),
        "alpha": np.asarray([table.alpha], dtype=np.float64),
        "thresholds": table.thresholds,
    }
    if table.ks_mu is not None:
        payload["ks_mu"] = table.ks_mu
        payload["ks_sd"] = table.ks_sd
    tmp = path.with_suffix(".tmp.npz")
    np.savez_compressed(tmp, **payload)
    os.replace(tmp, path)


def _load_table(path: Path, kind: str, n_max: int, cfg: DetectorConfig) -> Optional[ThresholdTable]:
    if not path.exists():
        return None
    try:
        with np.load(path) as data:
            meta = data["meta"]
            expected = [
                _CACHE_VERSION,
                _KIND_CODE[kind],
                _STAT_CODE[cfg.statistic],
                cfg.min_segment,
                n_max,
                cfg.mc_replicates,
                cfg.rng_seed,
            ]
            if meta.tolist() != expected:
                return None
            if abs(float(data["alpha"][0]) - cfg.effective_alpha) > 1e-12:
                return None
            return ThresholdTable(
                kind=kind,
                statistic=cfg.statistic,
                alpha=cfg.effective_alpha,
                min_segment=cfg.min_segment,
                n_max=n_max,
                mc_replicates=cfg.mc_replicates,
                rng_seed=cfg.rng_seed,
                thresholds=data["thresholds"],
                ks_mu=data["ks_mu"] if "ks_mu" in data else None,
                ks_sd=data["ks_sd"] if "ks_sd" in data else None,
            )
    except (OSError, KeyError, ValueError, zipfile.BadZipFile):
        return None


_TABLE_MEMO: dict = {}


def clear_table_memo() -> None:
    """Drop in-process threshold tables (disk cache is untouched)."""
    _TABLE_MEMO.clear()


def _get_table(
    kind: str,
    n_max: int,
    cfg: DetectorConfig,
    _null: Optional[Callable] = None,
) -> ThresholdTable:
    memo_key = (kind, _cache_key(kind, n_max, cfg))
    if _null is None and memo_key in _TABLE_MEMO:
        return _TABLE_MEMO[memo_key]
    path = _table_path(kind, n_max, cfg)
    table = None if _null is not None else _load_table(path, kind, n_max, cfg)
    if table is None:
        if kind == "batch":
            table = _calibrate_batch(n_max, cfg, _null or _uniform_null)
        else:
            table = _calibrate_sequential(n_max, cfg, _null or _uniform_null)
        if _null is None:
            try:
                _save_table(path, table)
            except OSError:
                pass
    if _null is None:
        _TABLE_MEMO[memo_key] = table
    return table


def _rng_for(kind: str, n_max: int, cfg: DetectorConfig) -> np.random.Generator:
    seq = np.random.SeedSequence(
        [cfg.rng_seed & 0xFFFFFFFF, n_max, _KIND_CODE[kind], _STAT_CODE[cfg.statistic]]
    )
    return np.random.default_rng(seq)


def _mw_z_matrix(values: np.ndarray, min_segment: int) -> np.ndarray:
    """Per-path normalized MW statistics; rows are paths, columns splits."""
    b, n = values.shape
    order = np.argsort(values, axis=1, kind="stable")
    ranks = np.empty_like(order, dtype=np.float64)
    rows = np.arange(b)[:, None]
    ranks[rows, order] = np.arange(1, n + 1, dtype=np.float64)
    csum = np.cumsum(ranks, axis=1)
    ks = np.arange(min_segment, n - min_segment + 1, dtype=np.float64)
    u = csum[:, min_segment - 1 : n - min_segment] - ks * (ks + 1) / 2.0
    mu = ks * (n - ks) / 2.0
    sigma = np.sqrt(ks * (n - ks) * (n + 1) / 12.0)
    return np.abs(u - mu) / sigma


def _ks_scaled_matrix(values: np.ndarray, min_segment: int) -> np.ndarray:
    b = values.shape[0]
    out = np.empty((b, values.shape[1] - 2 * min_segment + 1), dtype=np.float64)
    for i in range(b):
        out[i] = ks_stats(values[i], min_segment)
    return out


def _calibrate_batch(n: int, cfg: DetectorConfig, null_draw: Callable) -> ThresholdTable:
    """Upper-alpha null quantile of D_n (and KS moments) for length n."""
    ms = cfg.min_segment
    if n < 2 * ms:
        raise DataError(f"series length {n} is below 2*min_segment = {2 * ms}")
    rng = _rng_for("batch", n, cfg)
    b = cfg.mc_replicates
    thresholds = np.full(n + 1, np.nan)
    ks_mu = ks_sd = None
    if cfg.statistic == "mw":
        x = null_draw(rng, (b, n))
        d = _mw_z_matrix(x, ms).max(axis=1)
    else:
        # independent halves: one estimates the per-split null moments,
        # the other the distribution of the standardized maximum
        half = b // 2
        x = null_draw(rng, (b, n))
        scaled = _ks_scaled_matrix(x, ms)
        mu = scaled[:half].mean(axis=0)
        sd = scaled[:half].std(axis=0, ddof=1)
        sd = np.where(sd > 0, sd, 1.0)
        ks_mu = np.full((n + 1, n + 1), np.nan)
        ks_sd = np.full((n + 1, n + 1), np.nan)
        ks_mu[n, ms : n - ms + 1] = mu
        ks_sd[n, ms : n - ms + 1] = sd
        d = ((scaled[half:] - mu) / sd).max(axis=1)
    thresholds[n] = np.quantile(d, 1.0 - cfg.effective_alpha, method="higher")
    return ThresholdTable(
        kind="batch",
        statistic=cfg.statistic,
        alpha=cfg.effective_alpha,
        min_segment=ms,
        n_max=n,
        mc_replicates=cfg.mc_replicates,
        rng_seed=cfg.rng_seed,
        thresholds=thresholds,
        ks_mu=ks_mu,
        ks_sd=ks_sd,
    )


def _calibrate_sequential(n_max: int, cfg: DetectorConfig, null_draw: Callable) -> ThresholdTable:
    """Conditional thresholds h_t for growing windows up to n_max.

    Simulates mc_replicates null paths; at each window length t the
    threshold is the upper-alpha quantile of D_t among paths that have
    not yet flagged, after which exceeding paths are retired.  This
    realizes P(D_t > h_t | no earlier flag) = alpha.
    """
    ms = cfg.min_segment
    if n_max < 2 * ms:
        raise DataError(f"n_max {n_max} is below 2*min_segment = {2 * ms}")
    rng = _rng_for("sequential", n_max, cfg)
    b = cfg.mc_replicates
    alpha = cfg.effective_alpha
    x = null_draw(rng, (b, n_max))
    thresholds = np.full(n_max + 1, np.nan)
    ks_mu = ks_sd = None
    if cfg.statistic == "ks":
        ks_mu = np.full((n_max + 1, n_max + 1), np.nan)
        ks_sd = np.full((n_max + 1, n_max + 1), np.nan)

    alive = np.ones(b, dtype=bool)
    if cfg.statistic == "mw":
        # incremental midranks: appending x_t bumps the rank of every
        # larger earlier value by one (continuous null, ties negligible)
        ranks = np.zeros((b, n_max), dtype=np.float64)
        ranks[:, 0] = 1.0
    frozen = False
    last_h = np.nan
    for t in range(2, n_max + 1):
        if cfg.statistic == "mw":
            new = x[:, t - 1 : t]
            gt = x[:, : t - 1] > new
            ranks[:, : t - 1] += gt
            ranks[:, t - 1] = t - gt.sum(axis=1)
        if t < 2 * ms:
            continue
        if frozen:
            thresholds[t] = last_h
            continue
        if cfg.statistic == "mw":
            csum = np.cumsum(ranks[:, :t], axis=1)
            ks_idx = np.arange(ms, t - ms + 1, dtype=np.float64)
            u = csum[:, ms - 1 : t - ms] - ks_idx * (ks_idx + 1) / 2.0
            mu = ks_idx * (t - ks_idx) / 2.0
            sigma = np.sqrt(ks_idx * (t - ks_idx) * (t + 1) / 12.0)
            d = (np.abs(u - mu) / sigma).max(axis=1)
        else:
            scaled = _ks_scaled_matrix(x[:, :t], ms)
            mu = scaled.mean(axis=0)
            sd = scaled.std(axis=0, ddof=1)
            sd = np.where(sd > 0, sd, 1.0)
            ks_mu[t, ms : t - ms + 1] = mu
            ks_sd[t, ms : t - ms + 1] = sd
            d = ((scaled - mu) / sd).max(axis=1)
        pool = d[alive]
        h = float(np.quantile(pool, 1.0 - alpha, method="higher"))
        thresholds[t] = h
        alive &= ~(d > h)
        last_h = h
        if int(alive.sum()) < _SURVIVOR_FLOOR:
            frozen = True
    return ThresholdTable(
        kind="sequential",
        statistic=cfg.statistic,
        alpha=alpha,
        min_segment=ms,
        n_max=n_max,
        mc_replicates=cfg.mc_replicates,
        rng_seed=cfg.rng_seed,
        thresholds=thresholds,
        ks_mu=ks_mu,
        ks_sd=ks_sd,
    )


def null_thresholds(
    n_max: int,
    cfg: DetectorConfig,
    _null: Optional[Callable] = None,
) -> ThresholdTable:
    """Sequential threshold table h_t for window lengths t <= n_max.

    Cached on disk keyed by (statistic, alpha, min_segment, n_max,
    replicates, seed); the file is safe to delete.  ``_null`` overrides
    the null sampler (for calibration studies) and bypasses the cache.
    """
    return _get_table("sequential", int(n_max), cfg, _null)


def batch_threshold(n: int, cfg: DetectorConfig, _null: Optional[Callable] = None) -> float:
    """Phase-I threshold h_n: upper-alpha null quantile of D_n."""
    return _get_table("batch", int(n), cfg, _null).threshold_at(int(n))


def _window_stats(window: np.ndarray, cfg: DetectorConfig, table: ThresholdTable) -> np.ndarray:
    """Normalized statistics for every admissible split of ``window``."""
    t = window.size
    ms = cfg.min_segment
    if cfg.statistic == "mw":
        return mw_stats(window, ms)
    scaled = ks_stats(window, ms)
    mu = table.ks_mu[t, ms : t - ms + 1]
    sd = table.ks_sd[t, ms : t - ms + 1]
    if np.any(~np.isfinite(mu)):
        raise DataError(f"threshold table has no KS moments for window length {t}")
    return (scaled - mu) / sd


def batch_detect(x, cfg: DetectorConfig) -> Optional[BatchDetection]:
    """Phase-I single change-point scan.

    Returns the argmax split with its statistic and threshold when the
    maximal statistic exceeds the calibrated h_n, else None.  Argmax
    ties break toward the smallest split index.
    """
    s = as_series(x)
    n = len(s)
    ms = cfg.min_segment
    if n < 2 * ms:
        raise DataError(
            f"series {s.label!r} has {n} observations; need at least {2 * ms}"
        )
    table = _get_table("batch", n, cfg)
    z = _window_stats(s.values, cfg, table)
    k_hat = int(np.argmax(z))
    d_n = float(z[k_hat])
    h_n = table.threshold_at(n)
    if d_n > h_n:
        return BatchDetection(change_point=ms + k_hat, statistic=d_n, threshold=h_n)
    return None


def sequential_detect(x, cfg: DetectorConfig) -> DetectionResult:
    """Phase-II multi-change detection over a growing window.

    Each flagged change is reported at the argmax split of the window
    that triggered it (the index of the first post-change observation);
    monitoring then restarts from the observation after the flag.  A
    series shorter than 2*min_segment yields an empty result whose
    status says why.
    """
    s = as_series(x)
    n = len(s)
    ms = cfg.min_segment
    empty = np.empty(0)
    if n < 2 * ms:
        return DetectionResult(
            empty.astype(np.int64),
            empty,
            empty,
            status=f"series of length {n} is shorter than 2*min_segment = {2 * ms}; no tests run",
        )
    table = _get_table("sequential", n, cfg)
    start = 0
    cps: list[int] = []
    stats: list[float] = []
    ths: list[float] = []
    for t in range(n):
        length = t - start + 1
        if length < 2 * ms:
            continue
        window = s.values[start : t + 1]
        z = _window_stats(window, cfg, table)
        k_hat = int(np.argmax(z))
        d = float(z[k_hat])
        h = table.threshold_at(length)
        if d > h:
            cps.append(start + ms + k_hat)
            stats.append(d)
            ths.append(h)
            start = t + 1
    return DetectionResult(
        np.asarray(cps, dtype=np.int64),
        np.asarray(stats, dtype=np.float64),
        np.asarray(ths, dtype=np.float64),
    )
