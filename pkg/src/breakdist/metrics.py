"""Distances between change-point sets.

All functions accept :class:`~breakdist.sets.ChangePointSet` instances or
already sorted numeric sequences.  Distances are computed on the line with
the absolute difference as ground distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import backend
from .errors import DataError
from .sets import PointsLike, as_points

METRIC_KINDS = ("hausdorff", "mh1", "mh2", "mh3", "wasserstein", "mj")


def _pair(a: PointsLike, b: PointsLike):
    return as_points(a), as_points(b)


def point_to_set(x: float, target: PointsLike) -> float:
    """Distance from a single point to the nearest element of a set."""
    pts = as_points(target)
    i = int(np.searchsorted(pts, x))
    best = math.inf
    if i > 0:
        best = abs(x - pts[i - 1])
    if i < pts.size:
        best = min(best, abs(pts[i] - x))
    return float(best)


def min_set_dist(a: PointsLike, b: PointsLike) -> float:
    """Smallest ground distance between any pair of elements."""
    pa, pb = _pair(a, b)
    return float(backend.nearest_dists(pa, pb).min())


def _directional(pa: np.ndarray, pb: np.ndarray):
    """Nearest-neighbour distances in both directions: (a to b, b to a)."""
    return backend.nearest_dists(pa, pb), backend.nearest_dists(pb, pa)


def hausdorff(a: PointsLike, b: PointsLike) -> float:
    """Hausdorff distance: the worst-case nearest-neighbour distance."""
    d_ab, d_ba = _directional(*_pair(a, b))
    return float(max(d_ab.max(), d_ba.max()))


def mh1(a: PointsLike, b: PointsLike) -> float:
    """Modified Hausdorff: maximum of the two directional mean distances."""
    d_ab, d_ba = _directional(*_pair(a, b))
    return float(max(d_ab.mean(), d_ba.mean()))


def mh2(a: PointsLike, b: PointsLike) -> float:
    """Sum of both directional nearest-neighbour distance sums."""
    d_ab, d_ba = _directional(*_pair(a, b))
    return float(d_ab.sum() + d_ba.sum())


def mh3(a: PointsLike, b: PointsLike) -> float:
    """Cardinality-normalized variant of :func:`mh2`."""
    pa, pb = _pair(a, b)
    d_ab, d_ba = _directional(pa, pb)
    return float((d_ab.sum() + d_ba.sum()) / (pa.size + pb.size))


def _mj_from_dists(d_ab: np.ndarray, d_ba: np.ndarray, p: float) -> float:
    if p <= 0:
        raise DataError("not a semi-metric for p <= 0")
    if math.isinf(p):
        return float(max(d_ab.max(), d_ba.max()))
    m = float(max(d_ab.max(), d_ba.max()))
    if m == 0.0:
        return 0.0
    # factor out the largest distance so that large p cannot overflow
    sa = np.sum((d_ab / m) ** p) / (2.0 * d_ab.size)
    sb = np.sum((d_ba / m) ** p) / (2.0 * d_ba.size)
    return float(m * (sa + sb) ** (1.0 / p))


def mj_p(a: PointsLike, b: PointsLike, p: float) -> float:
    """MJ_p distance: a power mean of the directional distance averages.

    For p = 1 this is half the sum of the two directional means; as p
    grows it approaches the Hausdorff distance, which is the exact value
    at p = +inf.  Only p > 0 yields a semi-metric.
    """
    pa, pb = _pair(a, b)
    return _mj_from_dists(*_directional(pa, pb), p)


def mj_p_multiset(a: PointsLike, b: PointsLike, p: float) -> float:
    """MJ_p evaluated with multiset cardinalities (repeats allowed)."""
    pa, pb = _pair(a, b)
    return _mj_from_dists(*_directional(pa, pb), p)


def mh2_multiset(a: PointsLike, b: PointsLike) -> float:
    """mh2 evaluated with multiset cardinalities (repeats allowed)."""
    return mh2(a, b)


def mh3_multiset(a: PointsLike, b: PointsLike) -> float:
    """mh3 evaluated with multiset cardinalities (repeats allowed)."""
    return mh3(a, b)


def wasserstein1(a: PointsLike, b: PointsLike) -> float:
    """First Wasserstein distance between the empirical measures.

    Each set carries uniform mass over its elements; on the line the
    optimal transport cost equals the integral of the absolute CDF
    difference, which is evaluated in closed form.
    """
    pa, pb = _pair(a, b)
    return float(backend.wasserstein_cdf(pa, pb))


@dataclass(frozen=True)
class MetricSpec:
    """Identifies one member of the distance family.

    kind is one of "hausdorff", "mh1", "mh2", "mh3", "wasserstein", "mj";
    the exponent p applies to "mj" only (p > 0 or math.inf).
    """

    kind: str
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise DataError(f"unknown metric kind {self.kind!r}")
        if self.kind == "mj":
            if self.p is None:
                raise DataError("metric kind 'mj' requires an exponent p")
            if not math.isinf(self.p) and self.p <= 0:
                raise DataError("not a semi-metric for p <= 0")
        elif self.p is not None:
            raise DataError(f"metric kind {self.kind!r} takes no exponent")

    @property
    def label(self) -> str:
        """Short name used in file names and reports, e.g. "mj1" or "mh2"."""
        if self.kind != "mj":
            return self.kind
        return "mjinf" if math.isinf(self.p) else f"mj{self.p:g}"

    def evaluate(self, a: PointsLike, b: PointsLike) -> float:
        return set_distance(a, b, self)


def set_distance(a: PointsLike, b: PointsLike, spec: MetricSpec) -> float:
    """Evaluate the distance selected by spec on a pair of sets."""
    if spec.kind == "hausdorff":
        return hausdorff(a, b)
    if spec.kind == "mh1":
        return mh1(a, b)
    if spec.kind == "mh2":
        return mh2(a, b)
    if spec.kind == "mh3":
        return mh3(a, b)
    if spec.kind == "wasserstein":
        return wasserstein1(a, b)
    return mj_p(a, b, spec.p)


def parse_metric(name: str, p: Optional[float] = None) -> MetricSpec:
    """Build a MetricSpec from CLI-style arguments.

    Accepts either an explicit p for kind "mj", or compact labels such as
    "mj1", "mj0.5" and "mjinf".
    """
    name = name.strip().lower()
    if name in METRIC_KINDS:
        return MetricSpec(name, p)
    if name.startswith("mj"):
        tail = name[2:]
        try:
            return MetricSpec("mj", math.inf if tail == "inf" else float(tail))
        except ValueError:
            pass
    raise DataError(f"unknown metric {name!r}")
