"""Distance matrices over set collections, transitivity audits, eigenvalue reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, NumericalError
from .metrics import MetricSpec, set_distance
from .sets import PointsLike, as_points

# classification codes used in TransitivityReport.codes
BLUE, YELLOW, RED, UNUSED = 0, 1, 2, -1
_CLASS_NAMES = {BLUE: "blue", YELLOW: "yellow", RED: "red"}

# relative slack on the class boundaries so that exact triangle equalities
# (common for true metrics) are never pushed over by rounding
_BOUNDARY_RTOL = 1e-9


@dataclass
class DistanceMatrix:
    """Symmetric pairwise distances with zero diagonal."""

    values: np.ndarray
    labels: list[str]
    metric: Optional[MetricSpec] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DataError("distance matrix must be square")
        if v.shape[0] < 1:
            raise DataError("distance matrix must be non-empty")
        if not np.all(np.isfinite(v)):
            raise DataError("distance matrix contains non-finite entries")
        if np.any(v < 0):
            raise DataError("distance matrix contains negative entries")
        if np.max(np.abs(v - v.T), initial=0.0) > 1e-9:
            raise DataError("distance matrix is not symmetric")
        if np.any(np.diag(v) != 0):
            raise DataError("distance matrix diagonal must be zero")
        if len(self.labels) != v.shape[0]:
            raise DataError("label count does not match matrix size")
        self.values = v

    @property
    def n(self) -> int:
        return self.values.shape[0]


def build_distance_matrix(
    sets: Sequence[PointsLike],
    metric: MetricSpec,
    labels: Optional[Sequence[str]] = None,
) -> DistanceMatrix:
    """Pairwise distances between all sets under one metric.

    Entries are computed for i < j and mirrored; the diagonal is zero by
    construction.
    """
    n = len(sets)
    if n < 2:
        raise DataError("need at least 2 change-point sets")
    if labels is None:
        labels = [getattr(s, "label", "") or f"s{i + 1}" for i, s in enumerate(sets)]
    labels = [str(x) for x in labels]
    pts = []
    for lab, s in zip(labels, sets):
        try:
            pts.append(as_points(s))
        except DataError as exc:
            raise DataError(f"series {lab!r}: {exc}") from exc
    d = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = set_distance(pts[i], pts[j], metric)
    return DistanceMatrix(d, labels, metric)


@dataclass
class TransitivityReport:
    """Triangle-inequality audit over all ordered triples of distinct indices.

    codes holds one entry per (i,j,k): 0 blue (ratio <= 1), 1 yellow
    (1 < ratio <= 2), 2 red (ratio > 2), -1 for triples with repeated
    indices.  fail means yellow or red.
    """

    n: int
    codes: np.ndarray = field(repr=False)
    blue: int = 0
    yellow: int = 0
    red: int = 0
    fail_fraction: float = 0.0
    mean_fail_ratio: Optional[float] = None
    max_fail_ratio: Optional[float] = None

    @property
    def n_triples(self) -> int:
        return self.n * (self.n - 1) * (self.n - 2)

    def classification(self, i: int, j: int, k: int) -> str:
        code = int(self.codes[i, j, k])
        if code == UNUSED:
            raise DataError("indices must be distinct")
        return _CLASS_NAMES[code]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "triples": self.n_triples,
            "counts": {"blue": self.blue, "yellow": self.yellow, "red": self.red},
            "fail_fraction": self.fail_fraction,
            "mean_fail_ratio": self.mean_fail_ratio,
            "max_fail_ratio": self.max_fail_ratio,
        }


def triple_ratio(D: DistanceMatrix, i: int, j: int, k: int) -> float:
    """The scalar D_ik / (D_ij + D_jk) for one ordered triple."""
    if len({i, j, k}) != 3:
        raise DataError("indices must be distinct")
    v = D.values
    num = v[i, k]
    den = v[i, j] + v[j, k]
    if den == 0.0:
        if num > 0.0:
            raise DataError(
                "zero denominator with positive numerator violates the "
                "semi-metric axioms (inconsistent matrix)"
            )
        return 0.0
    return float(num / den)


def transitivity_audit(D: DistanceMatrix) -> TransitivityReport:
    """Classify every ordered triple (i,j,k) by its triangle ratio.

    Blue means the triangle inequality holds, yellow a violation by a
    factor of at most two, red anything worse.  Triples with zero
    denominator require a zero numerator and count as blue.
    """
    n = D.n
    if n < 3:
        raise DataError("transitivity audit needs at least 3 series")
    v = D.values
    idx = np.arange(n)
    distinct = (
        (idx[:, None, None] != idx[None, :, None])
        & (idx[None, :, None] != idx[None, None, :])
        & (idx[:, None, None] != idx[None, None, :])
    )
    num = np.broadcast_to(v[:, None, :], (n, n, n))
    den = v[:, :, None] + v[None, :, :]
    zero_den = distinct & (den == 0.0)
    if np.any(zero_den & (num > 0.0)):
        raise DataError(
            "zero denominator with positive numerator violates the "
            "semi-metric axioms (inconsistent matrix)"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    codes = np.full((n, n, n), UNUSED, dtype=np.int8)
    blue_cut = 1.0 + _BOUNDARY_RTOL
    yellow_cut = 2.0 * (1.0 + _BOUNDARY_RTOL)
    codes[distinct & (ratio <= blue_cut)] = BLUE
    codes[distinct & (ratio > blue_cut) & (ratio <= yellow_cut)] = YELLOW
    codes[distinct & (ratio > yellow_cut)] = RED
    n_blue = int(np.count_nonzero(codes == BLUE))
    n_yellow = int(np.count_nonzero(codes == YELLOW))
    n_red = int(np.count_nonzero(codes == RED))
    failing = distinct & (codes > BLUE)
    n_fail = n_yellow + n_red
    total = n * (n - 1) * (n - 2)
    report = TransitivityReport(
        n=n,
        codes=codes,
        blue=n_blue,
        yellow=n_yellow,
        red=n_red,
        fail_fraction=n_fail / total,
    )
    if n_fail:
        fr = ratio[failing]
        report.mean_fail_ratio = float(fr.mean())
        report.max_fail_ratio = float(fr.max())
    return report


@dataclass
class EigenReport:
    """Eigenvalue summary of a distance matrix.

    majority_cluster_size applies the rule: if k eigenvalues are below
    epsilon in absolute value, then k+1 of the series are similar.
    """

    eigenvalues: np.ndarray
    abs_eigenvalues: np.ndarray
    operator_norm: float
    epsilon: float
    majority_cluster_size: int

    def to_json_dict(self) -> dict:
        return {
            "abs_eigenvalues": self.abs_eigenvalues.tolist(),
            "operator_norm": self.operator_norm,
            "epsilon": self.epsilon,
            "majority_cluster_size": self.majority_cluster_size,
        }


def eigen_report(D: DistanceMatrix, epsilon: Optional[float] = None) -> EigenReport:
    """Sorted absolute eigenvalues, operator norm and majority-cluster size.

    epsilon defaults to 0.05 * operator_norm.  The zero-trace structure is
    checked: eigenvalues must sum to zero within 1e-6 * operator_norm.
    """
    v = D.values
    try:
        w = np.linalg.eigvalsh(v)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - near impossible for finite input
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    absw = np.sort(np.abs(w))
    op_norm = float(absw[-1])
    if abs(float(np.sum(w))) > 1e-6 * max(op_norm, 1e-300):
        raise NumericalError("eigenvalue sum deviates from zero trace")
    if epsilon is None:
        epsilon = 0.05 * op_norm
    if epsilon < 0:
        raise DataError("epsilon must be non-negative")
    if op_norm == 0.0:
        # all sets identical: every series belongs to the majority cluster
        majority = D.n
    else:
        k = int(np.count_nonzero(absw < epsilon))
        majority = min(k + 1, D.n)
    return EigenReport(
        eigenvalues=w,
        abs_eigenvalues=absw,
        operator_norm=op_norm,
        epsilon=float(epsilon),
        majority_cluster_size=majority,
    )
