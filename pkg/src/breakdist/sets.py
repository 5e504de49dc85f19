"""Change-point set container and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import DataError

PointsLike = Union["ChangePointSet", Iterable[int], np.ndarray]


@dataclass(frozen=True, eq=False)
class ChangePointSet:
    """A finite, non-empty, strictly increasing set of non-negative indices.

    Indices mark positions in an observed series where a regime change
    occurs.  The container validates on construction so downstream code can
    assume sortedness and uniqueness.
    """

    points: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim != 1 or pts.size == 0:
            raise DataError("change-point set must be a non-empty 1-d sequence")
        if not np.issubdtype(pts.dtype, np.integer):
            if not np.all(np.equal(np.mod(pts, 1), 0)):
                raise DataError("change-point indices must be integers")
        pts = pts.astype(np.int64, copy=True)
        if np.any(pts < 0):
            raise DataError("change-point indices must be non-negative")
        if pts.size > 1 and np.any(np.diff(pts) <= 0):
            raise DataError("change-point indices must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_iterable(cls, values: Iterable[int], label: str = "") -> "ChangePointSet":
        """Build a set from unsorted, possibly repeated values."""
        arr = np.unique(np.asarray(list(values), dtype=np.int64))
        return cls(arr, label=label)

    def __len__(self) -> int:
        return int(self.points.size)

    def __iter__(self):
        return iter(self.points.tolist())

    def __contains__(self, x) -> bool:
        i = np.searchsorted(self.points, x)
        return bool(i < self.points.size and self.points[i] == x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChangePointSet):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(
            np.all(self.points == other.points)
        )

    def __hash__(self):
        return hash(self.points.tobytes())

    def __repr__(self):
        body = ",".join(str(p) for p in self.points[:8])
        if len(self) > 8:
            body += ",..."
        return f"ChangePointSet([{body}], n={len(self)})"


def as_points(obj: PointsLike) -> np.ndarray:
    """Coerce a ChangePointSet or sorted sequence to a float64 array.

    Raw sequences are accepted so that normalized (fractional) indices and
    multisets with repeats can flow through the distance kernels; they must
    already be sorted in non-decreasing order.
    """
    if isinstance(obj, ChangePointSet):
        return obj.points.astype(np.float64)
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DataError("point sequence must be non-empty and 1-d")
    if not np.all(np.isfinite(arr)):
        raise DataError("point sequence contains non-finite values")
    if arr.size > 1 and np.any(np.diff(arr) < 0):
        raise DataError("point sequence must be sorted in non-decreasing order")
    return arr
