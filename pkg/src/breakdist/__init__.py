"""Distances between change-point sets, with detection, audits and clustering."""

from .backend import backend_name
from .errors import BreakdistError, DataError, NumericalError, UsageError
from .metrics import (
    MetricSpec,
    hausdorff,
    mh1,
    mh2,
    mh2_multiset,
    mh3,
    mh3_multiset,
    min_set_dist,
    mj_p,
    mj_p_multiset,
    parse_metric,
    point_to_set,
    set_distance,
    wasserstein1,
)
from .sets import ChangePointSet

__version__ = "0.1.0"

__all__ = [
    "BreakdistError",
    "ChangePointSet",
    "DataError",
    "MetricSpec",
    "NumericalError",
    "UsageError",
    "__version__",
    "backend_name",
    "hausdorff",
    "mh1",
    "mh2",
    "mh2_multiset",
    "mh3",
    "mh3_multiset",
    "min_set_dist",
    "mj_p",
    "mj_p_multiset",
    "parse_metric",
    "point_to_set",
    "set_distance",
    "wasserstein1",
]
