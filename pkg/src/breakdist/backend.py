"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the NumPy
fallback is used.  Setting the environment variable ``BREAKDIST_PURE=1``
forces the fallback, which is mainly useful for parity testing and
benchmarking.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("BREAKDIST_PURE", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

nearest_dists = _impl.nearest_dists
midranks = _impl.midranks
mw_stats = _impl.mw_stats
ks_stats = _impl.ks_stats
wasserstein_cdf = _impl.wasserstein_cdf


def backend_name() -> str:
    """Name of the active kernel backend: "compiled" or "python"."""
    return _impl.NAME
