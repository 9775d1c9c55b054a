"""Select the compiled lattice kernels when built, else the numpy ones.

Set ``SURFREV_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

_impl = _kernels_py
if os.environ.get("SURFREV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
cheb01 = _impl.cheb01
norm_at = _impl.norm_at
column_counts = _impl.column_counts
fill_norms = _impl.fill_norms

__all__ = ["BACKEND", "cheb01", "norm_at", "column_counts", "fill_norms", "python_impl"]

python_impl = _kernels_py
