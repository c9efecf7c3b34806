"""Backend selection for the particle/grid hot loops.

The compiled Cython extension is used when it is importable; otherwise the
numpy implementation in :mod:`gyroua._spline_py` takes over.  Setting the
environment variable ``GYROUA_PURE_PYTHON=1`` forces the fallback.
"""

import os

from gyroua import _spline_py

try:
    if os.environ.get("GYROUA_PURE_PYTHON"):
        raise ImportError("pure-python backend requested")
    from gyroua import _spline_ext as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _spline_py
    BACKEND = "python"

deposit = _impl.deposit
gather = _impl.gather
spline_weights = _spline_py.weights

__all__ = ["BACKEND", "deposit", "gather", "spline_weights"]
