"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback is used. Setting ``PARABOLIC_SCREEN_PURE=1`` forces the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("PARABOLIC_SCREEN_PURE"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

convolution_recursion = _impl.convolution_recursion
polylog_series = _impl.polylog_series

__all__ = ["BACKEND", "convolution_recursion", "polylog_series"]
