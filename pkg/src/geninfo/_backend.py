"""Kernel backend chosen at import time.

The compiled Cython extension is used when it imports; otherwise, or when
``GENINFO_PURE_PYTHON=1`` is set, the numpy fallback is used.
"""
import os

from . import _fallback

if os.environ.get("GENINFO_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _fallback

blahut = _impl.blahut
grid_min_rate = _impl.grid_min_rate
