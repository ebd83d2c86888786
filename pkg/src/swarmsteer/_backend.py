"""Pick the kernel implementation at import time.

The compiled ``_ckernels`` module is used when it was built; set
``SWARMSTEER_PURE_PYTHON=1`` to force the pure-Python fallback.
"""
import os

if os.environ.get("SWARMSTEER_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
