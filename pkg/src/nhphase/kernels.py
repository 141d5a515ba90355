"""Kernel selector: compiled extension when importable, NumPy fallback otherwise.

Set NHPHASE_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("NHPHASE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
roots4 = _impl.roots4
secular_real = _impl.secular_real
log_secular = _impl.log_secular
sancho_rubio = _impl.sancho_rubio

__all__ = ["BACKEND", "roots4", "secular_real", "log_secular", "sancho_rubio"]
