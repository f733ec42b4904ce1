"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
kernels are used. Set ``NRM_LAB_BACKEND=python`` to force the fallback.
"""
import os

from . import _pykernels

_forced = os.environ.get("NRM_LAB_BACKEND", "").strip().lower()

if _forced == "python":
    kernels = _pykernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        if _forced == "cython":
            raise
        kernels = _pykernels

BACKEND = kernels.BACKEND
python_kernels = _pykernels


def compiled_kernels():
    """The compiled module, or None when it is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
