"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``FODS_IDENT_PURE_PYTHON`` is set to a non-empty value, the numpy fallback is
loaded instead. ``BACKEND`` names the active choice.
"""
import os

from . import _pykernels

if os.environ.get("FODS_IDENT_PURE_PYTHON"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"
    else:
        BACKEND = "cython"


def get_kernels(name=None):
    """Return the kernel module for ``name`` ("cython", "python") or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
