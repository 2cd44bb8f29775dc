"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise, or
when ``WEAKSING_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the pure-Python ``_pykernels`` module is used.
"""
import os

from . import _pykernels

_force_py = os.environ.get("WEAKSING_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
