"""Kernel backend chosen at import time.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``FUNCINEQ_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the NumPy fallback is used.
"""
import os

from . import _kernels_py

_force_py = os.environ.get("FUNCINEQ_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

implicit_diffusion_steps = _impl.implicit_diffusion_steps
min_assignment_cost = _impl.min_assignment_cost

__all__ = ["BACKEND", "implicit_diffusion_steps", "min_assignment_cost"]
