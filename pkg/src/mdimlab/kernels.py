"""Kernel backend selection: compiled extension if built, numpy fallback otherwise."""

from __future__ import annotations

import os

if os.environ.get("MDIMLAB_FORCE_PY_KERNELS"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

greedy_bowen_separated = _impl.greedy_bowen_separated
greedy_spanning = _impl.greedy_spanning


def backend_name() -> str:
    """Either "cython" or "python"."""
    return _impl.BACKEND
