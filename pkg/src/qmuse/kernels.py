"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy/pure-Python
fallback is used. Setting ``QMUSE_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("QMUSE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"

MASK64 = _kernels_py.MASK64
splitmix64 = _impl.splitmix64
shot_uniform = _impl.shot_uniform
sample_counts = _impl.sample_counts
apply_single_qubit = _impl.apply_single_qubit

# Sequential generator state handling is not a hot path; always pure Python.
xoshiro_seed = _kernels_py.xoshiro_seed
xoshiro_next = _kernels_py.xoshiro_next
