"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``PARTSEL_PURE_PYTHON=1``
to force the numpy/Python fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PARTSEL_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
hdrf_assign = _impl.hdrf_assign
oblivious_assign = _impl.oblivious_assign
ginger_assign = _impl.ginger_assign
grow_tree = _impl.grow_tree


def available_backends() -> dict:
    """Map of backend name to module, for benchmarks and equivalence tests."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
