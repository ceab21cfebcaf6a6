"""Kernel backend selection.

The compiled extension is used when it imports cleanly; setting
``QL1SIM_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("QL1SIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

lj_verlet = _impl.lj_verlet


def ordered_product(us) -> np.ndarray:
    """Time-ordered product ``us[n-1] @ ... @ us[0]``."""
    return _impl.ordered_product(np.ascontiguousarray(us, dtype=np.complex128))


def dyson_accumulate(hs, order: int, h: float, collisions: bool) -> np.ndarray:
    """Sum of truncated ordered-product expansion terms, orders 0..order."""
    hs = np.ascontiguousarray(hs, dtype=np.complex128)
    return _impl.dyson_accumulate(hs, int(order), float(h), bool(collisions))

__all__ = ["BACKEND", "lj_verlet", "ordered_product", "dyson_accumulate"]
