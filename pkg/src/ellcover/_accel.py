"""Backend switch for the compiled kernels.

Setting ``ELLCOVER_DISABLE_NUMBA=1`` before import runs every kernel through
its pure-Python / numpy path instead of numba.
"""
from __future__ import annotations

import os

DISABLED = os.environ.get("ELLCOVER_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if DISABLED:
        raise ImportError("numba disabled by ELLCOVER_DISABLE_NUMBA")
    import numba

    NUMBA_OK = True
except ImportError:
    numba = None
    NUMBA_OK = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if NUMBA_OK:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    return lambda f: f


def backend_name() -> str:
    return f"numba-{numba.__version__}" if NUMBA_OK else "numpy"


__all__ = ["njit", "NUMBA_OK", "DISABLED", "backend_name"]
