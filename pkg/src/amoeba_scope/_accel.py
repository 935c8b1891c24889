"""Numba switch.

Set ``AMOEBA_SCOPE_NUMBA=0`` to force the pure-numpy fallback kernels even
when numba is importable. The flag is read once, at import time.
"""
from __future__ import annotations

import os

ENV_FLAG = "AMOEBA_SCOPE_NUMBA"

try:
    import numba as _numba
    from numba.extending import register_jitable as _register_jitable

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None
    HAVE_NUMBA = False


def _flag_enabled() -> bool:
    value = os.environ.get(ENV_FLAG, "1").strip().lower()
    return value not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _flag_enabled()


def jitable(func):
    """Mark a scalar helper as callable both from Python and from njit code."""
    if HAVE_NUMBA:
        return _register_jitable(func)
    return func


def njit(func):
    if not HAVE_NUMBA:  # pragma: no cover
        return func
    return _numba.njit(cache=True, nogil=True)(func)


__all__ = ["ENV_FLAG", "HAVE_NUMBA", "USE_NUMBA", "jitable", "njit"]
