"""Hot kernels with a numba path and a pure-numpy fallback.

The active back end is chosen by ``AMOEBA_SCOPE_NUMBA`` (see ``_accel``).
Both back ends stay importable for benchmarks and equivalence tests.
"""
from .._accel import USE_NUMBA
from . import _numpy as numpy_backend

if USE_NUMBA:
    from . import _numba as numba_backend

    active = numba_backend
else:  # pragma: no cover - selected by environment
    numba_backend = None
    active = numpy_backend

BACKEND = "numba" if USE_NUMBA else "numpy"

roots_batch = active.roots_batch
fiber_grid = active.fiber_grid
fiber_events = active.fiber_events
membership_raster = active.membership_raster

__all__ = [
    "BACKEND",
    "active",
    "fiber_events",
    "fiber_grid",
    "membership_raster",
    "numba_backend",
    "numpy_backend",
    "roots_batch",
]
