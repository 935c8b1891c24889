"""njit entry points over the scalar kernels in ``_source``."""
import numpy as np

from .._accel import njit
from ._source import (
    STATUS_DEGENERATE,
    fiber_events as _fiber_events,
    fiber_sorted_grid,
    solve_poly,
)


@njit
def roots_batch(C, maxiter):
    K = C.shape[0]
    D = C.shape[1] - 1
    out = np.empty((K, D), dtype=np.complex128)
    status = np.empty(K, dtype=np.int64)
    for i in range(K):
        status[i] = solve_poly(C[i], out[i], maxiter)
    return out, status


@njit
def fiber_grid(exps, coeffs, free_axis, fixed_logs, thetas, shift, deg):
    n = fixed_logs.shape[0]
    S = np.empty((n, thetas.shape[0], deg), dtype=np.float64)
    status = np.empty(n, dtype=np.int64)
    for i in range(n):
        status[i] = fiber_sorted_grid(exps, coeffs, free_axis, fixed_logs[i], thetas, shift, deg, S[i])
    return S, status


@njit
def fiber_events(S, thetas, exps, coeffs, free_axis, fixed_log, target, shift, tol, refine, first_only):
    cap = 3 * S.shape[0] * S.shape[1] + 8
    ok = np.empty(cap, dtype=np.int64)
    om = np.empty(cap, dtype=np.int64)
    okind = np.empty(cap, dtype=np.int64)
    oth = np.empty(cap, dtype=np.float64)
    n = _fiber_events(S, thetas, exps, coeffs, free_axis, fixed_log, target, shift, tol,
                      refine, first_only, ok, om, okind, oth)
    return ok[:n].copy(), om[:n].copy(), okind[:n].copy(), oth[:n].copy()


@njit
def membership_raster(exps, coeffs, free_axis, fixed_logs, targets, thetas, shift, deg, tol):
    n1 = fixed_logs.shape[0]
    n2 = targets.shape[0]
    M = thetas.shape[0]
    out = np.zeros((n1, n2), dtype=np.bool_)
    S = np.empty((M, deg), dtype=np.float64)
    cap = 3 * M * deg + 8
    ok = np.empty(cap, dtype=np.int64)
    om = np.empty(cap, dtype=np.int64)
    okind = np.empty(cap, dtype=np.int64)
    oth = np.empty(cap, dtype=np.float64)
    for i in range(n1):
        st = fiber_sorted_grid(exps, coeffs, free_axis, fixed_logs[i], thetas, shift, deg, S)
        if st == STATUS_DEGENERATE:
            for j in range(n2):
                out[i, j] = True
            continue
        for j in range(n2):
            n = _fiber_events(S, thetas, exps, coeffs, free_axis, fixed_logs[i], targets[j],
                              shift, tol, True, True, ok, om, okind, oth)
            out[i, j] = n > 0
    return out
