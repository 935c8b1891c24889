"""Vectorised numpy back end.

Grid phases (coefficients, roots, sorted log-moduli, band tests) run as array
operations; the sub-grid refinement falls back to the interpreted scalar
kernels, which only fire near the radial band.
"""
import math

import numpy as np

from ._source import (
    DEGREE_DROP_RTOL,
    EXTREMUM_FACTOR,
    STATUS_DEGENERATE,
    fiber_events as _fiber_events,
)


def _quadratic(a, b, c):
    disc = np.sqrt(b * b - 4.0 * a * c)
    flip = (b.real * disc.real + b.imag * disc.imag) < 0.0
    disc = np.where(flip, -disc, disc)
    q = -0.5 * (b + disc)
    safe = q != 0
    qs = np.where(safe, q, 1.0)
    r1 = np.where(safe, qs / a, 0.0)
    r2 = np.where(safe, c / qs, 0.0)
    return np.stack([r1, r2], axis=-1)


def roots_batch(C, maxiter=200):
    """Roots of each row of ``C`` (ascending coefficients), ``inf`` for dropped degree."""
    C = np.asarray(C, dtype=np.complex128)
    K, D1 = C.shape
    D = D1 - 1
    out = np.full((K, D), complex(np.inf, 0.0), dtype=np.complex128)
    status = np.zeros(K, dtype=np.int64)
    absC = np.abs(C)
    scale = absC.max(axis=1)
    live = absC > DEGREE_DROP_RTOL * scale[:, None]
    live[:, 0] = True
    deg = D1 - 1 - np.argmax(live[:, ::-1], axis=1)
    deg[scale == 0.0] = -1
    status[deg < 0] = STATUS_DEGENERATE
    with np.errstate(divide="ignore", invalid="ignore"):
        for d in np.unique(deg):
            if d <= 0:
                continue
            rows = np.nonzero(deg == d)[0]
            sub = C[rows, : d + 1]
            if d == 1:
                r = (-sub[:, 0] / sub[:, 1])[:, None]
            elif d == 2:
                r = _quadratic(sub[:, 2], sub[:, 1], sub[:, 0])
            else:
                a = sub[:, :d] / sub[:, d : d + 1]
                comp = np.zeros((rows.size, d, d), dtype=np.complex128)
                comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
                comp[:, :, d - 1] = -a
                r = np.linalg.eigvals(comp)
            out[rows, :d] = r
    return out, status


def _fiber_coeff_tensor(exps, coeffs, free_axis, fixed_logs, thetas, shift, deg):
    fixed = 1 - free_axis
    zf = fixed_logs[:, None] + 1j * thetas[None, :]
    C = np.zeros((fixed_logs.size, thetas.size, deg + 1), dtype=np.complex128)
    for t in range(coeffs.size):
        C[:, :, exps[t, free_axis] + shift] += coeffs[t] * np.exp(exps[t, fixed] * zf)
    return C


def _sorted_logmod(R):
    with np.errstate(divide="ignore"):
        L = np.where(np.isinf(R.real) | np.isinf(R.imag), np.inf, np.log(np.abs(R)))
    return np.sort(L, axis=-1)


def fiber_grid(exps, coeffs, free_axis, fixed_logs, thetas, shift, deg):
    fixed_logs = np.asarray(fixed_logs, dtype=np.float64)
    C = _fiber_coeff_tensor(exps, coeffs, free_axis, fixed_logs, thetas, shift, deg)
    n, M = C.shape[:2]
    R, st = roots_batch(C.reshape(n * M, deg + 1))
    S = _sorted_logmod(R.reshape(n, M, deg))
    st = st.reshape(n, M)
    status = np.where((st == STATUS_DEGENERATE).any(axis=1), STATUS_DEGENERATE,
                      np.where((st < 0).any(axis=1), st.min(axis=1), 0))
    return S, status.astype(np.int64)


def fiber_events(S, thetas, exps, coeffs, free_axis, fixed_log, target, shift, tol, refine, first_only):
    cap = 3 * S.shape[0] * S.shape[1] + 8
    ok = np.empty(cap, dtype=np.int64)
    om = np.empty(cap, dtype=np.int64)
    okind = np.empty(cap, dtype=np.int64)
    oth = np.empty(cap, dtype=np.float64)
    n = _fiber_events(S, thetas, exps, coeffs, free_axis, fixed_log, target, shift, tol,
                      refine, first_only, ok, om, okind, oth)
    return ok[:n].copy(), om[:n].copy(), okind[:n].copy(), oth[:n].copy()


def _undecided_candidates(G, lo, hi):
    """Cells whose grid values admit a sub-grid excursion into the band."""
    Gp = np.roll(G, 1, axis=1)
    Gn = np.roll(G, -1, axis=1)
    fin = np.isfinite(G)
    with np.errstate(invalid="ignore"):
        above = fin & (G > hi) & (G <= Gp) & (G <= Gn)
        above &= G <= EXTREMUM_FACTOR * np.maximum(Gp - G, Gn - G)
        below = fin & (G < lo) & (G >= Gp) & (G >= Gn)
        below &= -G <= EXTREMUM_FACTOR * np.maximum(G - Gp, G - Gn)
    return (above | below).any(axis=(1, 2))


def membership_raster(exps, coeffs, free_axis, fixed_logs, targets, thetas, shift, deg, tol):
    fixed_logs = np.asarray(fixed_logs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    lo = math.log1p(-tol)
    hi = math.log1p(tol)
    out = np.zeros((fixed_logs.size, targets.size), dtype=bool)
    S_all, status = fiber_grid(exps, coeffs, free_axis, fixed_logs, thetas, shift, deg)
    for i in range(fixed_logs.size):
        if status[i] == STATUS_DEGENERATE:
            out[i, :] = True
            continue
        S = S_all[i]
        G = S[None, :, :] - targets[:, None, None]
        with np.errstate(invalid="ignore"):
            hit = ((G >= lo) & (G <= hi)).any(axis=(1, 2))
            Gn = np.roll(G, -1, axis=1)
            cross = (((G > hi) & (Gn < lo)) | ((G < lo) & (Gn > hi))).any(axis=(1, 2))
        decided = hit | cross
        out[i, decided] = True
        todo = np.nonzero(~decided & _undecided_candidates(G, lo, hi))[0]
        for j in todo:
            k, _, _, _ = fiber_events(S, thetas, exps, coeffs, free_axis, fixed_logs[i],
                                      targets[j], shift, tol, True, True)
            out[i, j] = k.size > 0
    return out
