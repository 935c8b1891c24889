"""Torus fibers of plane curves, contour sampling and regularity of critical values.

A fiber ``Log^{-1}(x) ∩ V`` of a plane curve is found by sweeping the angle of
one coordinate over an ``M``-point grid, solving for the other coordinate and
keeping roots whose modulus lies in the radial band around ``exp(x)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from . import kernels
from .algebra import (
    LaurentPolynomial,
    RationalCurve,
    eval_poly_many,
    partial_derivative,
    term_scale,
)
from .errors import DegenerateRestriction, NonConvergence, ValidationError
from .kernels import _source
from .kernels._numpy import _fiber_coeff_tensor
from .logmaps import (
    RANK_RATIO,
    TOL_F,
    TOL_GAMMA,
    arg_map,
    as_log_point,
    curve_log_rank_many,
    is_log_critical,
    log_derivative_terms,
    log_map,
    phase_defect,
)

DEFAULT_TOL_RADIAL = 1e-6
DEFAULT_ANGLES = 720
TOL_REG = 1e-6
STEP_H = 1e-5
COVERAGE = 0.9

KIND_NAMES = {_source.KIND_GRID: "grid", _source.KIND_CROSSING: "crossing", _source.KIND_TOUCH: "touch"}


class FiberDimension(str, Enum):
    EMPTY = "empty"
    FINITE = "finite"
    POSITIVE = "positive_dimensional"


def angle_grid(M: int) -> np.ndarray:
    """``M`` equally spaced angles on (-pi, pi], the last one exactly pi."""
    return -np.pi + 2.0 * np.pi * np.arange(1, M + 1) / M


# ---------------------------------------------------------------------------
# plane-curve plumbing


@dataclass(frozen=True)
class PlaneSetup:
    """Kernel-ready arrays of a plane curve with a chosen free coordinate."""

    exps: np.ndarray
    coeffs: np.ndarray
    free_axis: int
    shift: int
    deg: int

    @property
    def fixed_axis(self) -> int:
        return 1 - self.free_axis


def plane_setup(f: LaurentPolynomial, free_axis: int | None = None) -> PlaneSetup:
    if f.ambient_dim != 2:
        raise ValidationError("fiber computations need a plane curve (ambient dimension 2)")
    if free_axis is None:
        free_axis = 1 if np.ptp(f.exps[:, 1]) > 0 else 0
    e = f.exps[:, free_axis]
    lo, hi = int(e.min()), int(e.max())
    if hi == lo:
        raise ValidationError(f"polynomial does not involve coordinate {free_axis + 1}")
    return PlaneSetup(np.ascontiguousarray(f.exps, dtype=np.int64),
                      np.ascontiguousarray(f.coeffs, dtype=np.complex128),
                      free_axis, -lo, hi - lo)


def _assemble(setup: PlaneSetup, fixed_log: float, theta, free_vals) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    free_vals = np.asarray(free_vals, dtype=np.complex128)
    out = np.empty(np.broadcast(theta, free_vals).shape + (2,), dtype=np.complex128)
    out[..., setup.fixed_axis] = np.exp(fixed_log + 1j * theta)
    out[..., setup.free_axis] = free_vals
    return out


def _roots_at(setup: PlaneSetup, fixed_log: float, thetas) -> np.ndarray:
    """Free-coordinate roots (inf for degree drops) at each angle, shape ``(len(thetas), deg)``."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
    C = _fiber_coeff_tensor(setup.exps, setup.coeffs, setup.free_axis, np.array([fixed_log]),
                            thetas, setup.shift, setup.deg)[0]
    R, status = kernels.roots_batch(C, 200)
    if np.any(status == _source.STATUS_NONCONVERGED):
        raise NonConvergence("fiber root iteration failed")
    return R


def _branch_root(setup: PlaneSetup, fixed_log: float, theta: float, m: int) -> complex:
    """The root with the m-th smallest modulus at one angle."""
    R = _roots_at(setup, fixed_log, theta)[0]
    with np.errstate(divide="ignore"):
        L = np.where(np.isfinite(R), np.log(np.abs(R)), np.inf)
    return complex(R[np.argsort(L, kind="stable")[m]])


def _relative_residual(f: LaurentPolynomial, P: np.ndarray) -> np.ndarray:
    return np.abs(eval_poly_many(f, P)) / term_scale(f, P)


# ---------------------------------------------------------------------------
# fiber scan


@dataclass(frozen=True)
class FiberHit:
    angle_index: int
    point: np.ndarray
    residual: float
    radial_error: float
    kind: str
    cluster: int = -1


@dataclass(frozen=True)
class FiberScanResult:
    f: LaurentPolynomial
    x: np.ndarray
    angle_count: int
    tol_radial: float
    hits: tuple
    clusters: np.ndarray  # (K, 2) representative torus points
    dimension_estimate: FiberDimension
    hit_angle_fraction: float
    arg_sweep: tuple

    @property
    def is_empty(self) -> bool:
        return self.dimension_estimate is FiberDimension.EMPTY


def _circular_sweep(angles: np.ndarray) -> float:
    """Fraction of the circle covered: one minus the largest gap between sorted angles."""
    if angles.size == 0:
        return 0.0
    a = np.sort(np.mod(angles, 2 * np.pi))
    gaps = np.diff(np.concatenate([a, [a[0] + 2 * np.pi]]))
    return float(1.0 - gaps.max() / (2 * np.pi))


def _torus_clusters(args: np.ndarray, radius: float) -> np.ndarray:
    """Single-linkage labels under the wrapped max-metric on angle vectors."""
    d = np.abs(args[:, None, :] - args[None, :, :])
    d = np.minimum(d, 2 * np.pi - d).max(axis=-1)
    _, labels = connected_components(d <= radius, directed=False)
    return labels


def _gap(setup, fixed_log, target, m, theta, bufs) -> float:
    return _source.branch_gap(setup.exps, setup.coeffs, setup.free_axis, fixed_log, theta,
                              setup.shift, m, target, *bufs)


def _branch_defect(f, setup, fixed_log, m, theta) -> float:
    w = _branch_root(setup, fixed_log, theta, m)
    if not np.isfinite(w):
        return np.nan
    p = _assemble(setup, fixed_log, theta, w)
    return float(phase_defect(log_derivative_terms(f, p)))


def _refine_cluster(f, setup, x, members, thetas, tol, bufs):
    """Best representative angle and branch for one cluster of a finite fiber.

    A tangential touch of the radial band is pinned to the exact critical point
    (where the phase defect of the Gauss map, proportional to the derivative of
    the branch's log-modulus, vanishes). Transversal crossings keep their
    bisected angle.
    """
    fixed_log, target = x[setup.fixed_axis], x[setup.free_axis]
    lo, hi = math.log1p(-tol), math.log1p(tol)
    pitch = 2 * np.pi / thetas.size
    best = min(members, key=lambda h: h[3])
    theta0, m = best[1], best[2]
    rel = np.array([_source.wrap_angle(h[1] - theta0) for h in members])
    a, b = theta0 + rel.min() - pitch, theta0 + rel.max() + pitch

    candidates = []
    for sign in (1.0, -1.0):
        th, g = _source._golden(setup.exps, setup.coeffs, setup.free_axis, fixed_log, setup.shift,
                                m, target, a, b, sign, *bufs)
        margin = 1e-6 * (b - a)
        if lo <= g <= hi and a + margin < th < b - margin:
            candidates.append((abs(g), th))
    if not candidates:
        return theta0, m
    _, th = min(candidates)
    # pin the extremum through the sign change of the phase defect
    delta = 1e-6
    for _ in range(6):
        qa = _branch_defect(f, setup, fixed_log, m, th - delta)
        qb = _branch_defect(f, setup, fixed_log, m, th + delta)
        if np.isfinite(qa) and np.isfinite(qb) and qa * qb <= 0:
            if qa == 0:
                return th - delta, m
            if qb == 0:
                return th + delta, m
            t_star = brentq(lambda t: _branch_defect(f, setup, fixed_log, m, t),
                            th - delta, th + delta, xtol=1e-15, rtol=1e-15)
            if lo <= _gap(setup, fixed_log, target, m, t_star, bufs) <= hi:
                return t_star, m
            break
        delta *= 10
    return th, m


def fiber_scan(f: LaurentPolynomial, x, M: int = DEFAULT_ANGLES, tol_radial: float = DEFAULT_TOL_RADIAL,
               free_axis: int | None = None, refine: bool = True) -> FiberScanResult:
    """Points of ``Log^{-1}(x)`` on a plane curve, found by an angle sweep.

    Parameters
    ----------
    f : LaurentPolynomial
        Plane curve (``ambient_dim == 2``).
    x : array_like
        Log point.
    M : int
        Angle grid size for the swept (fixed) coordinate, at least 8.
    tol_radial : float
        Relative radial band: a root ``u`` is a hit when ``||u| - e^{x}| <= tol * e^{x}``.
    free_axis : int, optional
        Coordinate solved for; defaults to the second one when ``f`` involves it.
    refine : bool
        Look for band crossings and touches between grid angles.

    Returns
    -------
    FiberScanResult
        Hits (grid, crossing and touch events), cluster representatives and a
        dimension estimate.
    """
    x = as_log_point(x, 2)
    if M < 8:
        raise ValidationError("angle count must be at least 8")
    setup = plane_setup(f, free_axis)
    fx, fr = setup.fixed_axis, setup.free_axis
    thetas = angle_grid(M)
    S, status = kernels.fiber_grid(setup.exps, setup.coeffs, fr, np.array([x[fx]]), thetas,
                                   setup.shift, setup.deg)
    if status[0] == _source.STATUS_DEGENERATE:
        raise DegenerateRestriction("a whole circle of the free coordinate lies on the curve at this fiber")
    if status[0] == _source.STATUS_NONCONVERGED:
        raise NonConvergence("fiber root iteration failed")
    ks, ms, kinds, ths = kernels.fiber_events(S[0], thetas, setup.exps, setup.coeffs, fr, x[fx], x[fr],
                                              setup.shift, tol_radial, refine, False)

    # roots of every event, batched
    raw = []
    if ks.size:
        R = _roots_at(setup, x[fx], ths)
        with np.errstate(divide="ignore"):
            L = np.where(np.isfinite(R), np.log(np.abs(R)), np.inf)
        order = np.argsort(L, axis=1, kind="stable")
        W = R[np.arange(ks.size), order[np.arange(ks.size), ms]]
        P = _assemble(setup, x[fx], ths, W)
        res = _relative_residual(f, P)
        rad = np.abs(np.log(np.abs(W)) - x[fr])
        for e in range(ks.size):
            if res[e] <= TOL_F and rad[e] <= tol_radial * (1 + tol_radial):
                raw.append((int(ks[e]), float(ths[e]), int(ms[e]), float(rad[e]), P[e], float(res[e]),
                            KIND_NAMES[int(kinds[e])]))

    if not raw:
        return FiberScanResult(f, x, M, tol_radial, (), np.zeros((0, 2), dtype=np.complex128),
                               FiberDimension.EMPTY, 0.0, (0.0, 0.0))

    pts = np.array([h[4] for h in raw])
    args = arg_map(pts)
    grid_angles = {h[0] for h in raw if h[6] == "grid"}
    frac = len(grid_angles) / M
    sweep = (_circular_sweep(args[:, 0]), _circular_sweep(args[:, 1]))
    positive = frac >= COVERAGE and min(sweep) >= COVERAGE
    labels = _torus_clusters(args, max(10 * tol_radial, 1.5 * 2 * np.pi / M))

    # canonical cluster numbering: by first angle index, then argument
    first = {}
    for i, h in enumerate(raw):
        key = (h[0], args[i, fr])
        lab = labels[i]
        if lab not in first or key < first[lab]:
            first[lab] = key
    relabel = {lab: j for j, lab in enumerate(sorted(first, key=first.get))}
    labels = np.array([relabel[lab] for lab in labels])

    bufs = (np.empty(setup.deg + 1, np.complex128), np.empty(setup.deg, np.complex128),
            np.empty(setup.deg, np.float64))
    reps = []
    for j in range(len(relabel)):
        members = [raw[i] for i in np.nonzero(labels == j)[0]]
        if positive:
            reps.append(min(members, key=lambda h: h[3])[4])
            continue
        th, m = _refine_cluster(f, setup, x, members, thetas, tol_radial, bufs)
        w = _branch_root(setup, x[fx], th, m)
        p = _assemble(setup, x[fx], th, w)
        if not (np.isfinite(w) and abs(math.log(abs(w)) - x[fr]) <= tol_radial * (1 + tol_radial)):
            p = min(members, key=lambda h: h[3])[4]
        reps.append(p)

    order = sorted(range(len(raw)), key=lambda i: (raw[i][0], raw[i][1], raw[i][2]))
    hits = tuple(FiberHit(raw[i][0], raw[i][4], raw[i][5], raw[i][3], raw[i][6], int(labels[i])) for i in order)
    dim = FiberDimension.POSITIVE if positive else FiberDimension.FINITE
    return FiberScanResult(f, x, M, tol_radial, hits, np.array(reps, dtype=np.complex128), dim, frac, sweep)


# ---------------------------------------------------------------------------
# contour sampling


@dataclass(frozen=True)
class ContourCloud:
    points: np.ndarray  # (K, n) complex
    logs: np.ndarray  # (K, n) real
    params: np.ndarray | None = None  # curve parameters, when sampled from a parametrization
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def args(self) -> np.ndarray:
        return arg_map(self.points)


def _track(R: np.ndarray) -> np.ndarray:
    """Reorder roots along the angle axis (second to last) so each column is continuous."""
    n, M, d = R.shape
    out = R.copy()
    if d == 1:
        return out
    X = np.where(np.isfinite(R), R, np.nan + 0j)
    if d <= 6:
        perms = np.array(list(itertools.permutations(range(d))))
        for k in range(1, M):
            prev = X[:, k - 1] if k == 1 else np.where(np.isfinite(out[:, k - 1]), out[:, k - 1], np.nan)
            cand = X[:, k][:, perms]  # (n, P, d)
            cost = np.abs(cand - prev[:, None, :])
            cost = np.where(np.isnan(cost), 1e300, cost).sum(axis=-1)
            best = perms[np.argmin(cost, axis=1)]
            out[:, k] = np.take_along_axis(R[:, k], best, axis=1)
        return out
    for i in range(n):
        for k in range(1, M):
            prev = np.nan_to_num(out[i, k - 1], nan=1e300, posinf=1e300)
            cur = np.nan_to_num(R[i, k], nan=1e300, posinf=1e300)
            _, col = linear_sum_assignment(np.abs(cur[None, :] - prev[:, None]))
            out[i, k] = R[i, k][col]
    return out


def _slice_sweep(f: LaurentPolynomial, setup: PlaneSetup, fixed_logs: np.ndarray, M: int) -> list:
    """Critical points on the slices ``x_fixed = const`` via sign changes of the phase defect."""
    thetas = angle_grid(M)
    C = _fiber_coeff_tensor(setup.exps, setup.coeffs, setup.free_axis, fixed_logs, thetas,
                            setup.shift, setup.deg)
    n = fixed_logs.size
    R, status = kernels.roots_batch(C.reshape(n * M, setup.deg + 1), 200)
    R = R.reshape(n, M, setup.deg)
    bad_rows = (status.reshape(n, M) < 0).any(axis=1)
    # close the loop: append the first angle after the last, re-matched
    Rw = _track(np.concatenate([R, R[:, :1]], axis=1))
    th_ext = np.concatenate([thetas, [thetas[0] + 2 * np.pi]])
    P = np.empty(Rw.shape + (2,), dtype=np.complex128)
    P[..., setup.fixed_axis] = np.exp(fixed_logs[:, None, None] + 1j * th_ext[None, :, None])
    P[..., setup.free_axis] = Rw
    fin = np.isfinite(Rw) & (Rw != 0)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        Q = np.where(fin, phase_defect(log_derivative_terms(f, np.where(fin[..., None], P, 1.0))), np.nan)
    found = []
    for i in range(n):
        if bad_rows[i]:
            continue
        q = Q[i]
        for m in range(setup.deg):
            qa, qb = q[:-1, m], q[1:, m]
            exact = np.nonzero(qa == 0)[0]
            for k in exact:
                found.append(P[i, k, m])
            change = np.nonzero((qa * qb < 0) & np.isfinite(qa) & np.isfinite(qb))[0]
            for k in change:
                p = _refine_slice_zero(f, setup, fixed_logs[i], th_ext[k], th_ext[k + 1], Rw[i, k, m], Rw[i, k + 1, m])
                if p is not None:
                    found.append(p)
    return found


def _refine_slice_zero(f, setup, fixed_log, ta, tb, wa, wb):
    def root_near(t):
        s = (t - ta) / (tb - ta)
        guess = (1 - s) * wa + s * wb
        R = _roots_at(setup, fixed_log, t)[0]
        R = R[np.isfinite(R)]
        if R.size == 0:
            return None
        return R[np.argmin(np.abs(R - guess))]

    def q(t):
        w = root_near(t)
        if w is None or w == 0:
            return np.nan
        return float(phase_defect(log_derivative_terms(f, _assemble(setup, fixed_log, t, w))))

    qa, qb = q(ta), q(tb)
    if not (np.isfinite(qa) and np.isfinite(qb)) or qa * qb > 0:
        return None
    try:
        t = brentq(q, ta, tb, xtol=1e-15, rtol=1e-15, maxiter=200) if qa * qb < 0 else (ta if qa == 0 else tb)
    except (ValueError, RuntimeError):
        return None
    w = root_near(t)
    if w is None:
        return None
    return _assemble(setup, fixed_log, t, w)


def _laurent_to_poly2(f: LaurentPolynomial) -> tuple[np.ndarray, np.ndarray]:
    """Dense coefficient array ``A[i, j]`` of ``z^i w^j`` after clearing negative powers."""
    e = f.exps - f.exps.min(axis=0)
    A = np.zeros(tuple(e.max(axis=0) + 1), dtype=np.complex128)
    np.add.at(A, (e[:, 0], e[:, 1]), f.coeffs)
    return A, f.exps.min(axis=0)


def _sylvester_det(p: np.ndarray, q: np.ndarray) -> complex:
    """Resultant of two univariate polynomials (ascending coefficients) as a Sylvester determinant."""
    m, n = p.size - 1, q.size - 1
    if m <= 0 and n <= 0:
        return 1.0 + 0j
    if m <= 0:
        return p[0] ** n
    if n <= 0:
        return q[0] ** m
    Sy = np.zeros((m + n, m + n), dtype=np.complex128)
    for r in range(n):
        Sy[r, r:r + m + 1] = p[::-1]
    for r in range(m):
        Sy[n + r, r:r + n + 1] = q[::-1]
    return complex(np.linalg.det(Sy))


def _gauss_direction_points(f: LaurentPolynomial, phi: float) -> list:
    """Solutions of ``f = 0`` whose logarithmic Gauss image is the real direction ``(cos phi, sin phi)``."""
    f1, f2 = partial_derivative(f, 0), partial_derivative(f, 1)
    terms = {}
    for g, coef, ax in ((f1, math.sin(phi), 0), (f2, -math.cos(phi), 1)):
        if g is None:
            continue
        for e, c in g.as_dict().items():
            e = list(e)
            e[ax] += 1
            terms[tuple(e)] = terms.get(tuple(e), 0j) + coef * c
    terms = {e: c for e, c in terms.items() if abs(c) > 1e-14 * max(abs(v) for v in terms.values())}
    if not terms:
        return []
    G = LaurentPolynomial(2, terms.items())
    A, _ = _laurent_to_poly2(f)
    B, _ = _laurent_to_poly2(G)
    bound = (A.shape[0] - 1) * (B.shape[1] - 1) + (B.shape[0] - 1) * (A.shape[1] - 1)
    if bound == 0:
        return []
    K = 1 << int(math.ceil(math.log2(2 * (bound + 1))))
    zs = np.exp(2j * np.pi * np.arange(K) / K)
    vals = np.empty(K, dtype=np.complex128)
    for j, z in enumerate(zs):
        zp = z ** np.arange(A.shape[0])
        zq = z ** np.arange(B.shape[0])
        vals[j] = _sylvester_det(zp @ A, zq @ B)
    coef = np.fft.fft(vals) / K  # coef[k] multiplies z^k
    scale = np.abs(coef).max()
    if scale == 0:
        return []
    coef[np.abs(coef) <= 1e-11 * scale] = 0
    coef = np.trim_zeros(coef, "b")
    low = np.nonzero(coef)[0][0]
    coef = coef[low:]
    if coef.size < 2:
        return []
    R, st = kernels.roots_batch(coef[None, :], 200)
    out = []
    for z in R[0]:
        if not np.isfinite(z) or z == 0:
            continue
        Fw = (z ** np.arange(A.shape[0])) @ A
        W, _ = kernels.roots_batch(Fw[None, :], 200)
        W = W[0][np.isfinite(W[0]) & (W[0] != 0)]
        if W.size == 0:
            continue
        P = np.stack([np.full(W.size, z), W], axis=1)
        gv = np.abs(eval_poly_many(G, P)) / np.maximum(term_scale(G, P), 1e-300)
        p = _newton2(f, G, P[np.argmin(gv)])
        if p is not None:
            out.append(p)
    return out


def _newton2(f, G, p, iters: int = 8):
    """Complex Newton for the square system ``f = G = 0`` in log coordinates."""
    u = np.log(p.astype(np.complex128))
    for _ in range(iters):
        z = np.exp(u)
        F = np.array([eval_poly_many(f, z), eval_poly_many(G, z)])
        J = np.array([log_derivative_terms(f, z), log_derivative_terms(G, z)])
        try:
            du = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            return None
        u = u - du
        if np.abs(du).max() < 1e-15:
            break
    z = np.exp(u)
    if not np.all(np.isfinite(z)):
        return None
    return z


def contour_cloud(f: LaurentPolynomial, window, N: int = 200, M: int | None = None,
                  gauss_directions: int | None = None, tol_f: float = TOL_F,
                  tol_gamma: float = TOL_GAMMA) -> ContourCloud:
    """Sample critical points of ``Log|_V`` whose log images fall in ``window``.

    Three sweeps feed the cloud: slices ``x_1 = const`` and ``x_2 = const``
    (sign changes of the Gauss phase defect along tracked roots, refined by
    Brent's method) and a sweep over real directions of the Gauss map
    (solutions of ``f = 0`` with ``gamma`` parallel to ``(cos phi, sin phi)``).
    The last one also captures critical sets whose log image is a single point.
    Entries are deduplicated on a grid of pitch ``diam(window) / (4N)`` in log
    space and ``2 pi / (4N)`` in angle.
    """
    win = np.asarray(window, dtype=np.float64).reshape(2, 2)
    if np.any(win[:, 0] >= win[:, 1]):
        raise ValidationError("window must have lo < hi on both axes")
    M = M or max(N, 64)
    K = gauss_directions or 2 * N
    found = []
    for free in (1, 0):
        try:
            setup = plane_setup(f, free)
        except ValidationError:
            continue
        fixed_logs = np.linspace(win[setup.fixed_axis, 0], win[setup.fixed_axis, 1], N)
        found.extend(_slice_sweep(f, setup, fixed_logs, M))
    for phi in np.pi * (np.arange(K) + 0.5) / K:
        found.extend(_gauss_direction_points(f, float(phi)))

    diam = float(np.linalg.norm(win[:, 1] - win[:, 0]))
    pitch = diam / (4 * N)
    apitch = 2 * np.pi / (4 * N)
    seen = set()
    pts = []
    for p in found:
        if not np.all(np.isfinite(p)) or np.any(p == 0):
            continue
        x = log_map(p)
        if np.any(x < win[:, 0]) or np.any(x > win[:, 1]):
            continue
        if not is_log_critical(f, p, tol_f, tol_gamma):
            continue
        key = tuple(np.round(x / pitch).astype(int)) + tuple(np.round(arg_map(p) / apitch).astype(int))
        if key in seen:
            continue
        seen.add(key)
        pts.append(p)
    P = np.array(pts, dtype=np.complex128).reshape(-1, 2)
    X = log_map(P) if P.size else np.zeros((0, 2))
    if P.shape[0]:
        A = arg_map(P)
        order = np.lexsort((A[:, 1], A[:, 0], X[:, 1], X[:, 0]))
        P, X = P[order], X[order]
    return ContourCloud(P, X, None,
                        {"window": win.tolist(), "N": N, "angles": M, "gauss_directions": K,
                         "log_pitch": pitch, "angle_pitch": apitch},
                        {"tol_f": tol_f, "tol_gamma": tol_gamma})


def curve_contour(curve: RationalCurve, radii=(math.exp(-8), math.exp(8)), N: int = 200,
                  exclusion: float = 1e-6, rank_ratio: float = RANK_RATIO) -> ContourCloud:
    """Parameters on a log-polar grid where ``Log o rho`` drops rank.

    The angle grid ``-pi + 2 pi j / N`` is symmetric under conjugation and
    contains the real axis when ``N`` is even.
    """
    r = np.geomspace(radii[0], radii[1], N)
    th = -np.pi + 2 * np.pi * np.arange(N) / N
    th = np.where(th <= -np.pi, np.pi, th)
    T = (r[:, None] * np.exp(1j * th[None, :])).ravel()
    T = T[curve.distance_to_excluded(T) > exclusion]
    rank = curve_log_rank_many(curve, T, rank_ratio)
    T = T[rank < 2]
    P = curve.eval_many(T).reshape(-1, curve.ambient_dim)
    X = log_map(P) if T.size else np.zeros((0, curve.ambient_dim))
    return ContourCloud(P, X, T, {"radii": [float(radii[0]), float(radii[1])], "N": N},
                        {"rank_ratio": rank_ratio, "exclusion": exclusion})


# ---------------------------------------------------------------------------
# regularity of critical values


class Regularity(str, Enum):
    REGULAR = "regular"
    GAUSS_CRITICAL = "gauss_critical"
    POSITIVE = "positive_dimensional"
    NOT_CRITICAL = "fiber_not_critical"


@dataclass(frozen=True)
class RegularityReport:
    fiber: FiberScanResult
    critical: tuple
    gauss_derivative_norm: tuple
    verdict: Regularity
    tol_reg: float
    step: float


def _affine_gauss(f: LaurentPolynomial, p: np.ndarray, b: int) -> complex:
    g = log_derivative_terms(f, p)
    return complex(g[1 - b] / g[b])


def _on_curve_step(f: LaurentPolynomial, p: np.ndarray, ds: complex) -> np.ndarray:
    """Move along the curve by ``ds`` in log coordinates, then one Newton correction."""
    g = log_derivative_terms(f, p)
    t = np.array([g[1], -g[0]]) / np.linalg.norm(g)
    u = np.log(p) + ds * t
    z = np.exp(u)
    g = log_derivative_terms(f, z)
    u = u - eval_poly_many(f, z) * np.conj(g) / np.vdot(g, g).real
    return np.exp(u)


def gauss_derivative_norm(f: LaurentPolynomial, p, h: float = STEP_H) -> float:
    """``|d gamma_affine / ds|`` along the curve, by central differences in log coordinates."""
    p = np.asarray(p, dtype=np.complex128)
    b = int(np.argmax(np.abs(log_derivative_terms(f, p))))
    pp, pm = _on_curve_step(f, p, h), _on_curve_step(f, p, -h)
    du = np.linalg.norm(np.log(pp) - np.log(pm))
    return float(abs(_affine_gauss(f, pp, b) - _affine_gauss(f, pm, b)) / du)


def is_regular_value(f: LaurentPolynomial, x, M: int = DEFAULT_ANGLES, tol_radial: float = DEFAULT_TOL_RADIAL,
                     h: float = STEP_H, tol_reg: float = TOL_REG, tol_f: float = TOL_F,
                     tol_gamma: float = TOL_GAMMA) -> RegularityReport:
    fib = fiber_scan(f, x, M, tol_radial)
    if fib.dimension_estimate is FiberDimension.POSITIVE:
        return RegularityReport(fib, (), (), Regularity.POSITIVE, tol_reg, h)
    crit = tuple(bool(is_log_critical(f, p, tol_f, tol_gamma)) for p in fib.clusters)
    if fib.is_empty or not all(crit):
        return RegularityReport(fib, crit, (), Regularity.NOT_CRITICAL, tol_reg, h)
    norms = tuple(gauss_derivative_norm(f, p, h) for p in fib.clusters)
    verdict = Regularity.GAUSS_CRITICAL if min(norms) <= tol_reg else Regularity.REGULAR
    return RegularityReport(fib, crit, norms, verdict, tol_reg, h)


__all__ = [
    "ContourCloud",
    "FiberDimension",
    "FiberHit",
    "FiberScanResult",
    "PlaneSetup",
    "Regularity",
    "RegularityReport",
    "angle_grid",
    "contour_cloud",
    "curve_contour",
    "fiber_scan",
    "gauss_derivative_norm",
    "is_regular_value",
    "plane_setup",
]
