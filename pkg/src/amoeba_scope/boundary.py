"""Branch normals, the origin-in-hull test, point classification and the pinch locator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq, linprog, minimize_scalar, nnls
from scipy.spatial import ConvexHull, QhullError

from .algebra import LaurentPolynomial, RationalCurve, eval_poly_many, poly_eval, term_scale
from .errors import (
    AmbiguousNormal,
    DegenerateRestriction,
    EntireFamily,
    NoPinch,
    NonConvergence,
    ValidationError,
)
from .fibers import (
    DEFAULT_TOL_RADIAL,
    STEP_H,
    TOL_REG,
    FiberDimension,
    FiberScanResult,
    Regularity,
    fiber_scan,
    gauss_derivative_norm,
)
from .logmaps import TOL_F, TOL_GAMMA, as_log_point, is_log_critical, log_derivative_terms, log_map

BRANCH_H = 1e-3
CLASSIFY_ANGLES = 360
HULL_TOL = 1e-9


# ---------------------------------------------------------------------------
# local branch geometry


class _LocalBranch:
    """Holomorphic chart ``s -> point`` of the curve near a torus point.

    The coordinate ``a`` is moved as ``z_a = z_a(0) * exp(s)``; the other one
    follows by Newton's method in log coordinates.
    """

    def __init__(self, f: LaurentPolynomial, p: np.ndarray):
        self.f = f
        g = log_derivative_terms(f, p)
        self.b = int(np.argmax(np.abs(g)))
        self.a = 1 - self.b
        self.u0 = np.log(p)
        self.slope = -g[self.a] / g[self.b]

    def point(self, s: complex) -> np.ndarray:
        u = self.u0.copy()
        u[self.a] += s
        u[self.b] += self.slope * s
        for _ in range(30):
            z = np.exp(u)
            F = eval_poly_many(self.f, z)
            gb = log_derivative_terms(self.f, z)[self.b]
            step = F / gb
            u[self.b] -= step
            if abs(step) <= 1e-15 * (1 + abs(u[self.b])):
                break
        z = np.exp(u)
        if abs(eval_poly_many(self.f, z)) > 1e-10 * term_scale(self.f, z):
            raise NonConvergence("on-curve Newton correction failed")
        return z

    def defect(self, s: complex) -> float:
        """Smooth phase defect ``Im(g1 conj g2) / |g|^2``; zero exactly on the critical set."""
        g = log_derivative_terms(self.f, self.point(s))
        return float(np.imag(g[0] * np.conj(g[1])) / np.vdot(g, g).real)


@dataclass(frozen=True)
class BranchData:
    fiber_point: np.ndarray
    log_point: np.ndarray
    tangent: np.ndarray
    inward_normal: np.ndarray
    sample_count: int
    projection_mean: float
    projection_std: float
    projection_min: float
    tangent_source: str  # "critical_neighbours" or "gauss_map"
    step: float


def _gauss_real_direction(f: LaurentPolynomial, p: np.ndarray) -> np.ndarray:
    g = log_derivative_terms(f, p)
    k = int(np.argmax(np.abs(g)))
    v = np.real(g * np.exp(-1j * np.angle(g[k])))
    return v / np.linalg.norm(v)


def _critical_neighbours(chart: _LocalBranch, h: float):
    """Two critical points at distance about ``h`` on either side, in the chart's s-plane."""
    d = 1e-2 * h
    gx = (chart.defect(d) - chart.defect(-d)) / (2 * d)
    gy = (chart.defect(1j * d) - chart.defect(-1j * d)) / (2 * d)
    norm = math.hypot(gx, gy)
    if not np.isfinite(norm) or norm == 0.0:
        return None
    grad = complex(gx, gy) / norm
    along = 1j * grad
    out = []
    for sgn in (1.0, -1.0):
        base = sgn * h * along
        fn = lambda t: chart.defect(base + t * grad)  # noqa: E731
        lo, hi = -0.5 * h, 0.5 * h
        try:
            if fn(lo) * fn(hi) > 0:
                return None
            t = brentq(fn, lo, hi, xtol=1e-16, rtol=1e-15)
        except (ValueError, NonConvergence):
            return None
        out.append(base + t * grad)
    return out


def branch_normal(f: LaurentPolynomial, z_i, x=None, h: float = BRANCH_H, rings: int = 3,
                  per_ring: int = 16, tol_f: float = TOL_F, tol_gamma: float = TOL_GAMMA) -> BranchData:
    """Contour tangent and inward normal of the local amoeba branch through ``z_i``.

    Parameters
    ----------
    f : LaurentPolynomial
        Plane curve.
    z_i : array_like
        A log-critical point of the curve.
    x : array_like, optional
        The log point of the fiber; must agree with ``log_map(z_i)`` when given.
    h : float
        Radius of the sampled disk in the holomorphic chart.
    rings, per_ring : int
        Disk sampling pattern (at least 32 samples in total).

    Raises
    ------
    AmbiguousNormal
        When the sampled patch does not lie on one side of the contour.
    """
    p = np.asarray(z_i, dtype=np.complex128)
    if rings * per_ring < 32:
        raise ValidationError("branch sampling needs at least 32 samples")
    if not is_log_critical(f, p, tol_f, tol_gamma):
        raise ValidationError("branch_normal needs a log-critical fiber point")
    x0 = log_map(p)
    if x is not None and np.abs(as_log_point(x, 2) - x0).max() > 1e-4:
        raise ValidationError("fiber point does not lie over the given log point")
    chart = _LocalBranch(f, p)

    nb = _critical_neighbours(chart, h)
    source = "critical_neighbours"
    if nb is not None:
        xp, xm = log_map(chart.point(nb[0])), log_map(chart.point(nb[1]))
        tau = xp - xm
        if np.linalg.norm(tau) < 1e-3 * h:
            nb = None
    if nb is None:
        source = "gauss_map"
        gr = _gauss_real_direction(f, p)
        tau = np.array([-gr[1], gr[0]])
    tau = tau / np.linalg.norm(tau)
    n = np.array([-tau[1], tau[0]])

    # local contour as a graph over the tangent: v = c1 u + c2 u^2
    c1 = c2 = 0.0
    if nb is not None:
        U = np.array([[(xp - x0) @ tau, ((xp - x0) @ tau) ** 2], [(xm - x0) @ tau, ((xm - x0) @ tau) ** 2]])
        V = np.array([(xp - x0) @ n, (xm - x0) @ n])
        try:
            c1, c2 = np.linalg.solve(U, V)
        except np.linalg.LinAlgError:
            c1 = c2 = 0.0

    radii = h * np.arange(1, rings + 1) / rings
    proj = []
    for j, r in enumerate(radii):
        for k in range(per_ring):
            s = r * np.exp(1j * (2 * np.pi * k / per_ring + np.pi * j / per_ring))
            y = log_map(chart.point(s)) - x0
            u = y @ tau
            proj.append(y @ n - (c1 * u + c2 * u * u))
    proj = np.array(proj)
    mean, std = float(proj.mean()), float(proj.std())
    mixed = proj.min() < 0 < proj.max()
    if mean == 0.0 or (mixed and abs(mean) < 0.1 * std):
        raise AmbiguousNormal(f"branch at {p} is not one-sided (mean {mean:.3g}, std {std:.3g})")
    v = n if mean > 0 else -n
    return BranchData(p, x0, tau, v, proj.size, abs(mean), std, float((proj * np.sign(mean)).min()), source, h)


# ---------------------------------------------------------------------------
# origin versus convex hull


class HullVerdict(str, Enum):
    INSIDE = "strictly_inside"
    ON_BOUNDARY = "on_boundary"
    OUTSIDE = "outside"


def _min_norm_point(V: np.ndarray) -> float:
    """Distance from the origin to the convex hull of the rows of ``V``."""
    k = V.shape[0]
    w = 1e3 * (1 + np.abs(V).max())
    A = np.vstack([V.T, w * np.ones((1, k))])
    b = np.concatenate([np.zeros(V.shape[1]), [w]])
    lam, _ = nnls(A, b, maxiter=50 * k)
    lam = lam / lam.sum()
    return float(np.linalg.norm(lam @ V))


def _depth(V: np.ndarray) -> float:
    """Distance from the origin to the hull boundary, for an origin inside a full-dimensional hull."""
    try:
        hull = ConvexHull(V)
    except (QhullError, ValueError):
        return 0.0
    return float(-hull.equations[:, -1].max())


def _angular_outside(V: np.ndarray) -> bool:
    ang = np.sort(np.arctan2(V[:, 1], V[:, 0]))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    return bool(gaps.max() > np.pi)


def _lp_outside(V: np.ndarray) -> bool:
    k, n = V.shape
    A_eq = np.vstack([V.T, np.ones((1, k))])
    b_eq = np.concatenate([np.zeros(n), [1.0]])
    res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs")
    return res.status == 2


def origin_in_hull(vectors, tol: float = HULL_TOL) -> HullVerdict:
    """Position of the origin relative to the closed convex hull of ``vectors`` (2-D or 3-D).

    Points within ``tol`` of the hull boundary, on either side, are ``on_boundary``.
    """
    V = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if V.shape[0] == 0 or V.shape[1] not in (2, 3):
        raise ValidationError("origin_in_hull needs a nonempty list of 2-D or 3-D vectors")
    if np.linalg.norm(V, axis=1).min() <= tol:
        return HullVerdict.ON_BOUNDARY
    outside = _angular_outside(V) if V.shape[1] == 2 else _lp_outside(V)
    if outside:
        return HullVerdict.OUTSIDE if _min_norm_point(V) > tol else HullVerdict.ON_BOUNDARY
    return HullVerdict.INSIDE if _depth(V) > tol else HullVerdict.ON_BOUNDARY


# ---------------------------------------------------------------------------
# classification


class Verdict(str, Enum):
    OUTSIDE = "Outside"
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    NONREGULAR = "NonRegular"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class PointClass:
    verdict: Verdict
    x: np.ndarray
    fiber: FiberScanResult | None
    critical: tuple = ()
    regularity: Regularity | None = None
    gauss_derivative_norm: tuple = ()
    branches: tuple = ()
    hull: HullVerdict | None = None
    note: str = ""
    settings: dict | None = None

    @property
    def mean_normal(self) -> np.ndarray | None:
        if not self.branches:
            return None
        v = np.mean([b.inward_normal for b in self.branches], axis=0)
        return v / np.linalg.norm(v)


def classify_point(f: LaurentPolynomial, x, M: int = CLASSIFY_ANGLES, tol_radial: float = DEFAULT_TOL_RADIAL,
                   h: float = BRANCH_H, h_reg: float = STEP_H, tol_reg: float = TOL_REG,
                   tol_f: float = TOL_F, tol_gamma: float = TOL_GAMMA, hull_tol: float = HULL_TOL) -> PointClass:
    """Outside / Interior / Boundary / NonRegular / Degenerate verdict for a log point of a plane curve."""
    x = as_log_point(x, 2)
    settings = {"M": M, "tol_radial": tol_radial, "h": h, "h_reg": h_reg, "tol_reg": tol_reg,
                "tol_f": tol_f, "tol_gamma": tol_gamma, "hull_tol": hull_tol}
    try:
        fib = fiber_scan(f, x, M, tol_radial)
    except DegenerateRestriction as exc:
        return PointClass(Verdict.NONREGULAR, x, None, note=str(exc), settings=settings)
    if fib.is_empty:
        return PointClass(Verdict.OUTSIDE, x, fib, settings=settings)
    if fib.dimension_estimate is FiberDimension.POSITIVE:
        return PointClass(Verdict.NONREGULAR, x, fib, regularity=Regularity.POSITIVE,
                          note="positive-dimensional fiber", settings=settings)
    crit = tuple(bool(is_log_critical(f, p, tol_f, tol_gamma)) for p in fib.clusters)
    if not all(crit):
        return PointClass(Verdict.INTERIOR, x, fib, crit, Regularity.NOT_CRITICAL,
                          note="fiber contains a non-critical point", settings=settings)
    norms = tuple(gauss_derivative_norm(f, p, h_reg) for p in fib.clusters)
    if min(norms) <= tol_reg:
        return PointClass(Verdict.NONREGULAR, x, fib, crit, Regularity.GAUSS_CRITICAL, norms,
                          note="fiber contains a critical point of the Gauss map", settings=settings)
    try:
        branches = tuple(branch_normal(f, p, x, h, tol_f=tol_f, tol_gamma=tol_gamma) for p in fib.clusters)
    except AmbiguousNormal as exc:
        return PointClass(Verdict.NONREGULAR, x, fib, crit, Regularity.REGULAR, norms,
                          note=f"ambiguous branch normal: {exc}", settings=settings)
    hull = origin_in_hull([b.inward_normal for b in branches], hull_tol)
    verdict = {HullVerdict.OUTSIDE: Verdict.BOUNDARY, HullVerdict.INSIDE: Verdict.INTERIOR,
               HullVerdict.ON_BOUNDARY: Verdict.DEGENERATE}[hull]
    return PointClass(verdict, x, fib, crit, Regularity.REGULAR, norms, branches, hull, settings=settings)


# ---------------------------------------------------------------------------
# pinching points of graph curves t -> (t, rho(t))


@dataclass(frozen=True)
class PinchResult:
    r_star: float
    osc_star: float
    x_pinch: np.ndarray
    radii: np.ndarray
    oscillation: np.ndarray
    theta_count: int


def _graph_component(curve) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(curve, RationalCurve):
        if curve.ambient_dim == 2:
            num0, den0 = curve.components[0]
            if not (num0.size == 2 and num0[0] == 0 and den0.size == 1):
                raise ValidationError("pinch locator needs a graph curve t -> (c t, rho(t))")
            return curve.components[1]
        if curve.ambient_dim == 1:
            return curve.components[0]
        raise ValidationError("pinch locator works on plane graph curves")
    num, den = curve
    return np.asarray(num, dtype=np.complex128), np.asarray(den, dtype=np.complex128)


def oscillation(curve, r, theta_count: int = 256) -> np.ndarray:
    """``max - min`` of ``|rho|`` on circles ``|t| = r`` sampled at ``theta_count`` angles."""
    num, den = _graph_component(curve)
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    t = r[:, None] * np.exp(2j * np.pi * np.arange(theta_count) / theta_count)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        mod = np.abs(poly_eval(num, t) / poly_eval(den, t))
    return mod.max(axis=1) - mod.min(axis=1)


def circle_modulus(curve, r: float, theta_count: int = 256) -> float:
    num, den = _graph_component(curve)
    t = r * np.exp(2j * np.pi * np.arange(theta_count) / theta_count)
    return float(np.abs(poly_eval(num, t) / poly_eval(den, t)).mean())


def locate_pinch(curve, r_window=(1e-3, 1e3), theta_count: int = 256, coarse: int = 401,
                 tol: float = 1e-10, no_pinch: float = 1e-3) -> PinchResult:
    """Radius where ``|rho|`` is constant on the circle ``|t| = r``.

    A coarse log-spaced scan brackets the minimum of the oscillation, then
    golden-section search refines it.

    Raises
    ------
    EntireFamily
        When every scanned circle has oscillation below ``tol``.
    NoPinch
        When the smallest oscillation exceeds ``no_pinch``.
    """
    lo, hi = float(r_window[0]), float(r_window[1])
    if not 0 < lo < hi:
        raise ValidationError("radius window must satisfy 0 < lo < hi")
    radii = np.geomspace(lo, hi, coarse)
    osc = oscillation(curve, radii, theta_count)
    osc = np.where(np.isfinite(osc), osc, np.inf)
    scale = np.array([max(1.0, circle_modulus(curve, r, theta_count)) for r in radii])
    if np.all(osc < tol * scale):
        raise EntireFamily("|rho| is constant on every circle of the window")
    # osc decays towards the window ends when rho has finite limits at 0 and infinity,
    # so only interior local minima qualify
    interior = np.nonzero((osc[1:-1] <= osc[:-2]) & (osc[1:-1] <= osc[2:]) & (osc[1:-1] < np.inf))[0] + 1
    if interior.size == 0:
        raise NoPinch("oscillation has no interior local minimum in the window")
    i = int(interior[np.argmin(osc[interior])])
    g = lambda s: float(oscillation(curve, math.exp(s), theta_count)[0])  # noqa: E731
    s_grid = np.log(radii)
    try:
        res = minimize_scalar(g, bracket=(s_grid[i - 1], s_grid[i], s_grid[i + 1]), method="golden",
                              options={"xtol": 1e-15, "maxiter": 400})
    except ValueError:  # flat bracket
        res = minimize_scalar(g, bounds=(s_grid[i - 1], s_grid[i + 1]), method="bounded",
                              options={"xatol": 1e-14})
    s_star = float(res.x)
    r_star = math.exp(s_star)
    osc_star = g(s_star)
    if osc_star > no_pinch:
        raise NoPinch(f"smallest oscillation {osc_star:.3g} exceeds {no_pinch:g}")
    x_pinch = np.array([s_star, math.log(circle_modulus(curve, r_star, theta_count))])
    return PinchResult(r_star, osc_star, x_pinch, radii, osc, theta_count)


__all__ = [
    "BranchData",
    "HullVerdict",
    "PinchResult",
    "PointClass",
    "Verdict",
    "branch_normal",
    "circle_modulus",
    "classify_point",
    "locate_pinch",
    "origin_in_hull",
    "oscillation",
]
