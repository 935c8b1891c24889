"""Amoeba rasters, pushforward clouds, basis-gap experiments, convexity audits, coamoebas."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import kernels
from .algebra import LaurentPolynomial, RationalCurve, eval_poly_many, term_scale
from .errors import DegenerateLinear, GeneratorNotInIdeal, InsufficientSamples, ValidationError
from .fibers import (
    DEFAULT_TOL_RADIAL,
    FiberDimension,
    _fiber_coeff_tensor,
    angle_grid,
    contour_cloud,
    fiber_scan,
    plane_setup,
)
from .logmaps import arg_map, as_log_point, log_map
from .voxels import VoxelGrid, grid_difference, grid_intersect, parse_window

RASTER_ANGLES = 360
PURBHOO_RTOL = 1e-12
GAP_NOISE_LIMIT = 0.02
# contour points sharing one log cell before the fiber there is rescanned
MIN_FIBER_GROUP = 3


# ---------------------------------------------------------------------------
# plane-curve membership


def amoeba_membership_2d(f: LaurentPolynomial, x, M: int = RASTER_ANGLES, tol: float = DEFAULT_TOL_RADIAL) -> bool:
    """Whether the torus fiber over ``x`` meets the curve (closed-amoeba convention)."""
    x = as_log_point(x, 2)
    s = plane_setup(f)
    out = kernels.membership_raster(s.exps, s.coeffs, s.free_axis, np.array([x[s.fixed_axis]]),
                                    np.array([x[s.free_axis]]), angle_grid(M), s.shift, s.deg, tol)
    return bool(out[0, 0])


def rasterize_amoeba_2d(f: LaurentPolynomial, window, res, M: int = RASTER_ANGLES,
                        tol: float = DEFAULT_TOL_RADIAL) -> VoxelGrid:
    """Membership at every cell centre of a box in the log plane."""
    grid = VoxelGrid.empty(parse_window(window, 2), res)
    s = plane_setup(f)
    fixed = grid.axis_centers(s.fixed_axis)
    free = grid.axis_centers(s.free_axis)
    occ = kernels.membership_raster(s.exps, s.coeffs, s.free_axis, fixed, free, angle_grid(M), s.shift, s.deg, tol)
    if s.fixed_axis == 1:
        occ = occ.T
    return grid.with_occupancy(occ)


# ---------------------------------------------------------------------------
# sample clouds


@dataclass(frozen=True)
class SampleCloud:
    points: np.ndarray  # (K, n) log points or angle vectors
    provenance: np.ndarray  # (K,) parameter values, or (K, n) torus points
    kind: str = "log"  # "log" or "arg"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.points.shape[0] != self.provenance.shape[0]:
            raise ValidationError("provenance length must match the number of points")
        if not np.all(np.isfinite(self.points)):
            raise ValidationError("sample cloud contains non-finite points")

    def __len__(self) -> int:
        return self.points.shape[0]


def _log_polar(center: complex, r_lo: float, r_hi: float, n_r: int, n_theta: int, offset: float = 0.0) -> np.ndarray:
    r = np.geomspace(r_lo, r_hi, n_r)
    th = -np.pi + 2 * np.pi * (np.arange(n_theta) + offset) / n_theta
    return (center + r[:, None] * np.exp(1j * th[None, :])).ravel()


def parameter_samples(curve: RationalCurve, radii=(math.exp(-10), math.exp(10)), n_r: int = 120, n_theta: int = 96,
                      refine: int = 4, exclusion: float = 1e-6, local_min: float = math.exp(-14)) -> np.ndarray:
    """Log-polar parameter grid around the origin, refined around every excluded parameter.

    Near each zero or pole ``e`` a local log-polar grid with ``refine`` times
    the angular density reaches down to ``local_min`` so that the tentacles
    coming out of ``e`` are sampled far out; samples within ``exclusion`` of
    an excluded parameter are dropped. The angle sets are symmetric under
    conjugation, so real curves give conjugation-symmetric clouds.
    """
    parts = [_log_polar(0.0, radii[0], radii[1], n_r, n_theta)]
    ex = curve.excluded_params
    for e in ex:
        others = [abs(e - o) for o in ex if o != e]
        if e != 0:
            others.append(abs(e))
        reach = 0.5 * min(others) if others else 1.0
        if reach <= local_min:
            continue
        parts.append(_log_polar(complex(e), local_min, reach, n_r // 2, refine * n_theta // 4))
    T = np.concatenate(parts)
    T = T[curve.distance_to_excluded(T) > exclusion]
    # canonical order, unique up to rounding
    T = T[np.lexsort((np.round(T.imag, 12), np.round(T.real, 12)))]
    return T


def pushforward_curve(curve: RationalCurve, params=None, **grid) -> SampleCloud:
    """``Log o rho`` on a parameter grid (see :func:`parameter_samples`)."""
    T = parameter_samples(curve, **grid) if params is None else np.asarray(params, dtype=np.complex128)
    P = curve.eval_many(T).reshape(-1, curve.ambient_dim)
    ok = np.all(np.isfinite(P) & (P != 0), axis=1)
    return SampleCloud(log_map(P[ok]), T[ok], "log", {"grid": grid})


def voxelize_cloud(points, window, res, dilation: int = 1) -> VoxelGrid:
    """Cells hit by any sample, dilated ``dilation`` times with the full 3^n neighbourhood."""
    P = points.points if isinstance(points, SampleCloud) else np.asarray(points, dtype=np.float64)
    win = parse_window(window)
    grid = VoxelGrid.empty(win, res)
    occ = np.zeros(grid.resolution, dtype=bool)
    P = np.asarray(P, dtype=np.float64).reshape(-1, win.shape[0])
    if P.size:
        idx, inside = grid.cell_index(P)
        idx = idx[inside]
        occ[tuple(idx.T)] = True
    if dilation > 0 and occ.any():
        st = ndimage.generate_binary_structure(occ.ndim, occ.ndim)
        occ = ndimage.binary_dilation(occ, st, iterations=int(dilation))
    elif dilation < 0:
        raise ValidationError("dilation must be non-negative")
    return grid.with_occupancy(occ)


# ---------------------------------------------------------------------------
# linear cylinders in three-space


@dataclass(frozen=True)
class LinearForm:
    """``sum_k coefs[k] z_{axes[k]} + constant`` with distinct axes."""

    axes: tuple
    coefs: tuple
    constant: complex
    ambient_dim: int

    def moduli(self, X: np.ndarray) -> np.ndarray:
        """Term moduli at log points, shape ``(K, terms)``; the constant comes last when present."""
        cols = [abs(c) * np.exp(X[:, k]) for k, c in zip(self.axes, self.coefs)]
        if self.constant != 0:
            cols.append(np.full(X.shape[0], abs(self.constant)))
        return np.stack(cols, axis=1)


def linear_form(g: LaurentPolynomial) -> LinearForm:
    """Decompose an affine-linear ``g`` with at least three terms."""
    d = g.as_dict()
    n = g.ambient_dim
    zero = (0,) * n
    axes = []
    for e, coef in sorted(d.items()):
        if e == zero:
            continue
        if sorted(e) != [0] * (n - 1) + [1]:
            raise DegenerateLinear("generator terms must be constants or single variables")
        axes.append((e.index(1), coef))
    if len(d) < 3:
        raise DegenerateLinear("a linear generator needs at least three terms")
    axes.sort()
    return LinearForm(tuple(a for a, _ in axes), tuple(c for _, c in axes), complex(d.get(zero, 0)), n)


def linear_cylinder_contains(g, X, rtol: float = PURBHOO_RTOL) -> np.ndarray:
    """Closed polygon inequalities (largest term modulus at most the sum of the others) at log points ``X``."""
    L = g if isinstance(g, LinearForm) else linear_form(g)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    m = L.moduli(X)
    total = m.sum(axis=1)
    return 2 * m.max(axis=1) <= total * (1 + rtol)


def linear_cylinder_amoeba_3d(g: LaurentPolynomial, window, res) -> VoxelGrid:
    """Cells whose closed box meets the amoeba of an affine-linear ``g``.

    Every term modulus ranges over an interval on a box independently of
    the others, so the box meets the amoeba iff each lower bound is at most
    the sum of the other upper bounds.
    """
    L = linear_form(g)
    if L.ambient_dim != 3:
        raise ValidationError("linear cylinders live in three-space")
    grid = VoxelGrid.empty(parse_window(window, 3), res)
    lows, highs = [], []
    for k, c in zip(L.axes, L.coefs):
        edges = grid.lo[k] + np.arange(grid.resolution[k] + 1) * grid.pitch[k]
        shape = [1, 1, 1]
        shape[k] = grid.resolution[k]
        lows.append((abs(c) * np.exp(edges[:-1])).reshape(shape))
        highs.append((abs(c) * np.exp(edges[1:])).reshape(shape))
    if L.constant != 0:
        lows.append(np.full((1, 1, 1), abs(L.constant)))
        highs.append(lows[-1])
    upper = sum(highs)
    occ = np.ones(grid.resolution, dtype=bool)
    for lo, hi in zip(lows, highs):
        occ &= np.broadcast_to(lo <= upper - hi, grid.resolution)
    return grid.with_occupancy(occ)


# ---------------------------------------------------------------------------
# basis-gap experiment


@dataclass(frozen=True)
class BasisGapReport:
    generator_counts: list
    intersection_count: int
    amoeba_count: int
    difference_count: int
    gap_ratio: float
    witnesses: list
    contained: bool
    containment_violations: int
    exact_violations: int
    sample_count: int
    settings: dict

    def as_json(self) -> dict:
        return {
            "generator_counts": [int(c) for c in self.generator_counts],
            "intersection_count": int(self.intersection_count),
            "amoeba_count": int(self.amoeba_count),
            "difference_count": int(self.difference_count),
            "gap_ratio": float(self.gap_ratio),
            "witnesses": self.witnesses,
            "contained": bool(self.contained),
            "containment_violations": int(self.containment_violations),
            "exact_violations": int(self.exact_violations),
            "sample_count": int(self.sample_count),
            "settings": self.settings,
        }


def check_generators(curve: RationalCurve, generators, count: int = 100, tol: float = 1e-9, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    T = rng.normal(size=count) + 1j * rng.normal(size=count)
    T = T[curve.distance_to_excluded(T) > 1e-3]
    P = curve.eval_many(T)
    for k, g in enumerate(generators):
        if g.ambient_dim != curve.ambient_dim:
            raise ValidationError(f"generator {k} has dimension {g.ambient_dim}, curve has {curve.ambient_dim}")
        rel = np.abs(eval_poly_many(g, P)) / np.maximum(1.0, term_scale(g, P))
        if rel.max() > tol:
            raise GeneratorNotInIdeal(f"generator {k} does not vanish on the curve (residual {rel.max():.3g})")


def generator_grid(g: LaurentPolynomial, window, res, M: int = RASTER_ANGLES) -> VoxelGrid:
    if g.ambient_dim == 2:
        return rasterize_amoeba_2d(g, window, res, M)
    if g.ambient_dim == 3:
        return linear_cylinder_amoeba_3d(g, window, res)
    raise ValidationError("generators must be plane curves or linear forms in three-space")


def basis_gap_report(curve: RationalCurve, generators, window, res: int = 64, dilation: int = 1,
                     cloud: SampleCloud | None = None, max_witnesses: int = 10, seed: int = 0,
                     M: int = RASTER_ANGLES) -> BasisGapReport:
    """Compare the intersection of generator amoebas with the voxelized curve amoeba.

    The curve amoeba grid is the dilated pushforward cloud clipped to the
    intersection; containment is checked with the undilated cloud. Witnesses
    are centres of difference cells farthest from the curve cells.
    """
    generators = list(generators)
    if not generators:
        raise ValidationError("need at least one generator")
    check_generators(curve, generators, seed=seed)
    win = parse_window(window, curve.ambient_dim)
    grids = [generator_grid(g, win, res, M) for g in generators]
    inter = grid_intersect(grids)
    cloud = cloud if cloud is not None else pushforward_curve(curve)
    raw = voxelize_cloud(cloud, win, res, 0)
    # containment at voxel tolerance: a sampled cell may sit one cell outside a centre-sampled raster
    st = ndimage.generate_binary_structure(inter.ndim, inter.ndim)
    loose = ndimage.binary_dilation(inter.occupied, st)
    violations = int((raw.occupied & ~loose).sum())
    exact_violations = int((raw.occupied & ~inter.occupied).sum())
    dilated = voxelize_cloud(cloud, win, res, dilation)
    amoeba = dilated.with_occupancy(dilated.occupied & inter.occupied)
    diff = grid_difference(inter, amoeba)
    n_inter, n_diff = inter.count(), diff.count()
    ratio = n_diff / n_inter if n_inter else 0.0

    witnesses = []
    if n_diff:
        dist = ndimage.distance_transform_edt(~raw.occupied) if raw.occupied.any() else np.full(raw.resolution, np.inf)
        idx = np.argwhere(diff.occupied)
        d = dist[tuple(idx.T)]
        order = np.lexsort(tuple(idx.T[::-1]) + (-d,))[:max_witnesses]
        for o in order:
            witnesses.append({"index": idx[o].tolist(), "center": inter.centers(idx[o])[0].tolist(),
                              "distance_cells": float(d[o])})
    return BasisGapReport([g.count() for g in grids], n_inter, amoeba.count(), n_diff, ratio, witnesses,
                          violations == 0, violations, exact_violations, len(cloud),
                          {"window": win.tolist(), "res": int(res), "dilation": int(dilation),
                           "noise_limit": GAP_NOISE_LIMIT})


# ---------------------------------------------------------------------------
# local convexity of sampled surfaces


class ConvexityVerdict(str, Enum):
    CONVEX = "convex"
    SADDLE = "saddle"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ConvexityAudit:
    base_point: np.ndarray
    form: np.ndarray  # 2x2 symmetric
    eigenvalues: np.ndarray
    verdict: ConvexityVerdict
    fit_residual: float
    neighbours: int
    frame: np.ndarray  # rows: tangent 1, tangent 2, normal


MIN_NEIGHBOURS = 30


def convexity_audit(cloud, point, radius: float, tree: cKDTree | None = None) -> ConvexityAudit:
    """Quadratic fit of the normal coordinate over a principal-component tangent plane."""
    P = cloud.points if isinstance(cloud, SampleCloud) else np.asarray(cloud, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != 3:
        raise ValidationError("convexity audits need a cloud in three-space")
    point = np.asarray(point, dtype=np.float64)
    tree = tree or cKDTree(P)
    nb = P[tree.query_ball_point(point, radius)]
    if nb.shape[0] < MIN_NEIGHBOURS:
        raise InsufficientSamples(f"{nb.shape[0]} samples within radius {radius}, need {MIN_NEIGHBOURS}")
    Y = nb - point
    _, _, Vt = np.linalg.svd(Y - Y.mean(axis=0), full_matrices=False)
    frame = Vt  # rows sorted by decreasing variance; last row is the normal
    u, v, w = (Y @ frame.T).T
    D = np.stack([u * u, u * v, v * v, u, v, np.ones_like(u)], axis=1)
    coef, *_ = np.linalg.lstsq(D, w, rcond=None)
    resid = float(np.sqrt(np.mean((D @ coef - w) ** 2)))
    form = np.array([[coef[0], coef[1] / 2], [coef[1] / 2, coef[2]]])
    lam = np.linalg.eigvalsh(form)
    strong = np.abs(lam) > 3 * resid
    if strong.all() and lam[0] * lam[1] < 0:
        verdict = ConvexityVerdict.SADDLE
    elif strong.all():
        verdict = ConvexityVerdict.CONVEX
    else:
        verdict = ConvexityVerdict.INDETERMINATE
    return ConvexityAudit(point, form, lam, verdict, resid, nb.shape[0], frame)


def convexity_scan(cloud: SampleCloud, count: int, radius: float, seed: int = 0) -> list:
    """Audit ``count`` seed-chosen base points of the cloud; points with too few neighbours are skipped."""
    rng = np.random.default_rng(seed)
    tree = cKDTree(cloud.points)
    picks = rng.choice(len(cloud), size=min(count, len(cloud)), replace=False)
    out = []
    for i in picks:
        try:
            out.append(convexity_audit(cloud.points, cloud.points[i], radius, tree))
        except InsufficientSamples:
            continue
    return out


# ---------------------------------------------------------------------------
# coamoebas


def coamoeba_cloud(source, window=None, N: int = 121, M: int = 360, **grid) -> SampleCloud:
    """Argument images of curve samples.

    For a :class:`RationalCurve` the parameter grid of :func:`parameter_samples`
    is used. For a plane curve the first coordinate runs over ``N`` log values
    in ``window`` (first axis) times ``M`` angles, with every root of the
    second coordinate; roots whose log modulus leaves the window's second axis
    are dropped.
    """
    if isinstance(source, RationalCurve):
        T = parameter_samples(source, **grid)
        P = source.eval_many(T).reshape(-1, source.ambient_dim)
        ok = np.all(np.isfinite(P) & (P != 0), axis=1)
        return SampleCloud(arg_map(P[ok]), T[ok], "arg", {"grid": grid})
    f = source
    win = parse_window(window if window is not None else [[-3, 3], [-3, 3]], 2)
    s = plane_setup(f)
    x_fixed = np.linspace(win[s.fixed_axis, 0], win[s.fixed_axis, 1], N)
    thetas = angle_grid(M)
    C = _fiber_coeff_tensor(s.exps, s.coeffs, s.free_axis, x_fixed, thetas, s.shift, s.deg)
    R, _ = kernels.roots_batch(C.reshape(-1, s.deg + 1), 200)
    R = R.reshape(N, M, s.deg)
    Z = np.broadcast_to(np.exp(x_fixed[:, None, None] + 1j * thetas[None, :, None]), R.shape)
    P = np.empty(R.shape + (2,), dtype=np.complex128)
    P[..., s.fixed_axis] = Z
    P[..., s.free_axis] = R
    P = P.reshape(-1, 2)
    ok = np.all(np.isfinite(P) & (P != 0), axis=1)
    P = P[ok]
    lw = np.log(np.abs(P[:, s.free_axis]))
    P = P[(lw >= win[s.free_axis, 0]) & (lw <= win[s.free_axis, 1])]
    return SampleCloud(arg_map(P), P, "arg", {"window": win.tolist(), "N": N, "M": M})


def arg_critical_values(f: LaurentPolynomial, window, N: int = 200, fiber_angles: int = 720,
                        **kwargs) -> SampleCloud:
    """Argument images of the sampled critical points of ``Log|_V`` (a plane curve).

    A positive-dimensional fiber is critical along its whole length but
    collapses to one log point, so the contour sweeps sample it sparsely.
    Log points carrying several contour points are rescanned with
    ``fiber_angles`` angles and the hits of positive-dimensional fibers added.
    """
    cc = contour_cloud(f, window, N, **kwargs)
    if not len(cc):
        return SampleCloud(np.zeros((0, 2)), np.zeros((0, 2), dtype=np.complex128), "arg", dict(cc.grid))
    Z = [cc.points]
    pitch = cc.grid["log_pitch"]
    keys, inverse, counts = np.unique(np.round(cc.logs / pitch).astype(np.int64), axis=0,
                                      return_inverse=True, return_counts=True)
    filled = []
    for g in np.flatnonzero(counts >= MIN_FIBER_GROUP):
        x = cc.logs[inverse.ravel() == g].mean(axis=0)
        fib = fiber_scan(f, x, fiber_angles)
        if fib.dimension_estimate is FiberDimension.POSITIVE:
            Z.append(np.array([h.point for h in fib.hits]))
            filled.append(x.tolist())
    Z = np.concatenate(Z)
    return SampleCloud(arg_map(Z), Z, "arg", {**cc.grid, "filled_fibers": filled, "fiber_angles": fiber_angles})


def torus_clusters(points: np.ndarray, linkage: float) -> np.ndarray:
    """Single-linkage labels of angle vectors under the wrapped Euclidean metric."""
    P = np.mod(np.asarray(points, dtype=np.float64) + np.pi, 2 * np.pi)
    if P.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    tree = cKDTree(P, boxsize=2 * np.pi * (1 + 1e-15))
    pairs = tree.query_pairs(linkage, output_type="ndarray")
    k = P.shape[0]
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(k, k)) if len(pairs) else coo_matrix((k, k))
    _, labels = connected_components(adj, directed=False)
    return labels


def torus_distance(a, b) -> np.ndarray:
    d = np.mod(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64) + np.pi, 2 * np.pi) - np.pi
    return np.linalg.norm(d, axis=-1)


__all__ = [
    "BasisGapReport",
    "ConvexityAudit",
    "ConvexityVerdict",
    "LinearForm",
    "SampleCloud",
    "amoeba_membership_2d",
    "arg_critical_values",
    "basis_gap_report",
    "check_generators",
    "coamoeba_cloud",
    "convexity_audit",
    "convexity_scan",
    "generator_grid",
    "linear_cylinder_amoeba_3d",
    "linear_cylinder_contains",
    "linear_form",
    "parameter_samples",
    "pushforward_curve",
    "rasterize_amoeba_2d",
    "torus_clusters",
    "torus_distance",
    "voxelize_cloud",
]
