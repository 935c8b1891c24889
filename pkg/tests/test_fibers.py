import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from amoeba_scope.algebra import eval_poly, eval_poly_many
from amoeba_scope.fibers import (
    FiberDimension,
    Regularity,
    angle_grid,
    contour_cloud,
    curve_contour,
    fiber_scan,
    is_regular_value,
)
from amoeba_scope.logmaps import log_gauss_many
from amoeba_scope.parsing import parse_polynomial

SQRT95 = math.sqrt(95)


def test_angle_grid():
    a = angle_grid(4)
    assert np.allclose(a, [-math.pi / 2, 0, math.pi / 2, math.pi])
    assert a[-1] == math.pi


def test_line_fiber_at_origin(line):
    r = fiber_scan(line, (0, 0), 720)
    assert r.dimension_estimate is FiberDimension.FINITE
    pts = sorted((h.point for h in r.hits), key=lambda p: p[0].imag)
    w = complex(-0.5, math.sqrt(3) / 2)
    assert np.allclose(pts[0], [w.conjugate(), w], atol=1e-12)
    assert np.allclose(pts[1], [w, w.conjugate()], atol=1e-12)


def test_empty_fiber(line):
    r = fiber_scan(line, (5, 0), 360)
    assert r.is_empty
    assert r.dimension_estimate is FiberDimension.EMPTY


def test_hyperbola_fiber_at_origin(hyperbola):
    r = fiber_scan(hyperbola, (0, 0), 720)
    zs = sorted((h.point[0] for h in r.hits), key=lambda z: z.imag)
    assert len(zs) == 2
    assert abs(zs[0] - complex(-7 / 12, -SQRT95 / 12)) < 1e-9
    assert abs(zs[1] - complex(-7 / 12, SQRT95 / 12)) < 1e-9


def test_pinch_fiber_is_a_circle(hyperbola):
    x = math.log(6 ** -0.5)
    r = fiber_scan(hyperbola, (x, x), 720)
    assert r.dimension_estimate is FiberDimension.POSITIVE
    assert r.hit_angle_fraction == 1.0


def test_tangential_fiber_refines_to_real_point(line):
    # (0, log 2) is on the boundary: the only fiber point is z=1, w=-2
    r = fiber_scan(line, (0, math.log(2)), 360)
    assert r.dimension_estimate is FiberDimension.FINITE
    for h in r.hits:
        assert np.allclose(h.point, [1, -2], atol=1e-6)


_xs = st.tuples(st.floats(-3, 3), st.floats(-3, 3))


@settings(max_examples=30)
@given(_xs)
def test_fiber_hits_lie_on_curve_and_fiber(x):
    f = parse_polynomial("1/6 + z + w + z*w")
    r = fiber_scan(f, x, 180)
    for h in r.hits:
        assert h.radial_error <= r.tol_radial
        assert np.allclose(np.log(np.abs(h.point)), x, atol=r.tol_radial * 10)
        scale = 1 + np.abs(h.point).prod()
        assert abs(eval_poly(f, h.point)) <= 1e-8 * scale


@settings(max_examples=30)
@given(_xs)
def test_line_fiber_nonempty_iff_triangle(x):
    a, b = math.exp(x[0]), math.exp(x[1])
    terms = sorted([1.0, a, b])
    margin = terms[0] + terms[1] - terms[2]
    assume(abs(margin) > 1e-3 * terms[2])
    r = fiber_scan(parse_polynomial("1 + z + w"), x, 360)
    assert r.is_empty == (margin < 0)


def test_regularity_verdicts(line, hyperbola):
    assert is_regular_value(line, (0, math.log(2))).verdict is Regularity.REGULAR
    assert is_regular_value(line, (0, 0)).verdict is Regularity.NOT_CRITICAL
    assert is_regular_value(hyperbola, (math.log(2), math.log(13 / 18))).verdict is Regularity.REGULAR
    x = math.log(6 ** -0.5)
    assert is_regular_value(hyperbola, (x, x)).verdict is Regularity.POSITIVE


def test_line_contour_on_triangle_equalities(line):
    cc = contour_cloud(line, [-3, 3, -3, 3], 80)
    assert len(cc) > 50
    a, b = np.exp(cc.logs).T
    gap = np.min(np.abs(np.stack([a + b - 1, a - b - 1, b - a - 1])), axis=0)
    assert np.max(gap / (1 + a + b)) < 1e-7


def test_hyperbola_contour_is_log_critical(hyperbola):
    cc = contour_cloud(hyperbola, [-4, 4, -4, 4], 100)
    g = log_gauss_many(hyperbola, cc.points)
    defect = np.abs((g[:, 0] * np.conj(g[:, 1])).imag) / np.abs(g).prod(axis=1)
    assert np.max(defect) < 1e-8
    assert np.all(np.abs(eval_poly_many(hyperbola, cc.points)) < 1e-8 * (1 + np.abs(cc.points).prod(axis=1)))
    assert cc.grid["N"] == 100


def test_contour_inside_window(hyperbola):
    cc = contour_cloud(hyperbola, [-1, 1, -2, 0], 60)
    assert np.all(cc.logs[:, 0] >= -1 - 1e-9) and np.all(cc.logs[:, 0] <= 1 + 1e-9)
    assert np.all(cc.logs[:, 1] >= -2 - 1e-9) and np.all(cc.logs[:, 1] <= 1e-9)


def test_curve_contour_real_parameters(hyperbola_curve, hyperbola):
    cc = curve_contour(hyperbola_curve, N=100)
    assert len(cc) > 0
    assert np.max(np.abs(cc.params.imag)) < 1e-9
    assert np.all(np.abs(eval_poly_many(hyperbola, cc.points)) < 1e-8 * (1 + np.abs(cc.points).prod(axis=1)))


@pytest.mark.parametrize("text,window", [("1 + z + w", [-3, 3, -3, 3]), ("1/6 + z + w + z*w", [-3, 3, -3, 3])])
def test_raster_boundary_near_contour(text, window):
    from scipy.spatial import cKDTree

    from amoeba_scope.regions import rasterize_amoeba_2d
    from amoeba_scope.voxels import boundary_cells

    f = parse_polynomial(text)
    g = rasterize_amoeba_2d(f, window, 121)
    cc = contour_cloud(f, window, 200)
    idx = np.argwhere(boundary_cells(g))
    assert len(idx) > 50
    centers = np.column_stack([g.axis_centers(a)[idx[:, a]] for a in range(2)])
    pitch = (g.hi - g.lo) / np.array(g.occupied.shape)
    d, _ = cKDTree(cc.logs).query(centers)
    assert d.max() <= 2 * pitch.max()


@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(["1 + z + w", "1/6 + z + w + z*w", "1 + z^3 + w^3 + 2*z*w"]))
@settings(max_examples=30)
def test_hits_per_angle_bounded_by_degree(x1, x2, text):
    from amoeba_scope.fibers import plane_setup

    f = parse_polynomial(text)
    fib = fiber_scan(f, (x1, x2), 180)
    per_angle = np.bincount([h.angle_index for h in fib.hits], minlength=1)
    assert per_angle.max(initial=0) <= plane_setup(f).deg


@pytest.mark.parametrize("text,x", [
    ("1 + z + w", (0.0, math.log(2))),
    ("1/6 + z + w + z*w", (-0.5 * math.log(6), -0.5 * math.log(6))),
    ("1/6 + z + w + z*w", (0.0, 0.0)),
])
def test_dimension_estimate_stable_under_doubling(text, x):
    f = parse_polynomial(text)
    assert fiber_scan(f, x, 360).dimension_estimate is fiber_scan(f, x, 720).dimension_estimate


def test_curve_contour_conjugation_symmetric(fig1_curve):
    from scipy.spatial import cKDTree

    cc = curve_contour(fig1_curve, N=120)
    t = cc.params
    assert len(t) > 0
    P = np.column_stack([t.real, t.imag])
    d, _ = cKDTree(P).query(np.column_stack([t.real, -t.imag]))
    assert d.max() <= 1e-12 * max(1.0, np.abs(t).max())
