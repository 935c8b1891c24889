import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from oracles import triangle_margin

from amoeba_scope.errors import (
    DegenerateLinear,
    GeneratorNotInIdeal,
    InsufficientSamples,
    ValidationError,
)
from amoeba_scope.parsing import parse_curve, parse_polynomial
from amoeba_scope.regions import (
    ConvexityVerdict,
    SampleCloud,
    amoeba_membership_2d,
    arg_critical_values,
    basis_gap_report,
    check_generators,
    coamoeba_cloud,
    convexity_audit,
    convexity_scan,
    linear_cylinder_amoeba_3d,
    linear_cylinder_contains,
    linear_form,
    pushforward_curve,
    rasterize_amoeba_2d,
    torus_clusters,
    torus_distance,
    voxelize_cloud,
)


@settings(max_examples=40)
@given(st.tuples(st.floats(-3, 3), st.floats(-3, 3)))
def test_membership_matches_triangle_inequality(x):
    m = triangle_margin(x)
    assume(abs(m) > 1e-2)
    assert amoeba_membership_2d(parse_polynomial("1 + z + w"), x, 360) == (m >= 0)


def test_raster_frame(line):
    g = rasterize_amoeba_2d(line, [-3, 3, -3, 3], 21, 180)
    assert g.resolution == (21, 21)
    c = g.axis_centers(0)
    assert g.occupied[10, 10]  # (0, 0) is in the amoeba
    assert not g.occupied[-1, 10]
    assert np.allclose(c[10], 0)


def test_pushforward_lies_on_curve(fig1_curve):
    s = pushforward_curve(fig1_curve)
    assert s.kind == "log" and s.points.shape[1] == 3
    z = fig1_curve.eval_many(s.provenance)
    assert np.allclose(np.log(np.abs(z)), s.points)


def test_voxelize_cloud_dilation():
    g0 = voxelize_cloud([[0.05, 0.05]], [0, 1, 0, 1], 10, 0)
    g1 = voxelize_cloud([[0.55, 0.55]], [0, 1, 0, 1], 10, 1)
    assert g0.count() == 1 and g0.occupied[0, 0]
    assert g1.count() == 9


def test_linear_form():
    g = parse_polynomial("z2 - z1 - 1/2", 3)
    lf = linear_form(g)
    assert lf.axes == (0, 1) and lf.constant == -0.5
    for bad in ("z1*z2 + z3 + 1", "z1 + 1", "z1^2 + z2 + 1"):
        with pytest.raises(DegenerateLinear):
            linear_form(parse_polynomial(bad, 3))


def test_cylinder_contains():
    g = parse_polynomial("z1 + z2 + 1", 3)
    X = np.array([[0, 0, 7], [5, 0, -2], [math.log(2), 0, 0], [0, math.log(2), 0]])
    assert linear_cylinder_contains(g, X).tolist() == [True, False, True, True]


@settings(max_examples=25)
@given(st.sampled_from(["z2 - z1 - 1/2", "z3 - z1 + 3/2", "z1 + 2*z2 - 3*z3 + 1", "z1 - z3 + 2i"]),
       st.integers(0, 2**31))
def test_cylinder_raster_covers_samples(text, seed):
    g = parse_polynomial(text, 3)
    grid = linear_cylinder_amoeba_3d(g, [-2, 2] * 3, 6)
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, size=(4000, 3))
    idx, _ = grid.cell_index(X)
    hit = linear_cylinder_contains(g, X)
    # every sampled amoeba point sits in an occupied box
    assert np.all(grid.occupied[tuple(idx[hit].T)])


def test_generators_checked(fig1_curve):
    check_generators(fig1_curve, [parse_polynomial("z2 - z1 - 1/2", 3)])
    with pytest.raises(GeneratorNotInIdeal):
        check_generators(fig1_curve, [parse_polynomial("z1 + z2 + z3 + 1", 3)])


def test_curve_inside_generator_cylinders(fig1_curve, fig1_generators):
    s = pushforward_curve(fig1_curve)
    for g in fig1_generators:
        assert linear_cylinder_contains(g, s.points).all()


def test_basis_gap_small(fig1_curve, fig1_generators):
    rep = basis_gap_report(fig1_curve, fig1_generators, [-4, 4] * 3, 24)
    assert rep.contained and rep.exact_violations == 0
    assert rep.difference_count == rep.intersection_count - rep.amoeba_count
    assert 0 < rep.gap_ratio < 1
    assert len(rep.witnesses) <= 10
    with pytest.raises(ValidationError):
        basis_gap_report(fig1_curve, [], [-4, 4] * 3, 8)


def _surface(fn, n=4000, seed=0):
    u, v = np.random.default_rng(seed).uniform(-1, 1, size=(2, n))
    return SampleCloud(np.stack([u, v, fn(u, v)], axis=1), np.zeros(n, complex))


def test_convexity_synthetic():
    para = _surface(lambda u, v: u * u + v * v)
    saddle = _surface(lambda u, v: u * u - v * v)
    plane = _surface(lambda u, v: 0.3 * u - v)
    assert convexity_audit(para, [0, 0, 0], 0.5).verdict is ConvexityVerdict.CONVEX
    assert convexity_audit(saddle, [0, 0, 0], 0.5).verdict is ConvexityVerdict.SADDLE
    assert convexity_audit(plane, [0, 0, 0], 0.5).verdict is ConvexityVerdict.INDETERMINATE
    with pytest.raises(InsufficientSamples):
        convexity_audit(para, [5, 5, 5], 0.1)


@given(st.floats(0.2, 5), st.floats(-math.pi, math.pi))
def test_convexity_invariant_under_rotation(k, a):
    cloud = _surface(lambda u, v: k * (u * u - 0.5 * v * v), n=2000)
    R = np.array([[math.cos(a), 0, -math.sin(a)], [0, 1, 0], [math.sin(a), 0, math.cos(a)]])
    rotated = SampleCloud(cloud.points @ R.T, cloud.provenance)
    assert convexity_audit(rotated, [0, 0, 0], 0.5).verdict is ConvexityVerdict.SADDLE


def test_convexity_scan_deterministic():
    cloud = _surface(lambda u, v: u * u - v * v)
    a = convexity_scan(cloud, 10, 0.4, seed=3)
    b = convexity_scan(cloud, 10, 0.4, seed=3)
    assert [x.verdict for x in a] == [x.verdict for x in b]
    assert np.array_equal(np.array([x.base_point for x in a]), np.array([x.base_point for x in b]))


def test_coamoeba_range(hyperbola_curve):
    s = coamoeba_cloud(hyperbola_curve)
    assert s.kind == "arg"
    assert np.all(s.points > -math.pi) and np.all(s.points <= math.pi)


def test_arg_critical_values_contains_real_point(hyperbola):
    s = arg_critical_values(hyperbola, [-4, 4, -4, 4])
    d = torus_distance(s.points, np.array([[math.pi, math.pi]]))
    assert d.min() < 1e-6


def test_torus_distance_wraps():
    assert torus_distance([[3.1, -3.1]], [[-3.1, 3.1]])[0] == pytest.approx(math.hypot(*[2 * math.pi - 6.2] * 2))


def test_torus_clusters_across_seam():
    P = np.array([[math.pi - 0.01, 0], [-math.pi + 0.01, 0], [0, 1]])
    lab = torus_clusters(P, 0.1)
    assert lab[0] == lab[1] != lab[2]


def test_tentacle_directions(fig1_curve):
    # zeros and poles of the components and t -> infinity give four ray directions; the
    # finite coordinates decay like 1/|log|, so the check starts at |log| > 12 (about 4.7 degrees)
    rays = np.array([[-1, 0, 0], [0, -1, 0], [0, 0, -1], [1, 1, 1]]) / np.array([[1], [1], [1], [math.sqrt(3)]])
    P = pushforward_curve(fig1_curve).points
    far = P[np.linalg.norm(P, axis=1) > 12]
    cos = (far / np.linalg.norm(far, axis=1, keepdims=True)) @ rays.T
    best = cos.argmax(axis=1)
    angle = np.degrees(np.arccos(np.clip(cos.max(axis=1), -1, 1)))
    assert len(far) > 100
    assert angle.max() < 5
    assert set(best.tolist()) == {0, 1, 2, 3}


@given(st.floats(1e-8, 1e-2), st.floats(1.0, 100.0), st.sampled_from(["1 + z + w", "1/6 + z + w + z*w"]))
@settings(max_examples=12)
def test_raster_monotone_in_tolerance(tol, factor, text):
    f = parse_polynomial(text)
    small = rasterize_amoeba_2d(f, [-3, 3, -3, 3], 41, 180, tol).occupied
    large = rasterize_amoeba_2d(f, [-3, 3, -3, 3], 41, 180, tol * factor).occupied
    assert not (small & ~large).any()
