import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from oracles import hull_class, hyperbola_oscillation, line_boundary_normal

from amoeba_scope.boundary import (
    HullVerdict,
    Verdict,
    branch_normal,
    circle_modulus,
    classify_point,
    locate_pinch,
    origin_in_hull,
    oscillation,
)
from amoeba_scope.errors import EntireFamily, NoPinch, SingularPoint, ValidationError
from amoeba_scope.parsing import parse_curve, parse_polynomial


def _angle(u, v) -> float:
    c = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


def test_branch_normal_line(line):
    b = branch_normal(line, (1, -2))
    assert _angle(b.inward_normal, line_boundary_normal(0.0)) < 1.0
    assert abs(np.dot(b.tangent, b.inward_normal)) < 1e-9
    assert b.projection_mean > 0


def test_branch_normal_rejects_gauss_singular_point():
    f = parse_polynomial("1 + z + w + z*w")  # (1+z)(1+w)
    with pytest.raises(SingularPoint):
        branch_normal(f, (-1, -1))


@pytest.mark.parametrize("x1", [-1.5, -0.3, 0.0, 0.8, 1.9])
def test_boundary_points_of_line(line, x1):
    x = (x1, math.log1p(math.exp(x1)))
    pc = classify_point(line, x)
    assert pc.verdict is Verdict.BOUNDARY
    assert pc.hull is HullVerdict.OUTSIDE
    assert _angle(pc.branches[0].inward_normal, line_boundary_normal(x1)) < 5.0


def test_interior_and_outside(line):
    assert classify_point(line, (0, 0)).verdict is Verdict.INTERIOR
    assert classify_point(line, (5, 0)).verdict is Verdict.OUTSIDE


def test_pinch_is_nonregular(hyperbola):
    x = math.log(6 ** -0.5)
    assert classify_point(hyperbola, (x, x)).verdict is Verdict.NONREGULAR


def test_hull_examples():
    assert origin_in_hull([[1, 0], [-1, 0.001], [0, -1]]) is HullVerdict.INSIDE
    assert origin_in_hull([[1, 0], [-1, 0]]) is HullVerdict.ON_BOUNDARY
    assert origin_in_hull([[1, 0], [0, 1]]) is HullVerdict.OUTSIDE
    assert origin_in_hull([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]]) is HullVerdict.INSIDE
    assert origin_in_hull([[1, 0, 0], [0, 1, 0], [-1, -1, 0]]) is HullVerdict.ON_BOUNDARY
    assert origin_in_hull([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) is HullVerdict.OUTSIDE
    with pytest.raises(ValidationError):
        origin_in_hull([[1, 2, 3, 4]])


_vec = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=80)
@given(st.integers(2, 3).flatmap(lambda n: st.lists(st.lists(_vec, min_size=n, max_size=n), min_size=1, max_size=6)))
def test_hull_matches_brute_force(V):
    V = np.array(V)
    expected = hull_class(V, 1e-9)
    assume(expected is not None)
    assert origin_in_hull(V).value == {"inside": "strictly_inside"}.get(expected, expected)


@given(st.lists(st.lists(_vec, min_size=2, max_size=2), min_size=1, max_size=6),
       st.floats(0.1, 10), st.floats(-math.pi, math.pi))
def test_hull_invariant_under_similarity(V, s, a):
    V = np.array(V)
    assume(np.linalg.norm(V, axis=1).min() > 1e-2)
    R = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    v1 = origin_in_hull(V)
    v2 = origin_in_hull(s * V @ R.T)
    if HullVerdict.ON_BOUNDARY not in (v1, v2):
        assert v1 is v2


def test_locate_pinch_hyperbola(hyperbola_curve):
    pr = locate_pinch(hyperbola_curve)
    assert abs(pr.r_star - 6 ** -0.5) < 1e-6
    assert pr.osc_star < 1e-8
    assert np.allclose(pr.x_pinch, math.log(6 ** -0.5), atol=1e-6)


def test_locate_pinch_failures():
    with pytest.raises(EntireFamily):
        locate_pinch(parse_curve("2; t; t^2"))
    with pytest.raises(NoPinch):
        locate_pinch(parse_curve("2; t; 1 - t"))
    with pytest.raises(NoPinch):
        locate_pinch(parse_curve("2; t; (t - 2)/(t + 3)"))


@given(st.floats(1e-2, 1e2).filter(lambda r: abs(r - 1) > 1e-3))
def test_oscillation_matches_closed_form(r):
    curve = parse_curve("2; t; -(t + 1/6)/(t + 1)")
    assert abs(oscillation(curve, r)[0] - hyperbola_oscillation(r)) < 1e-12 * (1 + hyperbola_oscillation(r))


def test_circle_modulus_at_pinch(hyperbola_curve):
    assert abs(circle_modulus(hyperbola_curve, 6 ** -0.5) - 6 ** -0.5) < 1e-12


def _scenario_points():
    from amoeba_scope.scenarios import default_boundary_points

    return [np.asarray(p, dtype=float) for p in default_boundary_points()]


@pytest.fixture(scope="module")
def line_classes(line):
    return [classify_point(line, p) for p in _scenario_points()]


def test_probe_along_mean_normal(line, line_classes):
    from amoeba_scope.regions import amoeba_membership_2d

    eps = 1e-3
    rng = np.random.default_rng(0)
    boundary = 0
    for pc in line_classes:
        if pc.verdict is Verdict.BOUNDARY:
            boundary += 1
            assert amoeba_membership_2d(line, pc.x)
            assert not amoeba_membership_2d(line, pc.x - eps * pc.mean_normal)
        elif pc.verdict is Verdict.INTERIOR and any(pc.critical):
            for u in rng.normal(size=(16, 2)):
                u /= np.linalg.norm(u)
                assert amoeba_membership_2d(line, pc.x + eps * u)
                assert amoeba_membership_2d(line, pc.x - eps * u)
    assert boundary >= 20


def test_verdict_stable_under_refinement(line, line_classes):
    from amoeba_scope.boundary import BRANCH_H

    for pc in line_classes:
        fine = classify_point(line, pc.x, 2 * pc.settings["M"], h=BRANCH_H / 2)
        assert fine.verdict is pc.verdict, pc.x


def _line_patch(z, h):
    s = h * np.exp(1j * np.linspace(0, 2 * np.pi, 48, endpoint=False))[None, :] * np.linspace(0.2, 1, 5)[:, None]
    zz = z + s.ravel()
    return np.column_stack([zz, -1 - zz])


def _hyperbola_patch(z, h):
    s = h * np.exp(1j * np.linspace(0, 2 * np.pi, 48, endpoint=False))[None, :] * np.linspace(0.2, 1, 5)[:, None]
    zz = z + s.ravel()
    return np.column_stack([zz, -(zz + 1 / 6) / (zz + 1)])


@pytest.mark.parametrize("which", ["line", "hyperbola"])
def test_branch_normal_half_plane(which, line, hyperbola):
    from amoeba_scope.boundary import BRANCH_H

    f, patch = (line, _line_patch) if which == "line" else (hyperbola, _hyperbola_patch)
    # real points off the pinch are log-critical on both curves
    for z0 in (-3.0, -0.5, 0.25, 2.0):
        w0 = patch(complex(z0), 0.0)[0, 1]
        p = np.array([z0, w0], dtype=complex)
        b = branch_normal(f, p)
        y = np.log(np.abs(patch(complex(z0), BRANCH_H))) - b.log_point
        assert (y @ b.inward_normal).min() >= -1e-4
