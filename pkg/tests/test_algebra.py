import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from amoeba_scope.algebra import (
    LaurentPolynomial,
    eval_curve,
    eval_poly,
    gauss_degree,
    newton_polytope,
    partial_derivative,
    poly_eval,
    restrict_to_fiber,
    univariate_roots,
)
from amoeba_scope.errors import (
    DegeneratePolytope,
    DegenerateRestriction,
    ExcludedParameter,
    ValidationError,
)
from amoeba_scope.parsing import parse_polynomial


def test_eval(line, hyperbola):
    assert eval_poly(line, (1, 1)) == 3
    assert abs(eval_poly(hyperbola, (-2, -11 / 6))) < 1e-15
    assert eval_poly(parse_polynomial("z*w"), (2, 3)) == 6


def test_eval_off_torus(line):
    with pytest.raises(ValidationError):
        eval_poly(line, (0, 1))
    with pytest.raises(ValidationError):
        eval_poly(line, (1, 1, 1))


def test_partials(line, hyperbola):
    assert partial_derivative(line, 0) == parse_polynomial("1 + 0*z + 0*w") or partial_derivative(line, 0).as_dict() == {(0, 0): 1}
    assert partial_derivative(hyperbola, 0).as_dict() == {(0, 0): 1, (0, 1): 1}
    d = partial_derivative(parse_polynomial("z^-1", 1), 0)
    assert d.as_dict() == {(-2,): -1}


def test_partial_zero_is_none():
    assert partial_derivative(parse_polynomial("1 + w", 2), 0) is None


def test_eval_curve(fig1_curve, fig2_curve, hyperbola_curve):
    assert np.allclose(eval_curve(fig1_curve, 1), [1, 1.5, -0.5])
    assert np.allclose(eval_curve(fig2_curve, 1j), [1j, 1 + 1j, -1j])
    assert np.allclose(eval_curve(hyperbola_curve, 2), [2, -13 / 18])


def test_excluded_parameter(fig1_curve):
    assert np.allclose(sorted(fig1_curve.excluded_params, key=lambda c: c.real), [-0.5, 0, 1.5])
    with pytest.raises(ExcludedParameter):
        eval_curve(fig1_curve, -0.5 + 1e-13)


def test_roots_small():
    assert np.allclose(univariate_roots([-1, 0, 1]), [-1, 1])
    assert np.allclose(univariate_roots([1, 0, 1]), [-1j, 1j])


def test_roots_cubic_against_companion():
    c = np.array([-6, 11, -6, 1], dtype=complex)
    oracle = np.sort_complex(np.linalg.eigvals(np.array([[0, 0, 6], [1, 0, -11], [0, 1, 6]], dtype=float)))
    got = univariate_roots(c)
    assert np.max(np.abs(got - oracle)) < 1e-10
    assert np.allclose(got, [1, 2, 3], atol=1e-10)


def test_roots_reject_constant():
    with pytest.raises(ValidationError):
        univariate_roots([1.0])


_cplx = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.booleans())
def test_vieta_roundtrip(seed, degree, real):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=degree + 1) + (0 if real else 1j * rng.normal(size=degree + 1))
    r = univariate_roots(c)
    assert len(r) == degree
    monic = c / c[-1]
    back = np.poly(r)[::-1]
    assert np.max(np.abs(back - monic)) <= 1e-8 * np.abs(monic).max()


def test_large_root_residual_is_scaled():
    # a root near -5.18 where |p'| ~ 7e7 leaves |p| ~ 1e-8 at the nearest double
    c = np.array([1, 5, -3, 4, -2, 2, -5, -1, -2, 0, 1, -5, -1], dtype=complex)
    r = univariate_roots(c)
    assert np.min(np.abs(r + 5.1786159545955)) < 1e-10
    back = np.poly(r)[::-1]
    assert np.max(np.abs(back - c / c[-1])) <= 1e-8 * np.abs(c / c[-1]).max()


def _rand_poly(rng, n=2, k=5):
    terms = {tuple(rng.integers(-2, 3, size=n)): complex(*rng.normal(size=2)) for _ in range(k)}
    return LaurentPolynomial(n, terms.items())


@given(st.integers(0, 2**32 - 1))
def test_partial_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    f = _rand_poly(rng)
    z = np.exp(rng.uniform(np.log(0.1), np.log(10), 2) + 1j * rng.uniform(-np.pi, np.pi, 2))
    for i in range(2):
        h = 1e-6 * abs(z[i])
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        fd = (eval_poly(f, zp) - eval_poly(f, zm)) / (2 * h)
        d = partial_derivative(f, i)
        ex = 0 if d is None else eval_poly(d, z)
        scale = max(abs(ex), sum(abs(m.coefficient) * abs(np.prod(z ** np.array(m.exponents))) for m in f.terms) / abs(z[i]))
        assert abs(ex - fd) <= 1e-6 * scale


@given(_cplx.filter(lambda t: abs(t) > 1e-3 and min(abs(t + 0.5), abs(t - 1.5)) > 1e-3))
def test_curve_conjugation(t):
    from amoeba_scope.parsing import parse_curve

    c = parse_curve("3; t; t + 1/2; t - 3/2")
    assert np.allclose(eval_curve(c, np.conj(t)), np.conj(eval_curve(c, t)))


def test_restriction_examples(line, hyperbola):
    r = restrict_to_fiber(line, (0, 0), (0, 0), 1)
    assert np.allclose(r.coeffs, [2, 1])
    r = restrict_to_fiber(hyperbola, (0, 0), (0, 0), 1)
    assert np.allclose(r.coeffs, [7 / 6, 2])


def test_restriction_vanishing_constant(line):
    r = restrict_to_fiber(line, (0, 0), (math.pi, 0), 1)
    assert abs(r.coeffs[0]) < 1e-15 and r.coeffs[1] == 1
    assert r.roots().size == 0  # root at the origin is off-torus


def test_restriction_degenerate():
    f = parse_polynomial("w + z*w")
    with pytest.raises(DegenerateRestriction):
        restrict_to_fiber(f, (0, 0), (math.pi, 0), 1)


@given(st.integers(0, 2**32 - 1))
def test_restriction_roots_lie_on_curve(seed):
    rng = np.random.default_rng(seed)
    f = _rand_poly(rng)
    if not np.any(f.exps[:, 1] != 0):
        return
    x = rng.uniform(-1, 1, 2)
    th = rng.uniform(-np.pi, np.pi, 2)
    try:
        r = restrict_to_fiber(f, x, th, 1)
    except DegenerateRestriction:
        return
    z = math.exp(x[0]) * np.exp(1j * th[0])
    for w in r.roots():
        scale = sum(abs(m.coefficient) * abs(z) ** m.exponents[0] * abs(w) ** m.exponents[1] for m in f.terms)
        assert abs(eval_poly(f, (z, w))) <= 1e-8 * scale


def test_newton_polytopes(line, hyperbola):
    assert sorted(map(tuple, newton_polytope(line).vertices.tolist())) == [(0, 0), (0, 1), (1, 0)]
    assert sorted(map(tuple, newton_polytope(hyperbola).vertices.tolist())) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    seg = newton_polytope(parse_polynomial("z^-1 + z", 1))
    assert sorted(seg.vertices.ravel().tolist()) == [-1, 1]


def test_newton_polytope_drops_edge_points():
    f = parse_polynomial("1 + z + z^2 + w")
    assert sorted(map(tuple, newton_polytope(f).vertices.tolist())) == [(0, 0), (0, 1), (2, 0)]


def _shoelace(pts):
    x, y = np.array(pts, dtype=float).T
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@pytest.mark.parametrize("text, deg", [("1 + z + w", 1), ("1/6 + z + w + z*w", 2), ("1 + z^2 + w", 2)])
def test_gauss_degree(text, deg):
    f = parse_polynomial(text)
    assert gauss_degree(f) == deg
    # independent area oracle on the hand-listed hull
    hulls = {1: [(0, 0), (1, 0), (0, 1)], 2: None}
    if text == "1/6 + z + w + z*w":
        assert 2 * _shoelace([(0, 0), (1, 0), (1, 1), (0, 1)]) == deg
    elif text == "1 + z^2 + w":
        assert 2 * _shoelace([(0, 0), (2, 0), (0, 1)]) == deg
    else:
        assert 2 * _shoelace(hulls[1]) == deg


def test_gauss_degree_three_space():
    assert gauss_degree(parse_polynomial("1 + z1 + z2 + z3", 3)) == 1


def test_gauss_degree_degenerate():
    with pytest.raises(DegeneratePolytope):
        gauss_degree(parse_polynomial("1 + z*w"))


def test_polynomial_immutable(line):
    with pytest.raises(AttributeError):
        line.ambient_dim = 3


def test_poly_eval_horner():
    assert poly_eval(np.array([1, 2, 3], dtype=complex), 2.0) == 17
