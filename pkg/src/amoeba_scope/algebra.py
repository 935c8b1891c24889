"""Laurent polynomials, rational curves, Newton polytopes and univariate roots.

Univariate polynomials are 1-D complex arrays of coefficients in *ascending*
power order (``c[k]`` multiplies ``t**k``), the numpy.polynomial convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import kernels
from .errors import (
    DegeneratePolytope,
    DegenerateRestriction,
    ExcludedParameter,
    NonConvergence,
    ValidationError,
)

EXCLUDED_PARAM_TOL = 1e-12


@dataclass(frozen=True)
class Monomial:
    exponents: tuple[int, ...]
    coefficient: complex

    def __post_init__(self):
        if self.coefficient == 0:
            raise ValidationError("monomial coefficient must be nonzero")


class LaurentPolynomial:
    """Sparse Laurent polynomial in ``ambient_dim`` variables with complex coefficients.

    Terms with equal exponent vectors are merged on construction and terms
    whose coefficient cancels to exactly zero are dropped. Instances are
    immutable; ``exps`` and ``coeffs`` are read-only numpy views used by the
    kernels.
    """

    __slots__ = ("ambient_dim", "terms", "exps", "coeffs")

    def __init__(self, ambient_dim: int, terms: Iterable[Monomial | tuple]):
        if ambient_dim < 1:
            raise ValidationError("ambient_dim must be positive")
        merged: dict[tuple[int, ...], complex] = {}
        for term in terms:
            if isinstance(term, Monomial):
                e, c = term.exponents, term.coefficient
            else:
                e, c = term
            e = tuple(int(v) for v in e)
            if len(e) != ambient_dim:
                raise ValidationError(
                    f"exponent vector {e} has length {len(e)}, expected {ambient_dim}")
            merged[e] = merged.get(e, 0j) + complex(c)
        items = sorted((e, c) for e, c in merged.items() if c != 0)
        if not items:
            raise ValidationError("polynomial has no terms")
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "terms", tuple(Monomial(e, c) for e, c in items))
        exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), ambient_dim)
        coeffs = np.array([c for _, c in items], dtype=np.complex128)
        exps.flags.writeable = False
        coeffs.flags.writeable = False
        object.__setattr__(self, "exps", exps)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentPolynomial is immutable")

    @classmethod
    def from_dict(cls, mapping: Mapping[tuple[int, ...], complex], ambient_dim: int | None = None):
        if ambient_dim is None:
            ambient_dim = len(next(iter(mapping)))
        return cls(ambient_dim, mapping.items())

    @classmethod
    def parse(cls, text: str, ambient_dim: int | None = None) -> "LaurentPolynomial":
        from .parsing import parse_polynomial

        return parse_polynomial(text, ambient_dim)

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {m.exponents: m.coefficient for m in self.terms}

    def __call__(self, z) -> complex:
        return eval_poly(self, z)

    def __eq__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.terms == other.terms

    def __hash__(self):
        return hash((self.ambient_dim, self.terms))

    def __repr__(self):
        return f"LaurentPolynomial({format_polynomial(self)!r})"

    def _combine(self, other, sign):
        if not isinstance(other, LaurentPolynomial):
            other = LaurentPolynomial(self.ambient_dim, [((0,) * self.ambient_dim, complex(other))])
        if other.ambient_dim != self.ambient_dim:
            raise ValidationError("ambient dimension mismatch")
        terms = list(self.as_dict().items()) + [(e, sign * c) for e, c in other.as_dict().items()]
        return LaurentPolynomial(self.ambient_dim, terms)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return LaurentPolynomial(self.ambient_dim, [(m.exponents, -m.coefficient) for m in self.terms])

    def __mul__(self, other):
        if not isinstance(other, LaurentPolynomial):
            c = complex(other)
            return LaurentPolynomial(self.ambient_dim, [(m.exponents, c * m.coefficient) for m in self.terms])
        if other.ambient_dim != self.ambient_dim:
            raise ValidationError("ambient dimension mismatch")
        out: dict[tuple[int, ...], complex] = {}
        for a in self.terms:
            for b in other.terms:
                e = tuple(x + y for x, y in zip(a.exponents, b.exponents))
                out[e] = out.get(e, 0j) + a.coefficient * b.coefficient
        return LaurentPolynomial(self.ambient_dim, out.items())

    __rmul__ = __mul__

    def degree_range(self, axis: int) -> tuple[int, int]:
        col = self.exps[:, axis]
        return int(col.min()), int(col.max())


def format_polynomial(f: LaurentPolynomial) -> str:
    names = ["z", "w"] if f.ambient_dim == 2 else [f"z{i + 1}" for i in range(f.ambient_dim)]
    parts = []
    for m in f.terms:
        c = m.coefficient
        coeff = f"{c.real:.17g}" if c.imag == 0 else f"({c.real:.17g}{c.imag:+.17g}i)"
        factors = []
        for name, e in zip(names, m.exponents):
            if e == 1:
                factors.append(name)
            elif e != 0:
                factors.append(f"{name}^{e}")
        if not factors or c != 1:
            factors.insert(0, coeff)
        parts.append("*".join(factors))
    return " + ".join(parts)


def as_torus_point(z, n: int | None = None) -> np.ndarray:
    """Validate and return a point of the complex torus as a complex array."""
    arr = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if arr.ndim != 1:
        raise ValidationError("torus point must be a 1-D sequence")
    if n is not None and arr.size != n:
        raise ValidationError(f"torus point has {arr.size} coordinates, expected {n}")
    if np.any(arr == 0):
        raise ValidationError("torus point has a zero coordinate")
    return arr


def _monomials(f: LaurentPolynomial, z: np.ndarray) -> np.ndarray:
    """Term values ``c_k * z**e_k``; ``z`` may carry leading batch axes."""
    z = np.asarray(z, dtype=np.complex128)
    return f.coeffs * np.prod(z[..., None, :] ** f.exps, axis=-1)


def eval_poly(f: LaurentPolynomial, z) -> complex:
    z = as_torus_point(z)
    if z.size != f.ambient_dim:
        raise ValidationError(f"point has dimension {z.size}, polynomial has {f.ambient_dim}")
    return complex(_monomials(f, z).sum())


def eval_poly_many(f: LaurentPolynomial, Z) -> np.ndarray:
    """Evaluate at each row of ``Z`` (shape ``(..., n)``)."""
    Z = np.asarray(Z, dtype=np.complex128)
    if Z.shape[-1] != f.ambient_dim:
        raise ValidationError("dimension mismatch")
    return _monomials(f, Z).sum(axis=-1)


def term_scale(f: LaurentPolynomial, z):
    """Largest term magnitude at ``z``; the natural scale for residuals of ``f``."""
    return np.abs(_monomials(f, np.asarray(z, dtype=np.complex128))).max(axis=-1)


def partial_derivative(f: LaurentPolynomial, i: int) -> LaurentPolynomial | None:
    """Formal derivative in variable ``i`` (0-based).

    Returns ``None`` when the derivative is identically zero.
    """
    if not 0 <= i < f.ambient_dim:
        raise ValidationError(f"axis {i} out of range for dimension {f.ambient_dim}")
    terms = []
    for m in f.terms:
        e = m.exponents[i]
        if e == 0:
            continue
        ex = list(m.exponents)
        ex[i] -= 1
        terms.append((tuple(ex), e * m.coefficient))
    if not terms:
        return None
    return LaurentPolynomial(f.ambient_dim, terms)


def log_derivative_terms(f: LaurentPolynomial, z) -> np.ndarray:
    """``z_i * df/dz_i`` for every axis, vectorised over leading axes of ``z``."""
    mono = _monomials(f, z)
    return mono @ f.exps.astype(np.complex128)


# ---------------------------------------------------------------------------
# univariate polynomials


def poly_eval(c: np.ndarray, t):
    """Horner evaluation of ascending coefficients at scalar or array ``t``."""
    t = np.asarray(t, dtype=np.complex128)
    acc = np.zeros_like(t)
    for coef in c[::-1]:
        acc = acc * t + coef
    return acc


def poly_deriv(c: np.ndarray) -> np.ndarray:
    if c.size <= 1:
        return np.zeros(1, dtype=np.complex128)
    return c[1:] * np.arange(1, c.size)


def trim_poly(c, tol: float = 0.0) -> np.ndarray:
    c = np.asarray(c, dtype=np.complex128)
    scale = np.abs(c).max() if c.size else 0.0
    n = c.size
    while n > 1 and abs(c[n - 1]) <= tol * scale:
        n -= 1
    return c[:n].copy()


def canonical_order(roots: np.ndarray) -> np.ndarray:
    """Lexicographic by real then imaginary part, robust to rounding noise in the real part."""
    roots = np.asarray(roots, dtype=np.complex128)
    key_re = np.round(roots.real, 9)
    order = np.lexsort((roots.imag, key_re))
    return roots[order]


def univariate_roots(p, tol: float = 1e-9, maxiter: int = 200) -> np.ndarray:
    """All roots of ``p`` by Aberth-Ehrlich simultaneous iteration with Newton polishing.

    Parameters
    ----------
    p : array_like
        Ascending complex coefficients; degree >= 1 with ``|p[-1]| > tol``.
    tol : float
        Residual contract: ``|p(root)| <= tol * (1 + max|p_k|)`` for every root
        with ``|root| <= 1``; outside the unit disk the same bound applies to the
        reversed polynomial at ``1/root``, i.e. the residual is divided by
        ``|root|**deg``.
    maxiter : int
        Iteration budget of the simultaneous iteration.

    Returns
    -------
    numpy.ndarray
        The ``deg(p)`` roots in canonical order.

    Raises
    ------
    NonConvergence
        When the iteration budget runs out or a residual exceeds the contract.
    """
    c = np.asarray(p, dtype=np.complex128).ravel()
    if c.size < 2:
        raise ValidationError("univariate_roots needs degree >= 1")
    if abs(c[-1]) <= tol:
        raise ValidationError("leading coefficient is below tolerance")
    R, status = kernels.roots_batch(c[None, :], maxiter)
    roots = R[0]
    if status[0] < 0 or not np.all(np.isfinite(roots)):
        raise NonConvergence(f"root iteration did not converge within {maxiter} steps")
    bound = tol * (1.0 + np.abs(c).max())
    # large roots: double rounding alone puts |p| near eps * |p'(r)| * |r|
    resid = np.abs(poly_eval(c, roots)) / np.maximum(1.0, np.abs(roots)) ** (c.size - 1)
    if np.any(resid > bound):
        raise NonConvergence(f"root residual {resid.max():.3g} exceeds {bound:.3g}")
    return canonical_order(roots)


# ---------------------------------------------------------------------------
# restriction to torus fibers


@dataclass(frozen=True)
class FiberPolynomial:
    """Univariate polynomial in the free coordinate on a torus fiber.

    ``coeffs[k]`` multiplies ``u**(k - shift)`` of the original Laurent
    polynomial, i.e. the restriction was multiplied by ``u**shift``.
    """

    coeffs: np.ndarray
    shift: int
    free_axis: int

    def roots(self, tol: float = 1e-9) -> np.ndarray:
        """Roots on the torus (nonzero, finite); roots introduced by clearing are dropped."""
        c = trim_poly(self.coeffs, 1e-14)
        if c.size < 2:
            return np.zeros(0, dtype=np.complex128)
        R, status = kernels.roots_batch(c[None, :], 200)
        if status[0] < 0:
            raise NonConvergence("fiber root iteration failed")
        r = R[0]
        scale = max(1.0, float(np.abs(r[np.isfinite(r)]).max(initial=0.0)))
        r = r[np.isfinite(r) & (np.abs(r) > 1e-12 * scale)]
        return canonical_order(r)


def restrict_to_fiber(f: LaurentPolynomial, x, theta, free_axis: int, tol: float = 1e-12) -> FiberPolynomial:
    """Substitute ``z_j = exp(x_j + i*theta_j)`` for every ``j != free_axis``.

    ``x`` and ``theta`` have length ``n``; their entries at ``free_axis`` are ignored.
    """
    n = f.ambient_dim
    x = np.asarray(x, dtype=np.float64).ravel()
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if x.size != n or theta.size != n:
        raise ValidationError(f"log point and angles must have length {n}")
    if not 0 <= free_axis < n:
        raise ValidationError("free_axis out of range")
    e_free = f.exps[:, free_axis]
    if not np.any(e_free != 0):
        raise ValidationError("polynomial does not involve the free variable")
    lo, hi = int(e_free.min()), int(e_free.max())
    shift = -lo
    mask = np.ones(n, dtype=bool)
    mask[free_axis] = False
    logz = x[mask] + 1j * theta[mask]
    vals = f.coeffs * np.exp(f.exps[:, mask] @ logz)
    coeffs = np.zeros(hi - lo + 1, dtype=np.complex128)
    np.add.at(coeffs, e_free + shift, vals)
    scale = np.abs(vals).max()
    if np.all(np.abs(coeffs) <= tol * scale):
        raise DegenerateRestriction("restricted polynomial vanishes identically")
    return FiberPolynomial(coeffs, shift, free_axis)


# ---------------------------------------------------------------------------
# rational curves


@dataclass(frozen=True)
class RationalCurve:
    """Curve ``t -> (num_k(t) / den_k(t))_k`` in the torus.

    ``components`` holds ``(numerator, denominator)`` pairs of ascending
    coefficient arrays. ``excluded_params`` lists every root of every
    numerator and denominator.
    """

    components: tuple[tuple[np.ndarray, np.ndarray], ...]
    excluded_params: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        comps = []
        excluded = []
        for num, den in self.components:
            num = trim_poly(num, 0.0)
            den = trim_poly(den, 0.0)
            if not np.any(num != 0):
                raise ValidationError("curve component is identically zero")
            if not np.any(den != 0):
                raise ValidationError("curve denominator is identically zero")
            for part in (num, den):
                if part.size > 1:
                    excluded.extend(univariate_roots(part))
            comps.append((num, den))
        object.__setattr__(self, "components", tuple(comps))
        ex = canonical_order(np.array(excluded, dtype=np.complex128))
        # merge duplicates (e.g. a shared zero of two components)
        uniq: list[complex] = []
        for e in ex:
            if all(abs(e - u) > 1e-9 * (1 + abs(u)) for u in uniq):
                uniq.append(e)
        object.__setattr__(self, "excluded_params", np.array(uniq, dtype=np.complex128))

    @classmethod
    def from_polys(cls, comps: Sequence) -> "RationalCurve":
        pairs = []
        for comp in comps:
            if isinstance(comp, tuple):
                num, den = comp
            else:
                num, den = comp, [1.0]
            pairs.append((np.asarray(num, dtype=np.complex128), np.asarray(den, dtype=np.complex128)))
        return cls(tuple(pairs))

    @classmethod
    def parse(cls, text: str) -> "RationalCurve":
        from .parsing import parse_curve

        return parse_curve(text)

    @property
    def ambient_dim(self) -> int:
        return len(self.components)

    def is_real(self) -> bool:
        return all(not np.any(np.iscomplex(p)) for pair in self.components for p in pair)

    def distance_to_excluded(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.complex128)
        if self.excluded_params.size == 0:
            return np.full(t.shape, np.inf)
        return np.abs(t[..., None] - self.excluded_params).min(axis=-1)

    def __call__(self, t) -> np.ndarray:
        return eval_curve(self, t)

    def eval_many(self, t) -> np.ndarray:
        """Unchecked vectorised evaluation; shape ``t.shape + (n,)``."""
        t = np.asarray(t, dtype=np.complex128)
        return np.stack([poly_eval(num, t) / poly_eval(den, t) for num, den in self.components], axis=-1)

    def log_derivatives(self, t) -> np.ndarray:
        """``rho_k'(t) / rho_k(t)`` for each component, vectorised over ``t``."""
        t = np.asarray(t, dtype=np.complex128)
        out = []
        for num, den in self.components:
            out.append(poly_eval(poly_deriv(num), t) / poly_eval(num, t)
                       - poly_eval(poly_deriv(den), t) / poly_eval(den, t))
        return np.stack(out, axis=-1)


def eval_curve(curve: RationalCurve, t: complex) -> np.ndarray:
    t = complex(t)
    if curve.distance_to_excluded(t) <= EXCLUDED_PARAM_TOL:
        raise ExcludedParameter(f"parameter {t} is a zero or pole of the curve")
    return curve.eval_many(t)


# ---------------------------------------------------------------------------
# Newton polytopes


@dataclass(frozen=True)
class NewtonPolytope:
    vertices: np.ndarray  # (k, n) integer lattice points, extreme points only
    dimension: int  # affine dimension of the hull

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    def volume(self) -> float:
        n = self.ambient_dim
        if self.dimension < n:
            return 0.0
        if n == 1:
            return float(self.vertices.max() - self.vertices.min())
        if n == 2:
            v = self.vertices.astype(np.float64)
            x, y = v[:, 0], v[:, 1]
            return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
        return float(ConvexHull(self.vertices.astype(np.float64)).volume)


def _hull_2d(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; strict turns only, counter-clockwise."""
    pts = sorted(set(map(tuple, points.tolist())))
    if len(pts) <= 2:
        return np.array(pts, dtype=np.int64)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.int64)


def newton_polytope(f: LaurentPolynomial) -> NewtonPolytope:
    pts = np.unique(f.exps, axis=0)
    n = f.ambient_dim
    centred = pts - pts[0]
    dim = int(np.linalg.matrix_rank(centred.astype(np.float64))) if len(pts) > 1 else 0
    if n == 1 or dim <= 1:
        # extreme points along the affine line (or the single point)
        if len(pts) == 1:
            return NewtonPolytope(pts, 0)
        direction = centred[np.argmax(np.abs(centred).sum(axis=1))]
        proj = centred @ direction
        verts = pts[[int(np.argmin(proj)), int(np.argmax(proj))]]
        return NewtonPolytope(verts, 1)
    if n == 2:
        return NewtonPolytope(_hull_2d(pts), 2)
    if dim < n:
        # hull inside the affine span, via an orthonormal basis of it
        _, _, vt = np.linalg.svd(centred.astype(np.float64))
        coords = centred @ vt[:dim].T
        idx = ConvexHull(coords).vertices
        return NewtonPolytope(pts[np.sort(idx)], dim)
    try:
        hull = ConvexHull(pts.astype(np.float64))
    except QhullError as exc:  # pragma: no cover - rank check above should prevent it
        raise DegeneratePolytope(str(exc)) from exc
    return NewtonPolytope(pts[np.sort(hull.vertices)], n)


def gauss_degree(f: LaurentPolynomial) -> int:
    """``n! * Vol(Newton polytope)``, the degree of the logarithmic Gauss map."""
    poly = newton_polytope(f)
    if poly.dimension < f.ambient_dim:
        raise DegeneratePolytope("Newton polytope is not full-dimensional")
    return int(round(math.factorial(f.ambient_dim) * poly.volume()))
