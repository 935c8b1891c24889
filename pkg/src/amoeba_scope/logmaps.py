"""Coordinatewise log and argument maps, the logarithmic Gauss map, criticality."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    EXCLUDED_PARAM_TOL,
    LaurentPolynomial,
    RationalCurve,
    as_torus_point,
    eval_poly_many,
    gauss_degree,
    log_derivative_terms,
    term_scale,
)
from .errors import ExcludedParameter, SingularPoint, ValidationError

TOL_F = 1e-9
TOL_GAMMA = 1e-8
RANK_RATIO = 1e-6
SINGULAR_RTOL = 1e-12


def as_log_point(x, n: int | None = None) -> np.ndarray:
    """Validate a point of R^n in log coordinates."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if arr.ndim != 1:
        raise ValidationError("log point must be a 1-D sequence")
    if n is not None and arr.size != n:
        raise ValidationError(f"log point has {arr.size} coordinates, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("log point has a non-finite coordinate")
    return arr


def log_map(z) -> np.ndarray:
    """``(log|z_1|, ..., log|z_n|)``; vectorised over leading axes."""
    return np.log(np.abs(np.asarray(z, dtype=np.complex128)))


def normalize_angle(theta):
    """Map angles into (-pi, pi]."""
    r = np.mod(np.asarray(theta, dtype=np.float64) + np.pi, 2 * np.pi)
    r = np.where(r == 0.0, 2 * np.pi, r)
    return r - np.pi


def arg_map(z) -> np.ndarray:
    """Principal arguments in (-pi, pi]; a signed-zero imaginary part never yields -pi."""
    return normalize_angle(np.angle(np.asarray(z, dtype=np.complex128)))


def log_gauss(f: LaurentPolynomial, z) -> np.ndarray:
    """Homogeneous coordinates ``(z_1 df/dz_1, ..., z_n df/dz_n)`` at a single point."""
    z = as_torus_point(z, f.ambient_dim)
    g = log_derivative_terms(f, z)
    if np.abs(g).max() <= SINGULAR_RTOL * term_scale(f, z):
        raise SingularPoint(f"logarithmic Gauss map undefined at {z}")
    return g


def log_gauss_many(f: LaurentPolynomial, Z) -> np.ndarray:
    """Unchecked batch version of :func:`log_gauss`."""
    return log_derivative_terms(f, Z)


def is_real_projective(p, tol: float = TOL_GAMMA) -> bool:
    p = np.asarray(p, dtype=np.complex128)
    mod = np.abs(p)
    if mod.max() <= 1e-14:
        raise ValidationError("not a projective point: all coordinates vanish")
    cross = np.abs(np.imag(p[:, None] * np.conj(p[None, :])))
    return bool(np.all(cross <= tol * mod[:, None] * mod[None, :]))


def phase_defect(gamma) -> np.ndarray:
    """Signed ``Im(g_1 conj g_2) / (|g_1||g_2|)`` of plane-curve Gauss vectors (last axis)."""
    g = np.asarray(gamma, dtype=np.complex128)
    num = np.imag(g[..., 0] * np.conj(g[..., 1]))
    den = np.abs(g[..., 0]) * np.abs(g[..., 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def is_log_critical(f: LaurentPolynomial, z, tol_f: float = TOL_F, tol_gamma: float = TOL_GAMMA) -> bool:
    """On the curve (relative residual ``tol_f``) with a real logarithmic Gauss image."""
    z = as_torus_point(z, f.ambient_dim)
    if abs(eval_poly_many(f, z)) > tol_f * term_scale(f, z):
        return False
    return is_real_projective(log_gauss(f, z), tol_gamma)


@dataclass(frozen=True)
class LogJacobian:
    matrix: np.ndarray  # (n, 2) real
    singular_values: np.ndarray  # descending, length min(n, 2)
    rank: int


def curve_log_jacobian(curve: RationalCurve, t, rank_ratio: float = RANK_RATIO) -> LogJacobian:
    """Real Jacobian of ``Log o rho`` with respect to ``(Re t, Im t)``."""
    t = complex(t)
    if curve.distance_to_excluded(t) <= EXCLUDED_PARAM_TOL:
        raise ExcludedParameter(f"parameter {t} is a zero or pole of the curve")
    ell = curve.log_derivatives(t)
    J = np.stack([ell.real, -ell.imag], axis=-1)
    sv = np.linalg.svd(J, compute_uv=False)
    return LogJacobian(J, sv, _rank(sv, rank_ratio))


def _rank(sv: np.ndarray, ratio: float) -> int:
    if sv[0] == 0.0:
        return 0
    if sv.size < 2:
        return 1
    return 2 if sv[1] > ratio * sv[0] else 1


def curve_log_rank_many(curve: RationalCurve, t, rank_ratio: float = RANK_RATIO) -> np.ndarray:
    """Vectorised Jacobian rank of ``Log o rho`` at parameters ``t`` (not checked for exclusion)."""
    ell = curve.log_derivatives(np.asarray(t, dtype=np.complex128))
    J = np.stack([ell.real, -ell.imag], axis=-1)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv.shape[-1] < 2:
        return np.where(sv[..., 0] > 0, 1, 0)
    return np.where(sv[..., 0] == 0, 0, np.where(sv[..., 1] > rank_ratio * sv[..., 0], 2, 1))


__all__ = [
    "LogJacobian",
    "arg_map",
    "as_log_point",
    "curve_log_jacobian",
    "curve_log_rank_many",
    "gauss_degree",
    "is_log_critical",
    "is_real_projective",
    "log_gauss",
    "log_gauss_many",
    "log_map",
    "normalize_angle",
    "phase_defect",
]
