"""Scalar kernels shared by the numba and numpy back ends.

Everything here is written in the numba-compatible subset. Under numba the
helpers are inlined into the njit entry points of ``_numba``; the numpy back
end calls them as ordinary Python for the (rare) refinement steps.

Univariate polynomials are complex arrays of coefficients in ascending
power order. A root "at infinity" (degree drop of a padded polynomial) is
stored as ``inf + 0j``.
"""
import cmath
import math

import numpy as np

from .._accel import jitable

DEGREE_DROP_RTOL = 1e-14
# refine a grid extremum when its value is within this multiple of the local variation
EXTREMUM_FACTOR = 2.0
GOLDEN_ITERS = 80
BISECT_ITERS = 90

KIND_GRID = 0
KIND_CROSSING = 1
KIND_TOUCH = 2

STATUS_DEGENERATE = -1
STATUS_NONCONVERGED = -2

_INVPHI = 0.6180339887498949
_TWO_PI = 2.0 * math.pi


@jitable
def horner2(c, x):
    p = 0j
    dp = 0j
    for k in range(c.shape[0] - 1, -1, -1):
        dp = dp * x + p
        p = p * x + c[k]
    return p, dp


@jitable
def effective_degree(c):
    """Index of the last coefficient above the drop threshold; -1 for the zero polynomial."""
    d = c.shape[0] - 1
    scale = 0.0
    for k in range(d + 1):
        a = abs(c[k])
        if a > scale:
            scale = a
    if scale == 0.0:
        return -1
    while d > 0 and abs(c[d]) <= DEGREE_DROP_RTOL * scale:
        d -= 1
    return d


@jitable
def aberth(c, d, out, maxiter):
    """Aberth-Ehrlich simultaneous iteration on ``c[:d+1]``, Newton polished.

    Returns the iteration count, or STATUS_NONCONVERGED.
    """
    lead = c[d]
    a = np.empty(d + 1, dtype=np.complex128)
    for k in range(d + 1):
        a[k] = c[k] / lead
    absa = np.empty(d + 1, dtype=np.float64)
    for k in range(d + 1):
        absa[k] = abs(a[k])

    bound = 0.0
    for k in range(d):
        r = absa[k] ** (1.0 / (d - k))
        if r > bound:
            bound = r
    if bound == 0.0:
        for k in range(d):
            out[k] = 0j
        return 0
    r0 = absa[0] ** (1.0 / d) if absa[0] > 0.0 else 0.5 * bound
    z = np.empty(d, dtype=np.complex128)
    for k in range(d):
        z[k] = r0 * cmath.exp(1j * (_TWO_PI * k / d + 0.4))
    done = np.zeros(d, dtype=np.bool_)

    eps = 2.220446049250313e-16
    its = 0
    converged = False
    for its in range(1, maxiter + 1):
        remaining = 0
        for i in range(d):
            if done[i]:
                continue
            zi = z[i]
            p, dp = horner2(a, zi)
            # backward-error stop: |p| below rounding level of the evaluation
            mz = abs(zi)
            bnd = 0.0
            for k in range(d, -1, -1):
                bnd = bnd * mz + absa[k]
            if abs(p) <= 16.0 * eps * bnd:
                done[i] = True
                continue
            if dp == 0j:
                z[i] = zi + 1e-7 * (1.0 + mz) * cmath.exp(1j * (0.7 + i))
                remaining += 1
                continue
            ratio = p / dp
            s = 0j
            for j in range(d):
                if j != i:
                    diff = zi - z[j]
                    if diff != 0j:
                        s += 1.0 / diff
            den = 1.0 - ratio * s
            w = ratio / den if den != 0j else ratio
            z[i] = zi - w
            if abs(w) <= 4.0 * eps * abs(z[i]):
                done[i] = True
            else:
                remaining += 1
        if remaining == 0:
            converged = True
            break

    for i in range(d):
        for _ in range(2):
            p, dp = horner2(a, z[i])
            if dp == 0j or p == 0j:
                break
            cand = z[i] - p / dp
            pc, _ = horner2(a, cand)
            if abs(pc) < abs(p):
                z[i] = cand
            else:
                break
        out[i] = z[i]
    if not converged:
        return STATUS_NONCONVERGED
    return its


@jitable
def _solve_core(c, d, out, maxiter):
    if d == 1:
        out[0] = -c[0] / c[1]
        return 0
    if d == 2:
        a2 = c[2]
        b = c[1]
        c0 = c[0]
        disc = cmath.sqrt(b * b - 4.0 * a2 * c0)
        if b.real * disc.real + b.imag * disc.imag < 0.0:
            disc = -disc
        q = -0.5 * (b + disc)
        if q == 0j:
            out[0] = 0j
            out[1] = 0j
        else:
            out[0] = q / a2
            out[1] = c0 / q
        return 0
    return aberth(c, d, out, maxiter)


@jitable
def solve_poly(c, out, maxiter):
    """Roots of ``c`` into ``out`` (length ``len(c) - 1``); missing roots are ``inf``.

    Returns >= 0 on success, STATUS_DEGENERATE for the zero polynomial,
    STATUS_NONCONVERGED when the iteration budget ran out.
    """
    big = complex(np.inf, 0.0)
    for k in range(out.shape[0]):
        out[k] = big
    d = effective_degree(c)
    if d < 0:
        return STATUS_DEGENERATE
    if d == 0:
        return 0
    # exact zero roots are deflated; the iteration's relative stopping tests never fire at the origin
    m = 0
    while m < d and c[m] == 0j:
        out[m] = 0j
        m += 1
    if m == d:
        return 0
    return _solve_core(c[m:], d - m, out[m:], maxiter)


@jitable
def fiber_coeffs(exps, coeffs, free_axis, fixed_log, theta, shift, out):
    """Coefficients (in the free variable) of a plane-curve polynomial on a torus circle.

    The fixed coordinate is ``exp(fixed_log + i*theta)``; ``shift`` clears the
    negative powers of the free variable.
    """
    for k in range(out.shape[0]):
        out[k] = 0j
    fixed = 1 - free_axis
    zf = complex(fixed_log, theta)
    for t in range(coeffs.shape[0]):
        out[exps[t, free_axis] + shift] += coeffs[t] * cmath.exp(exps[t, fixed] * zf)


@jitable
def sorted_logmod(roots, out):
    for k in range(roots.shape[0]):
        r = roots[k]
        if math.isinf(r.real) or math.isinf(r.imag):
            out[k] = np.inf
        else:
            a = abs(r)
            out[k] = math.log(a) if a > 0.0 else -np.inf
    out.sort()


@jitable
def branch_gap(exps, coeffs, free_axis, fixed_log, theta, shift, m, target, cbuf, rbuf, sbuf):
    """Signed log-radius gap of the m-th smallest root modulus at angle ``theta``."""
    fiber_coeffs(exps, coeffs, free_axis, fixed_log, theta, shift, cbuf)
    st = solve_poly(cbuf, rbuf, 200)
    if st == STATUS_DEGENERATE:
        # a full circle of the free variable lies on the curve
        return 0.0
    sorted_logmod(rbuf, sbuf)
    return sbuf[m] - target


@jitable
def _bisect(exps, coeffs, free_axis, fixed_log, shift, m, target, a, ga, b, gb, cbuf, rbuf, sbuf):
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        gm = branch_gap(exps, coeffs, free_axis, fixed_log, mid, shift, m, target, cbuf, rbuf, sbuf)
        if gm == 0.0:
            return mid, gm
        if (gm > 0.0) == (ga > 0.0):
            a = mid
            ga = gm
        else:
            b = mid
            gb = gm
    if abs(ga) <= abs(gb):
        return a, ga
    return b, gb


@jitable
def _golden(exps, coeffs, free_axis, fixed_log, shift, m, target, a, b, sign, cbuf, rbuf, sbuf):
    """Minimise ``sign * gap`` over [a, b]; returns (theta, gap)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = sign * branch_gap(exps, coeffs, free_axis, fixed_log, c, shift, m, target, cbuf, rbuf, sbuf)
    fd = sign * branch_gap(exps, coeffs, free_axis, fixed_log, d, shift, m, target, cbuf, rbuf, sbuf)
    for _ in range(GOLDEN_ITERS):
        if fc <= fd:
            b = d
            d = c
            fd = fc
            c = b - _INVPHI * (b - a)
            fc = sign * branch_gap(exps, coeffs, free_axis, fixed_log, c, shift, m, target, cbuf, rbuf, sbuf)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INVPHI * (b - a)
            fd = sign * branch_gap(exps, coeffs, free_axis, fixed_log, d, shift, m, target, cbuf, rbuf, sbuf)
        if b - a < 1e-14:
            break
    if fc <= fd:
        return c, sign * fc
    return d, sign * fd


@jitable
def wrap_angle(t):
    """Normalise to (-pi, pi]."""
    r = (t + math.pi) % _TWO_PI
    if r == 0.0:
        r = _TWO_PI
    return r - math.pi


@jitable
def nearest_index(theta, thetas):
    M = thetas.shape[0]
    step = _TWO_PI / M
    j = int(round((wrap_angle(theta) - thetas[0]) / step))
    return j % M


@jitable
def fiber_events(S, thetas, exps, coeffs, free_axis, fixed_log, target, shift, tol,
                 refine, first_only, out_k, out_m, out_kind, out_theta):
    """Locate points of one torus fiber from sorted root log-moduli on an angle grid.

    ``S[k, m]`` is the m-th smallest log-modulus of the free coordinate at
    ``thetas[k]``. Emits grid hits (inside the radial band), refined crossings
    of the band between or around grid angles, and refined tangential touches.
    Returns the number of events written.
    """
    M = S.shape[0]
    deg = S.shape[1]
    lo = math.log1p(-tol)
    hi = math.log1p(tol)
    cap = out_k.shape[0]
    n = 0

    hit_angles = 0
    for k in range(M):
        any_hit = False
        for m in range(deg):
            g = S[k, m] - target
            if lo <= g <= hi:
                if n < cap:
                    out_k[n] = k
                    out_m[n] = m
                    out_kind[n] = KIND_GRID
                    out_theta[n] = thetas[k]
                    n += 1
                any_hit = True
                if first_only:
                    return n
        if any_hit:
            hit_angles += 1
    if not refine or hit_angles >= 0.9 * M:
        return n

    cbuf = np.empty(deg + 1, dtype=np.complex128)
    rbuf = np.empty(deg, dtype=np.complex128)
    sbuf = np.empty(deg, dtype=np.float64)
    for m in range(deg):
        for k in range(M):
            k1 = (k + 1) % M
            kp = (k - 1) % M
            ta = thetas[k]
            tb = thetas[k1] if k1 > k else thetas[k1] + _TWO_PI
            tp = thetas[kp] if kp < k else thetas[kp] - _TWO_PI
            ga = S[k, m] - target
            gb = S[k1, m] - target
            gp = S[kp, m] - target

            if (ga > hi and gb < lo) or (ga < lo and gb > hi):
                th, g = _bisect(exps, coeffs, free_axis, fixed_log, shift, m, target,
                                ta, ga, tb, gb, cbuf, rbuf, sbuf)
                if lo <= g <= hi and n < cap:
                    out_k[n] = nearest_index(th, thetas)
                    out_m[n] = m
                    out_kind[n] = KIND_CROSSING
                    out_theta[n] = wrap_angle(th)
                    n += 1
                    if first_only:
                        return n

            if not math.isfinite(ga):
                continue
            sign = 0.0
            if ga > hi and ga <= gp and ga <= gb:
                var = max(gp - ga, gb - ga)
                if ga <= EXTREMUM_FACTOR * var:
                    sign = 1.0
            elif ga < lo and ga >= gp and ga >= gb:
                var = max(ga - gp, ga - gb)
                if -ga <= EXTREMUM_FACTOR * var:
                    sign = -1.0
            if sign == 0.0:
                continue
            th, g = _golden(exps, coeffs, free_axis, fixed_log, shift, m, target,
                            tp, tb, sign, cbuf, rbuf, sbuf)
            if lo <= g <= hi:
                if n < cap:
                    out_k[n] = nearest_index(th, thetas)
                    out_m[n] = m
                    out_kind[n] = KIND_TOUCH
                    out_theta[n] = wrap_angle(th)
                    n += 1
                    if first_only:
                        return n
            elif sign * g < 0.0:
                # the branch dips through the band between grid angles
                gl = branch_gap(exps, coeffs, free_axis, fixed_log, tp, shift, m, target, cbuf, rbuf, sbuf)
                gr = branch_gap(exps, coeffs, free_axis, fixed_log, tb, shift, m, target, cbuf, rbuf, sbuf)
                t1, g1 = _bisect(exps, coeffs, free_axis, fixed_log, shift, m, target,
                                 tp, gl, th, g, cbuf, rbuf, sbuf)
                t2, g2 = _bisect(exps, coeffs, free_axis, fixed_log, shift, m, target,
                                 th, g, tb, gr, cbuf, rbuf, sbuf)
                if lo <= g1 <= hi and n < cap:
                    out_k[n] = nearest_index(t1, thetas)
                    out_m[n] = m
                    out_kind[n] = KIND_CROSSING
                    out_theta[n] = wrap_angle(t1)
                    n += 1
                    if first_only:
                        return n
                if lo <= g2 <= hi and n < cap:
                    out_k[n] = nearest_index(t2, thetas)
                    out_m[n] = m
                    out_kind[n] = KIND_CROSSING
                    out_theta[n] = wrap_angle(t2)
                    n += 1
                    if first_only:
                        return n
    return n


@jitable
def fiber_sorted_grid(exps, coeffs, free_axis, fixed_log, thetas, shift, deg, S):
    """Fill ``S`` with sorted root log-moduli per grid angle; returns a status code."""
    cbuf = np.empty(deg + 1, dtype=np.complex128)
    rbuf = np.empty(deg, dtype=np.complex128)
    sbuf = np.empty(deg, dtype=np.float64)
    worst = 0
    for k in range(thetas.shape[0]):
        fiber_coeffs(exps, coeffs, free_axis, fixed_log, thetas[k], shift, cbuf)
        st = solve_poly(cbuf, rbuf, 200)
        if st == STATUS_DEGENERATE:
            return STATUS_DEGENERATE
        if st == STATUS_NONCONVERGED:
            worst = STATUS_NONCONVERGED
        sorted_logmod(rbuf, sbuf)
        for m in range(deg):
            S[k, m] = sbuf[m]
    return worst
