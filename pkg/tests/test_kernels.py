import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from amoeba_scope import kernels
from amoeba_scope.fibers import angle_grid, plane_setup
from amoeba_scope.parsing import parse_polynomial

needs_numba = pytest.mark.skipif(kernels.numba_backend is None, reason="numba back end disabled")
BACKENDS = [kernels.numpy_backend] + ([kernels.numba_backend] if kernels.numba_backend else [])


def _multiset_close(a, b, tol):
    a, b = list(a), list(b)
    for r in a:
        j = int(np.argmin([abs(r - s) if np.isfinite(s) else np.inf for s in b])) if np.isfinite(r) else None
        if j is None:
            j = next(i for i, s in enumerate(b) if not np.isfinite(s))
        elif abs(r - b[j]) > tol:
            return False
        b.pop(j)
    return True


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_zero_roots_and_degree_drop(backend):
    C = np.array([[0, 0, -1, 0, 1], [-1, 0, 1, 0, 0]], dtype=complex)
    R, status = backend.roots_batch(C, 200)
    assert (status >= 0).all()
    assert _multiset_close(R[0], [0, 0, 1, -1], 1e-12)
    assert np.isinf(R[1]).sum() == 2
    assert _multiset_close(R[1][np.isfinite(R[1])], [1, -1], 1e-12)


_coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@needs_numba
@settings(max_examples=40)
@given(arrays(complex, (8, 6), elements=_coef))
def test_backends_agree_on_roots(C):
    C[:, -1] += 1  # keep the leading coefficient away from the degree-drop cutoff in most rows
    Rn, sn = kernels.numba_backend.roots_batch(C, 200)
    Rp, sp = kernels.numpy_backend.roots_batch(C, 200)
    # numba reports its iteration count on success, numpy reports 0
    assert np.array_equal(np.minimum(sn, 0), np.minimum(sp, 0))
    for a, b, s, row in zip(Rn, Rp, sn, C):
        if s >= 0:
            # compare through the residual rather than raw roots, which are ill-conditioned at clusters
            scale = np.abs(row).sum()
            for roots in (a, b):
                fin = roots[np.isfinite(roots)]
                assert np.all(np.abs(np.polyval(row[::-1], fin)) <= 1e-8 * scale * (1 + np.abs(fin)) ** 5)
            assert np.isfinite(a).sum() == np.isfinite(b).sum()


@needs_numba
@pytest.mark.parametrize("text", ["1 + z + w", "1/6 + z + w + z*w", "1 + z^3 + w^3 + 2*z*w"])
def test_backends_agree_on_raster(text):
    s = plane_setup(parse_polynomial(text, 2))
    c = -3 + 6 * (np.arange(41) + 0.5) / 41
    args = (s.exps, s.coeffs, s.free_axis, c, c, angle_grid(180), s.shift, s.deg, 1e-6)
    assert np.array_equal(kernels.numba_backend.membership_raster(*args),
                          kernels.numpy_backend.membership_raster(*args))


def test_env_flag_selects_numpy():
    env = dict(os.environ, AMOEBA_SCOPE_NUMBA="0")
    code = ("from amoeba_scope import kernels, rasterize_amoeba_2d, parse_polynomial;"
            "g = rasterize_amoeba_2d(parse_polynomial('1 + z + w'), [-3, 3, -3, 3], 21, 90);"
            "print(kernels.BACKEND, kernels.numba_backend is None, g.count())")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, disabled, count = out.stdout.split()
    assert backend == "numpy" and disabled == "True"
    from amoeba_scope import rasterize_amoeba_2d
    assert int(count) == rasterize_amoeba_2d(parse_polynomial("1 + z + w"), [-3, 3, -3, 3], 21, 90).count()
