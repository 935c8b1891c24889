"""Compare the numba and numpy kernel back ends.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each case runs once to warm up (numba compiles or loads its cache), then
``--repeat`` times; the best wall time is reported with the speedup and a
check that both back ends agree.
"""
import argparse
import json
import time

import numpy as np

from amoeba_scope import kernels
from amoeba_scope.fibers import angle_grid, plane_setup
from amoeba_scope.parsing import parse_polynomial

CASES = {
    "raster line 101x101 M=360": ("1 + z + w", 101, 360),
    "raster hyperbola 121x121 M=360": ("1/6 + z + w + z*w", 121, 360),
    "raster cubic 61x61 M=360": ("1 + z^3 + w^3 + 2*z*w", 61, 360),
}


def _raster_args(text, res, M):
    s = plane_setup(parse_polynomial(text, 2))
    c = -3 + 6 * (np.arange(res) + 0.5) / res
    return (s.exps, s.coeffs, s.free_axis, c, c, angle_grid(M), s.shift, s.deg, 1e-6)


def _roots_args(K=20000, deg=6, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(K, deg + 1)) + 1j * rng.normal(size=(K, deg + 1))


def _best(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t)
    return min(times), out


def _agree_roots(a, b):
    # compare as multisets per row
    ka = np.sort_complex(a[0])
    kb = np.sort_complex(b[0])
    return float(np.max(np.abs(ka - kb)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args(argv)
    if kernels.numba_backend is None:
        raise SystemExit("numba back end unavailable (numba missing or AMOEBA_SCOPE_NUMBA=0)")
    nb, npb = kernels.numba_backend, kernels.numpy_backend
    rows = []

    C = _roots_args()
    t_nb, r_nb = _best(nb.roots_batch, (C, 200), args.repeat)
    t_np, r_np = _best(npb.roots_batch, (C, 200), args.repeat)
    rows.append({"case": "roots 20000 x degree 6", "numba_s": t_nb, "numpy_s": t_np,
                 "speedup": t_np / t_nb, "max_root_diff": _agree_roots(r_nb, r_np)})

    for name, spec in CASES.items():
        a = _raster_args(*spec)
        t_nb, o_nb = _best(nb.membership_raster, a, args.repeat)
        t_np, o_np = _best(npb.membership_raster, a, args.repeat)
        rows.append({"case": name, "numba_s": t_nb, "numpy_s": t_np, "speedup": t_np / t_nb,
                     "cell_mismatches": int((o_nb != o_np).sum())})

    w = max(len(r["case"]) for r in rows)
    print(f"{'case':<{w}}  {'numba s':>9}  {'numpy s':>9}  {'speedup':>8}  agreement")
    for r in rows:
        agree = r.get("cell_mismatches", r.get("max_root_diff"))
        print(f"{r['case']:<{w}}  {r['numba_s']:9.4f}  {r['numpy_s']:9.4f}  {r['speedup']:8.1f}  {agree}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
