"""Compare the compiled lattice kernels with the numpy fallback.

    python benchmarks/bench_kernels.py --R 2050
"""
import argparse
import time

import numpy as np

from surfrev import bscurve, kernels
from surfrev.profiles import make_profile


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--R", type=float, default=2050.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    curve = bscurve.build_curve(make_profile({"kind": "ellipsoid", "a": 1.0, "b": 2.0}))
    rho, g = curve.rho_coefficients, curve.g_coefficients
    ncol = int(args.R) + 1
    impls = [("python", kernels.python_impl)]
    if kernels.BACKEND != "python":
        impls.insert(0, (kernels.BACKEND, kernels))

    results = {}
    for name, mod in impls:
        t_cnt, counts = timed(lambda: mod.column_counts(rho, g, args.R, 0, ncol), args.repeat)
        t_fill, xs = timed(lambda: mod.fill_norms(rho, counts, 0), args.repeat)
        results[name] = (counts, xs)
        print(f"{name:>7}: column_counts {t_cnt * 1e3:8.2f} ms   fill_norms {t_fill * 1e3:8.2f} ms"
              f"   ({len(xs)} points)")
    if len(results) == 2:
        (c1, x1), (c2, x2) = results.values()
        same = np.array_equal(c1, c2) and np.array_equal(x1, x2)
        print("backends agree bit for bit:", same)


if __name__ == "__main__":
    main()
