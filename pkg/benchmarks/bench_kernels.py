"""Compare the compiled and pure-numpy kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times a plain Blahut run on a 64-level gray-level kernel and a brute-force
grid enumeration, once per backend, and checks that both agree.
"""
import argparse
import time

import numpy as np

from geninfo import _fallback
from geninfo.experiments import GrayLevelConfig, discrimination_semantics, graylevel_source
from geninfo.rate_fidelity import OUTPUT_FLOOR, payoff_matrix, simplex_grid

try:
    from geninfo import _kernels
except ImportError:
    _kernels = None


def blahut_case():
    alpha, p = graylevel_source(6)
    pm = payoff_matrix(p, discrimination_semantics(alpha, GrayLevelConfig(6, 2.0).width)).values
    s = 1.0
    kernel = np.ascontiguousarray(np.exp2(s * (pm - pm.max(axis=1)[:, None])))
    src = np.ascontiguousarray(p.probs)
    init = np.full(kernel.shape[1], 1.0 / kernel.shape[1])
    # fixed sweep count so both backends do the same work
    return lambda mod: mod.blahut(kernel, src, init, 0.0, 0.0, 2000, OUTPUT_FLOOR)


def grid_case():
    p = np.array([0.3, 0.4, 0.3])
    pm = payoff_matrix(p, [[1, 0.5, 0.1], [0.1, 0.5, 1]]).values
    grid = simplex_grid(2, 60)
    return lambda mod: mod.grid_min_rate(grid, p, pm, 0.3)


def best_of(fn, mod, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(mod)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'case':<8} {'python_s':>10} {'cython_s':>10} {'speedup':>8}")
    for name, fn in (("blahut", blahut_case()), ("grid", grid_case())):
        tp, outp = best_of(fn, _fallback, args.repeat)
        if _kernels is None:
            print(f"{name:<8} {tp:>10.4f} {'-':>10} {'-':>8}")
            continue
        tc, outc = best_of(fn, _kernels, args.repeat)
        # results must agree before the timing means anything
        np.testing.assert_allclose(np.asarray(outp[0]), np.asarray(outc[0]), rtol=1e-9, atol=1e-12)
        print(f"{name:<8} {tp:>10.4f} {tc:>10.4f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
