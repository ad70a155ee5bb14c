"""Timing comparison of the compiled projection kernels against the numpy
fallback.

The Newton root-finder runs a handful of O(d) constraint evaluations per
projection step; this script measures both backends across dimensions and
reports per-solve times plus the speedup. Run from the repository root:

    python3 benchmarks/bench_projection_kernels.py
"""

import time

import numpy as np

from lcdopt import _projection_kernels_py as pyk

try:
    from lcdopt import _projection_kernels as cyk
except ImportError:
    cyk = None


def make_instances(d, n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        D = np.ascontiguousarray(rng.uniform(0.0, 4.0, size=d))
        D[rng.random(d) < 0.3] = 0.0
        gt = rng.standard_normal(d)
        g2 = np.ascontiguousarray(gt * gt)
        cap = np.inf
        if np.all(D > 0):
            cap = 0.5 * float(np.sum(g2 / D))
        delta = float(rng.uniform(0.1, 0.9)) * min(cap, 2.0 * float(np.sum(g2)))
        out.append((g2, D, delta))
    return out


def bench(kernel, instances, repeats):
    t0 = time.perf_counter()
    total_iters = 0
    for _ in range(repeats):
        for g2, D, delta in instances:
            tol = 1e-12 * max(1.0, delta)
            _, iters, _ = kernel.newton_beta(g2, D, delta, tol, 100)
            total_iters += iters
    elapsed = time.perf_counter() - t0
    per_solve = elapsed / (repeats * len(instances))
    return per_solve, total_iters


def main():
    print(f"{'d':>6} {'python (us)':>12} {'cython (us)':>12} {'speedup':>8}")
    for d in (4, 16, 64, 256, 1024):
        n = 200
        repeats = max(1, 2000 // n)
        instances = make_instances(d, n)
        t_py, _ = bench(pyk, instances, repeats)
        if cyk is None:
            print(f"{d:>6} {t_py * 1e6:>12.2f} {'n/a':>12} {'n/a':>8}")
            continue
        t_cy, _ = bench(cyk, instances, repeats)
        print(f"{d:>6} {t_py * 1e6:>12.2f} {t_cy * 1e6:>12.2f} "
              f"{t_py / t_cy:>8.1f}x")
    if cyk is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
