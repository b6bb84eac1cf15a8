"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run:  python benchmarks/kernel_bench.py

The same comparison drives the TYLERSCALE_NO_NUMBA escape hatch: if the
numba path is slower for a target workload (the two paths trade wins
with problem size, since one is BLAS-bound and one is fused), the env
flag selects the numpy implementations without any code change.
"""

import time

import numpy as np

from tylerscale import kernels

SIZES = [(500, 5), (4000, 10), (16000, 10), (16000, 40)]
REPS = 50


def _time(fn, *args):
    fn(*args)  # warm-up (and JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(REPS):
        fn(*args)
    return (time.perf_counter() - t0) / REPS


def main():
    if not kernels.HAS_NUMBA:
        print("numba not installed; only the numpy path is available")
    rng = np.random.default_rng(0)
    print(f"{'n':>6} {'p':>4} {'kernel':<16} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for n, p in SIZES:
        x = rng.standard_normal((n, p))
        x /= np.linalg.norm(x, axis=1)[:, None]
        z = np.eye(p) + 0.1 * np.eye(p)[::-1]
        z = (z + z.T) / 2
        w = rng.uniform(0.5, 2.0, n)
        pairs = [
            ("quad_forms", (x, z), kernels.quad_forms_numpy,
             kernels._quad_forms_njit if kernels.HAS_NUMBA else None),
            ("weighted_scatter", (x, w), kernels.weighted_scatter_numpy,
             kernels._weighted_scatter_njit if kernels.HAS_NUMBA else None),
            ("step_stats", (x, z), kernels.step_stats_numpy,
             kernels._step_stats_njit if kernels.HAS_NUMBA else None),
        ]
        for name, args, ref, jit in pairs:
            t_np = _time(ref, *args)
            if jit is None:
                print(f"{n:>6} {p:>4} {name:<16} {t_np * 1e6:>8.1f}us {'-':>10} {'-':>8}")
                continue
            t_nb = _time(jit, *args)
            print(f"{n:>6} {p:>4} {name:<16} {t_np * 1e6:>8.1f}us {t_nb * 1e6:>8.1f}us "
                  f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
