"""Benchmark the hot metric kernels: numba against the pure-numpy fallback.

The numba path is what normal installs run; DENSEAMALGAM_DISABLE_NUMBA=1
selects the numpy path.  This script times both on the same inputs without
touching the environment, by calling the implementation functions directly.

Usage: python benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeats 5]
"""

import argparse
import statistics
import time

import numpy as np

from denseamalgam import _kernels


def random_premetric(rng, n):
    # symmetric, zero diagonal, not necessarily triangle-tight
    raw = rng.random((n, n))
    dist = raw + raw.T
    np.fill_diagonal(dist, 0.0)
    return dist


def time_call(fn, arg, repeats):
    samples = []
    for _ in range(repeats):
        work = arg.copy()
        t0 = time.perf_counter()
        fn(work)
        samples.append(time.perf_counter() - t0)
    return min(samples), statistics.median(samples)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[64, 128, 256, 512])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not _kernels.numba_available():
        print("numba is not importable; only the numpy path is timed")
    rng = np.random.default_rng(args.seed)

    pairs = [("floyd_warshall", _kernels.floyd_warshall_numpy,
              getattr(_kernels, "_floyd_warshall_jit", None)),
             ("max_triangle_violation", _kernels.max_triangle_violation_numpy,
              getattr(_kernels, "_max_triangle_violation_jit", None))]

    header = f"{'kernel':<24} {'n':>5} {'numpy':>12} {'numba':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, numpy_fn, jit_fn in pairs:
        if jit_fn is not None:
            jit_fn(random_premetric(rng, 8).copy())  # compile outside timing
        for n in args.sizes:
            dist = random_premetric(rng, n)
            np_best, _ = time_call(numpy_fn, dist, args.repeats)
            if jit_fn is None:
                print(f"{name:<24} {n:>5} {np_best * 1e3:>10.2f}ms "
                      f"{'-':>12} {'-':>8}")
                continue
            jit_best, _ = time_call(jit_fn, dist, args.repeats)
            speedup = np_best / jit_best if jit_best > 0 else float("inf")
            print(f"{name:<24} {n:>5} {np_best * 1e3:>10.2f}ms "
                  f"{jit_best * 1e3:>10.2f}ms {speedup:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
