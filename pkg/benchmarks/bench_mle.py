"""Benchmark the compiled enumeration kernel against the pure-Python twin.

Usage: python benchmarks/bench_mle.py [--sizes 18,5 20,5 22,6 24,6]
"""

import argparse
import math
import time

import numpy as np

import community_sdp._mle_py as py_kernel

try:
    import community_sdp._mle_core as cy_kernel
except ImportError:
    cy_kernel = None


def time_kernel(kernel, L, K, buf, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        count, cands = kernel.enumerate_candidates(L, K, buf)
        best = min(best, time.perf_counter() - t0)
    return best, count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--sizes",
        nargs="*",
        default=["18,5", "20,5", "22,6", "24,6"],
        help="n,K pairs to benchmark",
    )
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'n':>4} {'K':>3} {'subsets':>10} {'python':>10} {'cython':>10} {'speedup':>8}")
    for pair in args.sizes:
        n, K = (int(x) for x in pair.split(","))
        L = rng.standard_normal((n, n))
        L = np.ascontiguousarray((L + L.T) / 2)
        np.fill_diagonal(L, 0)
        buf = 1e-8 * (1 + K * float(np.abs(L).max()))
        t_py, count = time_kernel(py_kernel, L, K, buf)
        if cy_kernel is None:
            print(f"{n:>4} {K:>3} {count:>10} {t_py:>9.3f}s {'absent':>10} {'-':>8}")
            continue
        t_cy, count_cy = time_kernel(cy_kernel, L, K, buf)
        assert count_cy == count
        print(f"{n:>4} {K:>3} {count:>10} {t_py:>9.3f}s {t_cy:>9.4f}s {t_py / t_cy:>7.0f}x")


if __name__ == "__main__":
    main()
