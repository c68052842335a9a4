#!/usr/bin/env python3
"""Benchmark the coincidence kernel: numba @njit loop vs numpy fallback.

Run:  python benchmarks/bench_correlator.py
The numpy path is the one selected by G4VLINES_NUMBA=0.
"""

import time

import numpy as np

from g4vlines._kernels import coincidence_histogram

CASES = [
    # (photons, mean rate 1/ns, bin ns, m_max)
    (100_000, 1e-3, 1.0, 100),
    (400_000, 1e-3, 1.0, 100),
    (1_000_000, 2e-3, 1.0, 200),
]


def poisson_stream(rng, n, rate):
    return np.cumsum(rng.exponential(1.0 / rate, n))


def timed(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def main():
    rng = np.random.default_rng(0)
    # warm up the JIT outside the timed region
    t = poisson_stream(rng, 1000, 1e-3)
    coincidence_histogram(t, t, 1.0, 10, impl="numba")

    print(f"{'photons':>9}  {'pairs':>12}  {'numba':>9}  {'numpy':>9}  {'speedup':>7}")
    for n, rate, bin_width, m_max in CASES:
        a = poisson_stream(rng, n, rate)
        b = poisson_stream(rng, n, rate)
        h_nb, t_nb = timed(lambda: coincidence_histogram(a, b, bin_width, m_max,
                                                         impl="numba"))
        h_np, t_np = timed(lambda: coincidence_histogram(a, b, bin_width, m_max,
                                                         impl="numpy"))
        assert np.array_equal(h_nb, h_np), "implementations disagree"
        pairs = int(h_nb.sum())
        print(f"{n:>9}  {pairs:>12}  {t_nb:>8.3f}s  {t_np:>8.3f}s  "
              f"{t_np / t_nb:>6.1f}x")


if __name__ == "__main__":
    main()
