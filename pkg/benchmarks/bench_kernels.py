"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per workload with the best-of-``repeat`` time of each
backend and the speed-up.
"""
import argparse
import time
from fractions import Fraction

import numpy as np

from condtest import CondOracle, PiecewiseDistribution
from condtest.kernels import backend
from condtest.support import estimate_support


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def probe_workload(impl, D, sigma, rounds):
    lay = D.layout
    r = int(D.ids_at([D.n - 1])[0])

    def run():
        impl.probe_rounds(np.random.default_rng(0), lay.pos_starts, lay.pos_counts,
                          lay.pos_masses, lay.zero_starts, lay.zero_counts, D.forward, False,
                          1 / sigma, r, 0.0, rounds, 2730, 1.0)
    return run


def grid_workload(impl, q, G):
    pts = np.sort(np.random.default_rng(1).uniform(0, 100, q))
    return lambda: impl.sc_grid_count(pts, 0.5, 100.0, G, True, True)


def estimate_workload(name, D):
    return lambda: estimate_support(CondOracle(D, seed=3), 0.3, 1, backend=name)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = backend("cython"), backend("python")
    uniform = PiecewiseDistribution.uniform(2**20, 1000, relabel_seed=7)
    thirds = [(500, Fraction(1, 1500)), (250, Fraction(1, 750)), (125, Fraction(1, 375))]
    stepped = PiecewiseDistribution(2**20, thirds, relabel_seed=7)
    wide = PiecewiseDistribution.uniform(2**20, 2**12, relabel_seed=5)
    cases = [
        ("probe_rounds uniform 10^4", probe_workload(fast, uniform, 100, 10**4),
         probe_workload(slow, uniform, 100, 10**4)),
        ("probe_rounds 3 pieces 10^4", probe_workload(fast, stepped, 100, 10**4),
         probe_workload(slow, stepped, 100, 10**4)),
        ("sc_grid_count q=64 G=10^5", grid_workload(fast, 64, 10**5),
         grid_workload(slow, 64, 10**5)),
        ("estimate_support n=2^20 w=2^12", estimate_workload("cython", wide),
         estimate_workload("python", wide)),
    ]
    print(f"{'workload':34s} {'cython':>10s} {'python':>10s} {'speed-up':>9s}")
    for name, f, s in cases:
        repeat = 1 if name.startswith("estimate") else args.repeat
        tf, ts = best_of(f, repeat), best_of(s, repeat)
        print(f"{name:34s} {tf * 1e3:9.2f}ms {ts * 1e3:9.2f}ms {ts / tf:8.1f}x")


if __name__ == "__main__":
    main()
