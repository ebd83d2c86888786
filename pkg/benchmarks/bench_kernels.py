"""Time the compiled kernels against the pure-Python reference.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from swarmsteer import _kernels_py as py

try:
    from swarmsteer import _ckernels as cy
except ImportError:
    cy = None

CASES = {
    "frame2_rk4 x10000": lambda k: [k.frame2_rk4(0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 60.0, 0.01, 0.04)
                                    for _ in range(10000)],
    "mmc_reduced_integrate 100k": lambda k: k.mmc_reduced_integrate(500.0, 100.0, 400.0, 0.001,
                                                                    0.001, 100000, False),
    "mmc_reduced_integrate 2500 +proj": lambda k: k.mmc_reduced_integrate(500.0, 100.0, 400.0, 0.001,
                                                                         0.04, 2500, True),
    "mmc_pair_integrate 3000x20": lambda k: k.mmc_pair_integrate(
        [500.0, 0.0, 0.2425, 0.9701, 0.0, 0.0, -0.2425, -0.9701],
        200.0, 200.0, 0.001, 1e-15, 5e10, 0.04, 20, 3000),
    "tva_shape_integrate 10k": lambda k: k.tva_shape_integrate(1000.0, 1.0, 1.5, 60.0, 60.0, 1.0,
                                                               0.001, 10000),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'case':<36} {'python (s)':>11} {'cython (s)':>11} {'speedup':>8}")
    for name, fn in CASES.items():
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        if cy is None:
            print(f"{name:<36} {tp:>11.4f} {'n/a':>11} {'':>8}")
            continue
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        a, b = np.asarray(fn(py)), np.asarray(fn(cy))
        same = "" if np.array_equal(a, b) else "  (outputs differ!)"
        print(f"{name:<36} {tp:>11.4f} {tc:>11.4f} {tp / tc:>7.1f}x{same}")


if __name__ == "__main__":
    main()
