"""Compare the compiled and numpy integration loops.

Usage::

    python benchmarks/bench_kernels.py [--steps 2000 5000 20000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from ffmisinfo.presets import DEFAULT_INITIAL, preset_params
from ffmisinfo.solvers import Grid, available_backends, integrate


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, nargs="+", default=[2000, 5000, 20000])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=0.9)
    ap.add_argument("--eta", type=float, default=0.95)
    args = ap.parse_args(argv)

    p = preset_params("endemic")
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'kernel':<10}{'steps':>8}" + "".join(f"{b + ' [s]':>14}" for b in backends) + f"{'speedup':>10}")
    for kernel in ("classical", "ffe", "ffp", "ffm"):
        for n in args.steps:
            grid = Grid(0.01, n)
            times = [
                best_of(lambda b=b: integrate(kernel, p, DEFAULT_INITIAL, grid,
                                              args.alpha, args.eta, backend=b), args.repeat)
                for b in backends
            ]
            speed = times[-1] / times[0] if len(times) == 2 else float("nan")
            print(f"{kernel:<10}{n:>8}" + "".join(f"{t:>14.4f}" for t in times) + f"{speed:>10.1f}")


if __name__ == "__main__":
    main()
