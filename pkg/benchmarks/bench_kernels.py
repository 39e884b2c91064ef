"""Time the numba kernels against their pure-numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both flavours are always importable, so one process measures both.  The
first numba call (compilation or cache load) is excluded from the timings.
Outputs are checked for agreement before timing.
"""

import argparse
import time

import numpy as np

from hetlat import kernels
from hetlat._accel import USE_NUMBA


def _front(rng, n):
    t = np.sort(rng.random(n))
    return np.column_stack([t, 1.0 - t + 0.05 * rng.random(n)])


def cases(rng):
    F2 = rng.random((2000, 2))
    F3 = rng.random((400, 3))
    hv = _front(rng, 5000)
    R = _front(rng, 1000)
    P = _front(rng, 1000)
    n, k = 64, 6
    loci = np.array([[j] + list(rng.choice(np.delete(np.arange(n), j), k, replace=False)) for j in range(n)])
    tables = rng.random((n, 2 ** (k + 1)))
    X = rng.integers(0, 2, size=(2000, n)).astype(np.uint8)
    return {
        "nd_rank 2000x2": (kernels.nd_rank_numba, kernels.nd_rank_numpy, (F2,)),
        "nd_rank 400x3": (kernels.nd_rank_numba, kernels.nd_rank_numpy, (F3,)),
        "hv2d 5000": (kernels.hv2d_numba, kernels.hv2d_numpy, (hv, 1.1, 1.2)),
        "igd 1000x1000": (kernels.igd_distance_numba, kernels.igd_distance_numpy, (R, P)),
        "nk n=64 k=6 x2000": (kernels.nk_evaluate_numba, kernels.nk_evaluate_numpy, (X, loci, tables)),
    }


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not USE_NUMBA:
        print("numba disabled by environment; the 'numba' column runs the plain Python loops")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<22}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, (fast, ref, fargs) in cases(rng).items():
        a, b = fast(*fargs), ref(*fargs)
        if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: flavours disagree")
        t_fast = best_of(fast, fargs, args.repeat)
        t_ref = best_of(ref, fargs, args.repeat)
        print(f"{name:<22}{t_fast:>12.5f}{t_ref:>12.5f}{t_ref / t_fast:>10.1f}x")


if __name__ == "__main__":
    main()
