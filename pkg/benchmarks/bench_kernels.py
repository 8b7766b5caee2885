"""Compare the compiled and pure-Python kernel backends.

Runs each kernel on the same inputs under both backends, checks the outputs
are identical (both consume the same random stream), and reports wall time.

    python3 benchmarks/bench_kernels.py [--trials T] [--n N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from acluster._kernels import OK, backends, get_kernel
from acluster.oracles import make_rng


def time_kernel(name, backend, args_factory):
    args = args_factory()
    krn = get_kernel(name, backend)
    krn(*args_factory())  # warm-up, triggers compilation on the numba path
    t0 = time.perf_counter()
    status = krn(*args)
    dt = time.perf_counter() - t0
    assert status == OK, f"{name}/{backend} returned status {status}"
    return dt, args


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--n", type=int, default=400)
    opts = ap.parse_args()
    trials, n = opts.trials, opts.n

    labels = make_rng(1).integers(0, 4, size=(trials, n)).astype(np.int64)
    small = make_rng(2).integers(0, 3, size=(trials, 10)).astype(np.int64)

    cases = {
        "universal_counts": lambda: (labels, np.zeros(trials, dtype=np.int64)),
        "clique_counts": lambda: (
            labels, np.int64(4), np.zeros(trials, dtype=np.int64)
        ),
        "random_counts": lambda: (
            labels, make_rng(3), np.zeros(trials, dtype=np.int64), np.int64(0)
        ),
        "smalln_runs": lambda: (
            small, np.int64(2), make_rng(4),
            np.zeros(trials, dtype=np.int64), np.zeros(trials, dtype=np.int64),
            np.zeros(trials, dtype=np.int64), np.zeros(trials, dtype=np.int64),
        ),
    }

    avail = backends()
    print(f"backends: {', '.join(avail)}   trials={trials} n={n}")
    header = f"{'kernel':<18}" + "".join(f"{b:>12}" for b in avail) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, factory in cases.items():
        times = {}
        outs = {}
        for b in avail:
            dt, args = time_kernel(name, b, factory)
            times[b] = dt
            outs[b] = [a.copy() for a in args if isinstance(a, np.ndarray)]
        row = f"{name:<18}" + "".join(f"{times[b]:>11.3f}s" for b in avail)
        if len(avail) == 2:
            for a, b in zip(outs["numba"], outs["pure"]):
                assert (a == b).all(), f"{name}: backend outputs differ"
            row += f"{times['pure'] / times['numba']:>9.1f}x"
        print(row)
    if len(avail) == 2:
        print("outputs identical across backends for every kernel")


if __name__ == "__main__":
    main()
