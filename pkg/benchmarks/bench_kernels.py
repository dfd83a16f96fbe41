"""Numba vs pure-numpy kernels, at kernel level and through the solver.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Compilation happens in a warm-up call and is excluded from the timings.
"""
import argparse
import time

import numpy as np

from trivpid import _kernels
from trivpid.broja import SolverConfig, solve_pid
from trivpid.catalog import make_and, make_dice, make_parallel, random_distribution


def best_of(fn, repeat):
    fn()  # warm-up / JIT compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_rows(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for n, ng in ((64, 16), (1296, 216), (64000, 1600)):
        q = rng.dirichlet(np.ones(n))
        group = rng.integers(0, ng, size=n).astype(np.int64)
        dq = rng.normal(size=n)
        for name in ("objective", "barrier_objective", "gradient", "max_step"):
            timings = {}
            for kern in (_kernels.NUMPY, _kernels.NUMBA):
                f = getattr(kern, name)
                if name == "barrier_objective":
                    call = lambda f=f: [f(q, group, ng, 1e-4) for _ in range(100)]
                elif name == "max_step":
                    call = lambda f=f: [f(q, dq, 0.99) for _ in range(100)]
                else:
                    call = lambda f=f: [f(q, group, ng) for _ in range(100)]
                timings[kern.name] = best_of(call, repeat) / 100
            rows.append((f"{name} n={n}", timings["numpy"], timings["numba"]))
    return rows


def solver_rows(repeat):
    systems = {
        "and(0.5)": make_and(0.5),
        "parallel(.5,.5,.5)": make_parallel(0.5, 0.5, 0.5),
        "dice(0.5, 2)": make_dice(0.5, 2),
        "random 4x6x6": random_distribution(np.random.default_rng(1), (4, 6, 6)),
    }
    rows = []
    for label, d in systems.items():
        t = {b: best_of(lambda b=b: solve_pid(d, "X", SolverConfig(backend=b)), repeat)
             for b in ("numpy", "numba")}
        rows.append((f"solve_pid {label}", t["numpy"], t["numba"]))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.NUMBA is None:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"{'case':<34}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>9}")
    for label, t_np, t_nb in kernel_rows(args.repeat) + solver_rows(args.repeat):
        print(f"{label:<34}{t_np:>12.3e}{t_nb:>12.3e}{t_np / t_nb:>9.2f}")


if __name__ == "__main__":
    main()
