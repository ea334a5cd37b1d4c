"""Compiled vs pure-Python kernel timings.

    python3 bench/bench_kernels.py [--repeat 5]

Prints best-of-``repeat`` wall time per call for each kernel and backend,
and the largest output difference between the two.
"""
import argparse
import math
import time

import numpy as np

from cppolab import _pycore
from cppolab.estep import random_problem

try:
    from cppolab import _core
except ImportError:
    _core = None


def best_time(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def gae_case(n=100_000, seed=0):
    rng = np.random.default_rng(seed)
    dones = (rng.random(n) < 0.02).astype(np.float64)
    return rng.standard_normal(n), rng.standard_normal(n + 1), dones


def barrier_cases(count=20, seed=0):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        p = random_problem(rng)
        cases.append((p.A, p.A_c, p.B, p.R, p.b, np.zeros(p.n)))
    return cases


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": _pycore}
    if _core is not None:
        backends["compiled"] = _core
    else:
        print("compiled extension not built; timing the fallback only")

    r, v, d = gae_case()
    cases = barrier_cases()
    results = {}
    for name, mod in backends.items():
        t_gae, g = best_time(lambda: mod.gae(r, v, d, 0.99, 0.97), args.repeat)
        # the zero start is interior whenever the budget is positive
        live = [c for c in cases if c[2] > 0]
        t_bar, sols = best_time(
            lambda: [mod.barrier(A, Ac, B, R, b, v0, 1e-12, 5000)[0] for A, Ac, B, R, b, v0 in live],
            args.repeat)
        results[name] = (g, sols)
        print(f"{name:>9}  gae(1e5 steps) {t_gae * 1e3:9.3f} ms   "
              f"barrier({len(live)} solves) {t_bar * 1e3:9.3f} ms")
    if len(results) == 2:
        (g0, s0), (g1, s1) = results["python"], results["compiled"]
        print(f"max |gae diff| {np.abs(g0 - g1).max():.2e}   "
              f"max |barrier diff| {max(np.abs(a - b).max() for a, b in zip(s0, s1)):.2e}")


if __name__ == "__main__":
    main()
