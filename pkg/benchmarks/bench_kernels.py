"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--games N] [--size N] [--repeat N]
"""

import argparse
import time

import numpy as np

from altnash import BimatrixGame, normalize_game
from altnash.simplex_opt import kernels
from altnash.sweep_lab import random_softmax_profile


def workload(n_games, size, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_games):
        G = normalize_game(BimatrixGame(rng.random((size, size)), rng.random((size, size))))
        out.append((G, random_softmax_profile(size, size, rng)))
    return out


def time_pgd(mod, jobs, objective, repeat):
    best = np.inf
    iters = 0
    for _ in range(repeat):
        t0 = time.perf_counter()
        iters = 0
        for G, p in jobs:
            res = mod.pgd_run(G.R, G.C, p.row, p.col, objective, kernels.DIMINISHING,
                              1.0, 5000, 1e-7, 25, 1e-6, 30)
            iters += res[3]
        best = min(best, time.perf_counter() - t0)
    return best, iters


def time_projection(mod, size, calls, repeat):
    v = np.random.default_rng(1).normal(size=(calls, size))
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for row in v:
            mod.project_simplex(row)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--games", type=int, default=5)
    ap.add_argument("--size", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=1)
    args = ap.parse_args()

    found = kernels.backends()
    print(f"backends: {', '.join(found)}; default: {kernels.BACKEND}")
    jobs = workload(args.games, args.size)
    rows = []
    for name, mod in found.items():
        for label, obj in (("max_regret", kernels.MAX_REGRET), ("sum_regret", kernels.SUM_REGRET)):
            t, iters = time_pgd(mod, jobs, obj, args.repeat)
            rows.append((name, f"pgd {label}", t, f"{iters} iterations, {1e6 * t / max(iters, 1):.1f} us/iter"))
        t = time_projection(mod, args.size, 10_000, args.repeat)
        rows.append((name, "projection x10000", t, ""))
    print(f"{'backend':8s} {'kernel':20s} {'seconds':>9s}  notes")
    for name, what, t, note in rows:
        print(f"{name:8s} {what:20s} {t:9.4f}  {note}")
    if "cython" in found:
        base = {what: t for name, what, t, _ in rows if name == "python"}
        for name, what, t, _ in rows:
            if name == "cython":
                print(f"speedup {what}: {base[what] / t:.1f}x")


if __name__ == "__main__":
    main()
