#!/usr/bin/env python3
"""Benchmark the compiled SMO core against the numpy fallback.

Trains the same models with both backends on synthetic two-cluster data
and reports wall time per fit plus the speedup.  Also verifies that the
two backends agree on the solution (they follow identical floating point
trajectories, so the duals should match exactly).

Usage: python benchmarks/bench_smo.py [--sizes 200,400,800] [--repeats 3]
"""

import argparse
import time

import numpy as np

from pacbound import HAVE_EXTENSION, KernelSpec, OURS_LAMBDA, SvmFormulation, train
from pacbound.verify import two_cluster_dataset


def time_fit(ds, kernel, form, backend, repeats, kkt_tol):
    best = float("inf")
    model = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        model = train(ds, kernel, form, backend=backend, kkt_tol=kkt_tol)
        best = min(best, time.perf_counter() - t0)
    return best, model


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="200,400,800,1200")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--c", type=float, default=1.0, help="C-style regularization")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kkt-tol", type=float, default=1e-3)
    args = ap.parse_args()

    if not HAVE_EXTENSION:
        print("compiled backend not built; run `pip install -e .` first")
        return 1

    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'n':>6} {'py (s)':>10} {'cy (s)':>10} {'speedup':>8}  dual match")
    for n in sizes:
        ds = two_cluster_dataset(args.seed, n, separation=1.5)
        kernel = KernelSpec(2.5)
        form = SvmFormulation(OURS_LAMBDA, 1.0 / (args.c * n))
        t_py, m_py = time_fit(ds, kernel, form, "py", args.repeats, args.kkt_tol)
        t_cy, m_cy = time_fit(ds, kernel, form, "cy", args.repeats, args.kkt_tol)
        match = np.array_equal(m_py.alphas, m_cy.alphas)
        print(f"{n:>6} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>8.1f}x  {match}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
