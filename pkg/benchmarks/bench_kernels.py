"""Compare the compiled and pure-Python kernels on identical work.

Usage: python benchmarks/bench_kernels.py [--horizon 2000] [--paths 5] [--repeat 3]

For each policy, both backends replay the same sampled paths. The script
reports the best wall time per path and confirms the revenues agree
exactly.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from nrm_lab import validate_instance
from nrm_lab._backend import compiled_kernels, python_kernels
from nrm_lab.arrivals import sample_path
from nrm_lab.lp import LpProblem, solve_bounded_lp
from nrm_lab.policies import PolicyKind, run_policy

MULTI = {"lambda": [1] * 5, "revenue": [10, 3, 6, 1, 2],
         "bom": [[1, 0, 1, 0, 0], [0, 1, 0, 1, 1], [1, 1, 0, 0, 0], [0, 0, 0, 0, 1]]}


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_lp(compiled, repeat, count=2000):
    rng = np.random.default_rng(0)
    problems = [LpProblem(rng.uniform(0.1, 10, 5), rng.uniform(0, 2, (4, 5)) + 0.01,
                          rng.uniform(0, 3, 4), rng.uniform(0.1, 2, 5)) for _ in range(count)]

    def run(backend):
        return [solve_bounded_lp(p, backend=backend).objective_value for p in problems]

    tp, vp = best_of(lambda: run(python_kernels), repeat)
    tc, vc = best_of(lambda: run(compiled), repeat)
    return tp / count, tc / count, vp == vc


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=float, default=2000.0)
    ap.add_argument("--paths", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    compiled = compiled_kernels()
    if compiled is None:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1

    T = args.horizon
    instances = {
        "two-class b=1": validate_instance({"horizon": T, "lambda": [1, 1], "revenue": [2, 1],
                                            "bom": [[1, 1]], "capacity": [T]}),
        "5x4 network": validate_instance({"horizon": T, "capacity": [T] * 4, **MULTI}),
    }
    print(f"{'workload':<22}{'policy':<7}{'python ms':>11}{'cython ms':>11}{'speedup':>9}  match")
    tp, tc, same = bench_lp(compiled, args.repeat)
    print(f"{'LP solve (5x4)':<22}{'-':<7}{tp * 1e3:>11.4f}{tc * 1e3:>11.4f}{tp / tc:>8.1f}x  {same}")
    for label, inst in instances.items():
        paths = [sample_path(inst, s) for s in range(args.paths)]
        for kind in PolicyKind:
            def run(backend):
                return [run_policy(kind, inst, p, backend=backend).revenue for p in paths]
            tp, rp = best_of(lambda: run(python_kernels), args.repeat)
            tc, rc = best_of(lambda: run(compiled), args.repeat)
            n = len(paths)
            print(f"{label:<22}{kind.value:<7}{tp / n * 1e3:>11.3f}{tc / n * 1e3:>11.3f}"
                  f"{tp / tc:>8.1f}x  {rp == rc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
