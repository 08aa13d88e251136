"""Time the CDCL solver on random 3-CNF around the phase transition.

    python3 scripts/bench_random3sat.py [--vars 100] [--count 50] [--check]

--check compares each verdict with brute-force enumeration (vars <= 24).
"""
import argparse
import random
import statistics
import time

from dsat.cdcl import SolverConfig, solve
from dsat.oracle import is_satisfiable


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--vars", type=int, default=100)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--restarts", choices=("glucose_lbd", "luby"), default="glucose_lbd")
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    n = args.vars
    for ratio in (3.0, 4.26, 5.0):
        times, sat = [], 0
        for _ in range(args.count):
            clauses = [tuple(rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), 3))
                       for _ in range(round(ratio * n))]
            t0 = time.perf_counter()
            model = solve(clauses, n, SolverConfig(restart_policy=args.restarts))
            times.append(time.perf_counter() - t0)
            sat += model is not None
            if args.check:
                assert (model is not None) == is_satisfiable(clauses, n)
        print(f"ratio {ratio:4.2f}: {sat}/{args.count} sat, median {statistics.median(times) * 1000:.1f} ms, "
              f"max {max(times) * 1000:.1f} ms")


if __name__ == "__main__":
    main()
