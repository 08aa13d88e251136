"""Cost against sample size for a few soft-clause targets.

Writes a CSV (n, cost) per target to stdout, or a plot with --plot out.png
(needs matplotlib, not a package dependency).
"""
import argparse
import csv
import sys

from dsat import ProblemInstance, translate
from dsat.sampler import SamplerConfig, sample


def trace_for(target: float, n: int, seed: int) -> list[float]:
    core = translate(ProblemInstance(2, hard_clauses=[(1, 2)], prob_clauses=[((1,), target), ((-1, 2), 0.5)]))
    res = sample(core, SamplerConfig(epsilon=0.0, min_models=n, max_models=n, seed=seed))
    return res.trace


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-n", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--plot", default=None)
    args = ap.parse_args()
    targets = (0.1, 0.4, 0.75)
    traces = {t: trace_for(t, args.n, args.seed) for t in targets}
    if args.plot:
        import matplotlib.pyplot as plt
        for t, tr in traces.items():
            plt.loglog(range(1, len(tr) + 1), [max(c, 1e-12) for c in tr], label=f"target {t}")
        plt.xlabel("models")
        plt.ylabel("cost")
        plt.legend()
        plt.savefig(args.plot, dpi=120)
        return
    w = csv.writer(sys.stdout)
    w.writerow(["target", "n", "cost"])
    for t, tr in traces.items():
        for i, c in enumerate(tr, start=1):
            w.writerow([t, i, f"{c:.6g}"])


if __name__ == "__main__":
    main()
