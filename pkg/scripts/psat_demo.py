"""Realize a small PSAT problem as a model multiset and compare with the exact optimum.

    python3 scripts/psat_demo.py [--epsilon 1e-4] [--seed 0]
"""
import argparse

from dsat import parse, translate
from dsat.oracle import exact_achievable
from dsat.sampler import SamplerConfig, project_and_report, sample

INSTANCE = """\
p pcnf 3 5
1 2 3 0
0.9 1 2 0
0.6 -1 0
0.3 3 0
0.8 -2 -3 0
query 1 0
query 2 3 0
"""


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--epsilon", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    inst = parse(INSTANCE)
    core = translate(inst)
    res = sample(core, SamplerConfig(epsilon=args.epsilon, seed=args.seed))
    view = project_and_report(res, core.num_original_vars)
    print(f"status {res.status}  N={view.total}  cost={res.final_cost:.3g}  "
          f"oracle optimum={exact_achievable(core):.3g}")
    for clause, target in inst.prob_clauses:
        got = res.multiset.query_probability(clause)
        print(f"  P({' v '.join(map(str, clause))}) = {got:.4f}  target {target}")
    for rep in view.models:
        print(f"  {rep.model.literals()}  x{rep.count}  p={rep.probability:.3f}")
    for i, q in enumerate(core.queries):
        print(f"  query {list(q)}: {view.query_answers[i]:.4f}")


if __name__ == "__main__":
    main()
