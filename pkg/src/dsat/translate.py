"""Lowering of probability-annotated clauses to hard clauses plus a cost.

Each soft clause ``(c, p)`` gets a fresh auxiliary atom ``u`` constrained to
be equivalent to ``c``, and contributes the squared error ``(f(u) - p)^2``.
All cost terms are then averaged into a single objective.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import costfn
from .costfn import Expr
from .model import Clause, EmptyMultisetError, ModelMultiset
from .parsers import ProblemInstance


@dataclass
class CoreProblem:
    num_vars: int
    num_original_vars: int
    hard_clauses: list[Clause]
    param_atoms: set[int]
    cost: Expr
    aux_map: dict[int, int] = field(default_factory=dict)
    queries: list[Clause] = field(default_factory=list)

    @property
    def params(self) -> list[int]:
        return sorted(self.param_atoms)


def tseitin_clauses(aux: int, clause: Clause) -> list[Clause]:
    """Clauses encoding ``aux <-> (l1 v ... v lk)``."""
    out = [(-aux, *clause)]
    out.extend((aux, -lit) for lit in clause)
    return out


def translate(instance: ProblemInstance) -> CoreProblem:
    n0 = instance.num_vars
    hard = list(instance.hard_clauses)
    params = set(instance.declared_params)
    terms = list(instance.cost_terms)
    aux_map = {}
    next_var = n0
    for i, (clause, p) in enumerate(instance.prob_clauses):
        if not 0.0 < p < 1.0:
            raise ValueError(f"soft clause {i} has probability {p}; 0 and 1 must be normalized at parse time")
        next_var += 1
        aux_map[i] = next_var
        hard.extend(tseitin_clauses(next_var, clause))
        params.add(next_var)
        terms.append(costfn.squared_error(next_var, p))
    cost = costfn.sum_terms(terms) if terms else costfn.ZERO
    missing = costfn.freq_vars(cost) - params
    if missing:
        raise ValueError(f"cost refers to non-parameter atoms {sorted(missing)}")
    return CoreProblem(
        num_vars=next_var,
        num_original_vars=n0,
        hard_clauses=hard,
        param_atoms=params,
        cost=cost,
        aux_map=aux_map,
        queries=list(instance.queries),
    )


def combined_cost_value(core: CoreProblem, multiset: ModelMultiset) -> float:
    if len(multiset) == 0:
        raise EmptyMultisetError("cost is undefined on an empty multiset")
    return costfn.evaluate(core.cost, multiset.frequencies(core.param_atoms))
