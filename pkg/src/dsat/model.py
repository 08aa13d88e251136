"""Propositional core types: literals, clauses, total models and model multisets.

Literals follow the DIMACS convention: variable ``v`` (1-based) is the
positive literal ``v`` and its negation is ``-v``.  Clauses are tuples of
such integers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

Clause = tuple[int, ...]


class ModelError(ValueError):
    """A model is not total over the variables it is checked against."""


class EmptyMultisetError(ValueError):
    """Frequencies and probabilities are undefined on an empty multiset."""


def normalize_clause(literals: Iterable[int]) -> Clause:
    """Drop duplicate literals, keeping first-occurrence order."""
    seen = set()
    out = []
    for lit in literals:
        lit = int(lit)
        if lit == 0:
            raise ValueError("0 is not a literal")
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def is_tautology(clause: Iterable[int]) -> bool:
    lits = set(clause)
    return any(-lit in lits for lit in lits)


def max_var(clauses: Iterable[Iterable[int]]) -> int:
    return max((abs(lit) for c in clauses for lit in c), default=0)


@dataclass(frozen=True, order=True)
class Model:
    """A total assignment over variables ``1..num_vars``.

    Bit ``v - 1`` of ``bits`` holds the truth value of variable ``v``, so two
    equal assignments always hash to the same key.
    """

    num_vars: int
    bits: int

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        if self.bits < 0 or self.bits >> self.num_vars:
            raise ValueError("bits outside the variable range")

    @classmethod
    def from_values(cls, values: Sequence[bool]) -> "Model":
        """Build from ``values[i]`` = truth value of variable ``i + 1``."""
        bits = 0
        for i, val in enumerate(values):
            if val:
                bits |= 1 << i
        return cls(len(values), bits)

    @classmethod
    def from_mapping(cls, assignment: Mapping[int, bool], num_vars: int | None = None) -> "Model":
        n = max(assignment, default=0) if num_vars is None else num_vars
        missing = [v for v in range(1, n + 1) if v not in assignment]
        if missing:
            raise ModelError(f"assignment is not total: variables {missing[:10]} unassigned")
        return cls.from_values([bool(assignment[v]) for v in range(1, n + 1)])

    @classmethod
    def from_literals(cls, literals: Iterable[int], num_vars: int) -> "Model":
        """Build from a complete list of signed literals (one per variable)."""
        values: dict[int, bool] = {}
        for lit in literals:
            v = abs(lit)
            if v in values and values[v] != (lit > 0):
                raise ModelError(f"variable {v} assigned both values")
            values[v] = lit > 0
        return cls.from_mapping(values, num_vars)

    def __getitem__(self, v: int) -> bool:
        if not 1 <= v <= self.num_vars:
            raise ModelError(f"variable {v} outside model range 1..{self.num_vars}")
        return bool(self.bits >> (v - 1) & 1)

    def value(self, lit: int) -> bool:
        return self[abs(lit)] == (lit > 0)

    def literals(self) -> list[int]:
        return [v if self.bits >> (v - 1) & 1 else -v for v in range(1, self.num_vars + 1)]

    def values(self) -> list[bool]:
        return [bool(self.bits >> i & 1) for i in range(self.num_vars)]

    def project(self, num_vars: int) -> "Model":
        """Restrict to variables ``1..num_vars``."""
        if num_vars > self.num_vars:
            raise ModelError("cannot project onto more variables than the model holds")
        return Model(num_vars, self.bits & ((1 << num_vars) - 1))

    def __str__(self):
        return " ".join(map(str, self.literals()))


ModelLike = Union[Model, Mapping[int, bool]]


def _as_model(model: ModelLike, needed: int) -> Model:
    if isinstance(model, Model):
        if model.num_vars < needed:
            raise ModelError(f"model covers {model.num_vars} variables, clauses need {needed}")
        return model
    return Model.from_mapping(model, max(needed, max(model, default=0)))


def check_model(clauses: Iterable[Iterable[int]], model: ModelLike) -> bool:
    """True iff every clause has a literal made true by ``model``.

    Raises ModelError when the model leaves a clause variable unassigned.
    """
    clauses = [tuple(c) for c in clauses]
    m = _as_model(model, max_var(clauses))
    bits = m.bits
    for clause in clauses:
        for lit in clause:
            if (bits >> (abs(lit) - 1) & 1) == (lit > 0):
                break
        else:
            return False
    return True


def clause_holds(clause: Iterable[int], model: Model) -> bool:
    bits = model.bits
    return any((bits >> (abs(lit) - 1) & 1) == (lit > 0) for lit in clause)


class ModelMultiset:
    """Multiset of total models over a fixed variable range.

    Per-variable true-counters are kept up to date by :meth:`add`, so a
    frequency lookup never rescans the entries.
    """

    def __init__(self, num_vars: int, models: Iterable[Model] = ()):
        self.num_vars = num_vars
        self.counts: dict[Model, int] = {}
        self.total = 0
        self._true = [0] * (num_vars + 1)
        for m in models:
            self.add(m)

    def add(self, model: Model, count: int = 1) -> "ModelMultiset":
        if model.num_vars != self.num_vars:
            raise ModelError(f"model over {model.num_vars} variables added to multiset over {self.num_vars}")
        if count < 1:
            raise ValueError("count must be positive")
        self.counts[model] = self.counts.get(model, 0) + count
        self.total += count
        bits = model.bits
        true = self._true
        v = 1
        while bits:
            if bits & 1:
                true[v] += count
            bits >>= 1
            v += 1
        return self

    def __len__(self):
        return self.total

    def __contains__(self, model):
        return model in self.counts

    def __iter__(self) -> Iterator[Model]:
        """Iterate entries with multiplicity, in insertion order of distinct models."""
        for m, c in self.counts.items():
            for _ in range(c):
                yield m

    def __eq__(self, other):
        if not isinstance(other, ModelMultiset):
            return NotImplemented
        return self.num_vars == other.num_vars and self.counts == other.counts

    def __repr__(self):
        return f"ModelMultiset(num_vars={self.num_vars}, N={self.total}, distinct={len(self.counts)})"

    def items(self) -> list[tuple[Model, int]]:
        return list(self.counts.items())

    def true_count(self, v: int) -> int:
        if not 1 <= v <= self.num_vars:
            raise ModelError(f"variable {v} outside 1..{self.num_vars}")
        return self._true[v]

    def frequency(self, v: int) -> float:
        if self.total == 0:
            raise EmptyMultisetError("frequency of an empty multiset is undefined")
        return self.true_count(v) / self.total

    def frequencies(self, variables: Iterable[int]) -> dict[int, float]:
        return {v: self.frequency(v) for v in variables}

    def query_probability(self, query: Iterable[int]) -> float:
        if self.total == 0:
            raise EmptyMultisetError("query probability on an empty multiset is undefined")
        query = tuple(query)
        for lit in query:
            if not 1 <= abs(lit) <= self.num_vars:
                raise ModelError(f"query literal {lit} outside 1..{self.num_vars}")
        hits = sum(c for m, c in self.counts.items() if clause_holds(query, m))
        return hits / self.total

    def probabilities(self) -> dict[Model, float]:
        return {m: c / self.total for m, c in self.counts.items()}

    def union(self, other: "ModelMultiset") -> "ModelMultiset":
        out = self.copy()
        for m, c in other.counts.items():
            out.add(m, c)
        return out

    def copy(self) -> "ModelMultiset":
        out = ModelMultiset(self.num_vars)
        out.counts = dict(self.counts)
        out.total = self.total
        out._true = list(self._true)
        return out

    def project(self, num_vars: int) -> "ModelMultiset":
        """Project every entry onto ``1..num_vars``, merging equal projections."""
        out = ModelMultiset(num_vars)
        for m, c in self.counts.items():
            out.add(m.project(num_vars), c)
        return out


def frequency(multiset: ModelMultiset, v: int) -> float:
    return multiset.frequency(v)


def add_model(multiset: ModelMultiset, model: Model) -> ModelMultiset:
    return multiset.add(model)


def query_probability(multiset: ModelMultiset, query: Iterable[int]) -> float:
    return multiset.query_probability(query)
