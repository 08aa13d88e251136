"""Brute-force ground truth for small instances.

Enumeration evaluates every clause over all ``2**n`` assignments at once,
bit-packed into 64-bit words: bit ``k`` of word ``w`` stands for the
assignment with index ``64 * w + k``, and variable ``v`` is bit ``v - 1`` of
that index (the same layout as :class:`dsat.model.Model`).
"""
from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import costfn
from .model import Model

MAX_VARS = 24

# within-word patterns for variables 1..6
_LOW_PATTERNS = [
    0xAAAAAAAAAAAAAAAA,
    0xCCCCCCCCCCCCCCCC,
    0xF0F0F0F0F0F0F0F0,
    0xFF00FF00FF00FF00,
    0xFFFF0000FFFF0000,
    0xFFFFFFFF00000000,
]


class OracleCapError(ValueError):
    pass


class ModelSet:
    """All models of a clause set, ordered by assignment index."""

    def __init__(self, num_vars: int, indices: np.ndarray):
        self.num_vars = num_vars
        self.indices = indices

    def __len__(self):
        return int(self.indices.size)

    def __bool__(self):
        return self.indices.size > 0

    def __iter__(self) -> Iterator[Model]:
        for i in self.indices.tolist():
            yield Model(self.num_vars, i)

    def __contains__(self, model: Model) -> bool:
        k = np.searchsorted(self.indices, model.bits)
        return bool(k < self.indices.size and self.indices[k] == model.bits)

    def models(self) -> list[Model]:
        return list(self)

    def values(self, v: int) -> np.ndarray:
        """Truth value of variable ``v`` in each model, as a bool array."""
        return (self.indices >> np.int64(v - 1)) & 1 == 1

    def project(self, num_vars: int) -> "ModelSet":
        mask = np.int64((1 << num_vars) - 1)
        return ModelSet(num_vars, np.unique(self.indices & mask))


def _columns(num_vars: int) -> list[np.ndarray]:
    words = max(1, (1 << num_vars) // 64)
    cols = [np.empty(0, dtype=np.uint64)]
    widx = np.arange(words, dtype=np.uint64)
    for v in range(1, num_vars + 1):
        if v <= 6:
            cols.append(np.full(words, _LOW_PATTERNS[v - 1], dtype=np.uint64))
        else:
            bit = (widx >> np.uint64(v - 7)) & np.uint64(1)
            cols.append(np.where(bit == 1, np.uint64(0xFFFFFFFFFFFFFFFF), np.uint64(0)))
    return cols


def enumerate_models(clauses: Iterable[Iterable[int]], num_vars: int) -> ModelSet:
    if num_vars > MAX_VARS:
        raise OracleCapError(f"oracle enumeration is capped at {MAX_VARS} variables, got {num_vars}")
    clauses = [tuple(c) for c in clauses]
    for c in clauses:
        for lit in c:
            if lit == 0 or abs(lit) > num_vars:
                raise ValueError(f"literal {lit} outside 1..{num_vars}")
    cols = _columns(num_vars)
    total = 1 << num_vars
    words = cols[1].size if num_vars else 1
    ok = np.full(words, np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    scratch = np.empty(words, dtype=np.uint64)
    for c in clauses:
        scratch.fill(0)
        for lit in c:
            col = cols[abs(lit)]
            if lit > 0:
                np.bitwise_or(scratch, col, out=scratch)
            else:
                np.bitwise_or(scratch, ~col, out=scratch)
        np.bitwise_and(ok, scratch, out=ok)
    bits = np.unpackbits(ok.view(np.uint8), bitorder="little")[:total]
    return ModelSet(num_vars, np.flatnonzero(bits).astype(np.int64))


def count_models(clauses, num_vars: int) -> int:
    return len(enumerate_models(clauses, num_vars))


def is_satisfiable(clauses, num_vars: int) -> bool:
    return bool(enumerate_models(clauses, num_vars))


def _project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(y - theta, 0.0)


def minimize_over_mixtures(cost: costfn.Expr, params: Sequence[int], patterns: np.ndarray,
                           max_iter: int = 2000, tol: float = 1e-12) -> float:
    """Minimize ``cost(frequencies)`` over mixtures of the 0/1 rows of ``patterns``.

    ``patterns[k, j]`` is the value of ``params[j]`` in world ``k``.  Uses
    accelerated projected gradient on the simplex with backtracking.
    """
    params = list(params)
    grads = [costfn.differentiate(cost, a) for a in params]
    m = patterns.shape[0]

    def value(w):
        f = patterns.T @ w
        return costfn.evaluate(cost, dict(zip(params, f.tolist())))

    def grad(w):
        f = dict(zip(params, (patterns.T @ w).tolist()))
        g = np.array([costfn.evaluate(d, f) for d in grads])
        return patterns @ g

    w = np.full(m, 1.0 / m)
    if not params or m == 1:
        return value(w)
    # curvature guess for the mean-of-squares form, refined by backtracking
    k_terms = max(1, len(params))
    step = k_terms / (2.0 * max(1.0, np.linalg.norm(patterns, 2) ** 2))
    z, t = w.copy(), 1.0
    best = fw = value(w)
    for _ in range(max_iter):
        gz = grad(z)
        fz = value(z)
        while True:
            w_new = _project_simplex(z - step * gz)
            d = w_new - z
            f_new = value(w_new)
            if f_new <= fz + gz @ d + (d @ d) / (2 * step) + 1e-15:
                break
            step *= 0.5
        t_new = (1 + math.sqrt(1 + 4 * t * t)) / 2
        z = w_new + ((t - 1) / t_new) * (w_new - w)
        if f_new > fw:
            # restart momentum on non-monotone steps
            z, t_new = w_new.copy(), 1.0
        w, fw, t = w_new, f_new, t_new
        best = min(best, fw)
        if best <= tol or np.linalg.norm(d) < 1e-14:
            break
    return best


def exact_achievable(core, num_vars_cap: int = MAX_VARS) -> float:
    """Infimum of the core cost over all distributions on its models.

    Returns ``math.inf`` when the hard clauses have no model.
    """
    if core.num_vars > num_vars_cap:
        raise OracleCapError(f"oracle is capped at {num_vars_cap} variables, got {core.num_vars}")
    models = enumerate_models(core.hard_clauses, core.num_vars)
    if not models:
        return math.inf
    params = core.params
    if not params:
        return costfn.evaluate(core.cost, {})
    cols = np.stack([models.values(a) for a in params], axis=1)
    patterns = np.unique(cols, axis=0).astype(float)
    return minimize_over_mixtures(core.cost, params, patterns)
