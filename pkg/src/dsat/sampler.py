"""Gradient-steered multiset sampling.

Models are drawn one at a time.  Before each draw the cost gradient with
respect to every parameter atom frequency is evaluated on the current
multiset; its sign picks the preferred polarity of the atom and its relative
magnitude the branching priority.  Sampling stops once the cost is at most
``epsilon`` and at least ``min_models`` models were drawn.
"""
from __future__ import annotations

import hashlib
import logging
import struct
import threading
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import costfn
from .cdcl import BranchingHints, Cancelled, ResourceLimitError, Solver, SolverConfig
from .model import Model, ModelMultiset
from .translate import CoreProblem, combined_cost_value

log = logging.getLogger(__name__)

FREQ_CLAMP = 1e-9

CONVERGED = "converged"
BUDGET_EXHAUSTED = "budget_exhausted"
UNSAT = "unsat"


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float = 0.01
    min_models: int = 1
    max_models: int = 10000
    bump_scale: float = 10.0
    portfolio_width: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.min_models < 1:
            raise ValueError("min_models must be >= 1")
        if self.min_models > self.max_models:
            raise ValueError("min_models must not exceed max_models")
        if self.portfolio_width < 1:
            raise ValueError("portfolio_width must be >= 1")
        if self.bump_scale < 0:
            raise ValueError("bump_scale must be >= 0")


@dataclass
class SampleResult:
    multiset: ModelMultiset
    final_cost: float
    status: str
    query_answers: dict[int, float] = field(default_factory=dict)
    rounds: int = 0
    # cost after each added model
    trace: list[float] = field(default_factory=list)


@dataclass
class ModelReport:
    model: Model
    count: int
    probability: float


@dataclass
class OutputView:
    status: str
    total: int
    final_cost: float
    models: list[ModelReport]
    query_answers: dict[int, float]


class SamplingInterrupted(ResourceLimitError):
    """A solver call hit its conflict budget; ``partial`` holds the result so far."""

    def __init__(self, cause: ResourceLimitError, partial: SampleResult):
        super().__init__(str(cause), cause.conflicts)
        self.partial = partial


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from integer parts."""
    data = struct.pack(f"<{len(parts)}q", *[p & 0x7FFFFFFFFFFFFFFF for p in parts])
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little") >> 1


def gradient_hints(core: CoreProblem, multiset: ModelMultiset, bump_scale: float,
                   derivatives: Optional[dict[int, costfn.Expr]] = None) -> BranchingHints:
    if derivatives is None:
        derivatives = costfn.gradient(core.cost, core.params)
    freqs = {a: min(max(multiset.frequency(a), FREQ_CLAMP), 1.0 - FREQ_CLAMP) for a in core.params}
    grads = {a: costfn.evaluate(derivatives[a], freqs) for a in core.params}
    scale = max((abs(g) for g in grads.values()), default=0.0)
    hints = BranchingHints()
    if scale == 0:
        return hints
    for a, g in grads.items():
        if g < 0:
            hints.polarity[a] = True
        elif g > 0:
            hints.polarity[a] = False
        if g != 0:
            hints.priority_bump[a] = bump_scale * abs(g) / scale
    return hints


def _make_solvers(core: CoreProblem, width: int, seeds: Sequence[int],
                  solver_config: SolverConfig) -> list[Solver]:
    return [Solver(core.hard_clauses, core.num_vars, replace(solver_config, seed=seeds[w]))
            for w in range(width)]


def portfolio_solve(core: CoreProblem, hints: BranchingHints, width: int, seeds: Sequence[int],
                    solver_config: Optional[SolverConfig] = None,
                    solvers: Optional[list[Solver]] = None,
                    pool: Optional[ThreadPoolExecutor] = None) -> Optional[Model]:
    """Race ``width`` differently seeded solvers; the first verdict wins.

    With ``width == 1`` this is a plain solve.  For wider portfolios the
    returned model depends on thread scheduling.  Returns None on UNSAT.
    ``pool`` lets a caller reuse worker threads across calls.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    if len(seeds) < width:
        raise ValueError("need one seed per portfolio worker")
    if solvers is None:
        solvers = _make_solvers(core, width, seeds, solver_config or SolverConfig())
    if width == 1:
        return solvers[0].solve(hints, seed=seeds[0])

    stop = threading.Event()

    def work(w):
        try:
            return solvers[w].solve(hints, seed=seeds[w], stop=stop)
        finally:
            stop.set()

    own_pool = pool is None
    if own_pool:
        pool = ThreadPoolExecutor(max_workers=width)
    futures = [pool.submit(work, w) for w in range(width)]
    try:
        pending = set(futures)
        while pending:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in futures:
                if fut not in done:
                    continue
                exc = fut.exception()
                if exc is None:
                    return fut.result()
                if not isinstance(exc, Cancelled):
                    raise exc
        raise RuntimeError("every portfolio worker was cancelled")
    finally:
        # losers must be off their solver before it is reused next round
        stop.set()
        wait(futures)
        if own_pool:
            pool.shutdown()


class Sampler:
    """Sampling loop state; keeps solvers (and their learnt clauses) across rounds."""

    def __init__(self, core: CoreProblem, config: Optional[SamplerConfig] = None,
                 solver_config: Optional[SolverConfig] = None):
        self.core = core
        self.config = config or SamplerConfig()
        self.solver_config = solver_config or SolverConfig()
        width = self.config.portfolio_width
        worker_seeds = [derive_seed(self.config.seed, -1, w) for w in range(width)]
        self.solvers = _make_solvers(core, width, worker_seeds, self.solver_config)
        self.derivatives = costfn.gradient(core.cost, core.params)
        self.multiset = ModelMultiset(core.num_vars)
        self._pool: Optional[ThreadPoolExecutor] = None

    def _draw(self, round_index: int, hints: BranchingHints) -> Optional[Model]:
        round_seed = derive_seed(self.config.seed, round_index)
        width = self.config.portfolio_width
        seeds = [round_seed] if width == 1 else [derive_seed(round_seed, w) for w in range(width)]
        return portfolio_solve(self.core, hints, width, seeds, solvers=self.solvers, pool=self._pool)

    def run(self) -> SampleResult:
        if self.config.portfolio_width == 1:
            return self._run()
        with ThreadPoolExecutor(max_workers=self.config.portfolio_width) as pool:
            self._pool = pool
            try:
                return self._run()
            finally:
                self._pool = None

    def _run(self) -> SampleResult:
        cfg = self.config
        ms = self.multiset
        rounds = 0
        cost = float("nan")
        trace: list[float] = []
        try:
            model = self._draw(0, BranchingHints())
            rounds = 1
            if model is None:
                return SampleResult(ms, float("nan"), UNSAT, {}, rounds, trace)
            while True:
                ms.add(model)
                cost = combined_cost_value(self.core, ms)
                trace.append(cost)
                if cost <= cfg.epsilon and len(ms) >= cfg.min_models:
                    status = CONVERGED
                    break
                if len(ms) >= cfg.max_models:
                    status = BUDGET_EXHAUSTED
                    break
                hints = gradient_hints(self.core, ms, cfg.bump_scale, self.derivatives)
                model = self._draw(rounds, hints)
                rounds += 1
                if model is None:
                    raise AssertionError("solver reported UNSAT after a model was found")
        except ResourceLimitError as exc:
            partial = SampleResult(ms, cost, BUDGET_EXHAUSTED, self._answers(ms), rounds, trace)
            raise SamplingInterrupted(exc, partial) from exc
        log.debug("sampling stopped: %s after %d models, cost %.3g", status, len(ms), cost)
        return SampleResult(ms, cost, status, self._answers(ms), rounds, trace)

    def _answers(self, ms: ModelMultiset) -> dict[int, float]:
        if len(ms) == 0:
            return {}
        return {i: ms.query_probability(q) for i, q in enumerate(self.core.queries)}


def sample(core: CoreProblem, sconfig: Optional[SamplerConfig] = None,
           solver_config: Optional[SolverConfig] = None) -> SampleResult:
    return Sampler(core, sconfig, solver_config).run()


def project_and_report(result: SampleResult, original_num_vars: int) -> OutputView:
    if result.status == UNSAT:
        raise ValueError("an unsatisfiable result has no models to report")
    projected = result.multiset.project(original_num_vars)
    n = len(projected)
    models = [ModelReport(m, c, c / n) for m, c in projected.items()]
    models.sort(key=lambda r: (-r.count, r.model.bits))
    answers = dict(result.query_answers)
    return OutputView(result.status, n, result.final_cost, models, answers)
