"""Complete CDCL SAT solver with a branching-hint channel.

Two watched literals, first-UIP learning with recursive minimization,
EVSIDS branching with phase saving, glucose-style (LBD) or Luby restarts,
periodic rephasing and LBD/activity-based learnt clause deletion.

Hints never touch soundness: they only seed saved phases and add to
branching activity.
"""
from __future__ import annotations

import heapq
import random
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .model import Model, check_model, is_tautology, max_var, normalize_clause


class ResourceLimitError(RuntimeError):
    """The conflict budget ran out before a verdict was reached."""

    def __init__(self, message: str, conflicts: int):
        super().__init__(message)
        self.conflicts = conflicts


class Cancelled(RuntimeError):
    pass


class SolverInvariantError(AssertionError):
    """The solver produced a model that does not satisfy its clauses."""


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    restart_policy: str = "glucose_lbd"
    var_decay: float = 0.95
    clause_decay: float = 0.999
    # learnt clause database
    max_learnts: int = 2000
    learnts_growth: float = 1.1
    reduce_interval: int = 2000
    glue_lbd: int = 3
    rephase_interval: int = 10000
    luby_unit: int = 100
    max_conflicts: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.var_decay < 1.0:
            raise ValueError("var_decay must lie in (0, 1)")
        if self.rephase_interval < 1:
            raise ValueError("rephase_interval must be >= 1")
        if self.restart_policy not in ("glucose_lbd", "luby"):
            raise ValueError(f"unknown restart policy {self.restart_policy!r}")


@dataclass
class BranchingHints:
    polarity: dict[int, bool] = field(default_factory=dict)
    priority_bump: dict[int, float] = field(default_factory=dict)

    def validate(self, num_vars: int) -> None:
        for v in list(self.polarity) + list(self.priority_bump):
            if not 1 <= v <= num_vars:
                raise ValueError(f"hint for variable {v} outside 1..{num_vars}")
        for v, b in self.priority_bump.items():
            if b < 0:
                raise ValueError(f"negative priority bump {b} for variable {v}")

    def __bool__(self):
        return bool(self.polarity or self.priority_bump)


def luby(i: int) -> int:
    """The i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i %= size
    return 1 << seq


class _Clause:
    __slots__ = ("lits", "learnt", "lbd", "activity", "deleted")

    def __init__(self, lits: list[int], learnt: bool = False, lbd: int = 0):
        self.lits = lits
        self.learnt = learnt
        self.lbd = lbd
        self.activity = 0.0
        self.deleted = False


# internal literal encoding: variable v -> 2v (positive) / 2v + 1 (negative)
def _enc(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


class Solver:
    """Reusable solver: learnt clauses and activities persist across calls."""

    def __init__(self, clauses: Iterable[Iterable[int]], num_vars: Optional[int] = None,
                 config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.original = [tuple(c) for c in clauses]
        n = max_var(self.original) if num_vars is None else num_vars
        if max_var(self.original) > n:
            raise ValueError(f"clause variable exceeds num_vars={n}")
        self.num_vars = n
        self.rng = random.Random(self.config.seed)

        self.val = [0] * (2 * n + 2)  # per literal: 1 true, -1 false, 0 unassigned
        self.level = [0] * (n + 1)
        self.reason: list[Optional[_Clause]] = [None] * (n + 1)
        self.phase = [False] * (n + 1)
        # tiny seeded jitter so differently seeded solvers branch differently
        self.activity = [0.0] + [self.rng.random() * 1e-5 for _ in range(n)]
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.watches: list[list[_Clause]] = [[] for _ in range(2 * n + 2)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[_Clause] = []
        self.learnts: list[_Clause] = []
        self.heap: list[tuple[float, int]] = [(-self.activity[v], v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        self.seen = [0] * (n + 1)

        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.restarts = 0
        self.max_learnts = self.config.max_learnts
        self.next_reduce = self.config.reduce_interval
        self.next_rephase = self.config.rephase_interval
        self.lbd_queue: deque[int] = deque(maxlen=50)
        self.lbd_queue_sum = 0
        self.lbd_total = 0
        self.trail_queue: deque[int] = deque(maxlen=5000)
        self.trail_queue_sum = 0
        self.luby_index = 0
        self.luby_budget = luby(0) * self.config.luby_unit

        self.ok = True
        for c in self.original:
            if not self._add_input_clause(c):
                self.ok = False
                break
        if self.ok and self._propagate() is not None:
            self.ok = False

    # -- clause database -----------------------------------------------------

    def _add_input_clause(self, clause: Sequence[int]) -> bool:
        lits = normalize_clause(clause)
        if is_tautology(lits):
            return True
        enc = []
        for lit in lits:
            e = _enc(lit)
            if self.val[e] == 1:
                return True
            if self.val[e] == 0:
                enc.append(e)
        if not enc:
            return False
        if len(enc) == 1:
            self._enqueue(enc[0], None)
            return True
        c = _Clause(enc)
        self.clauses.append(c)
        self.watches[enc[0]].append(c)
        self.watches[enc[1]].append(c)
        return True

    # -- assignment ----------------------------------------------------------

    def _enqueue(self, lit: int, reason: Optional[_Clause]) -> None:
        v = lit >> 1
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _decision_level(self) -> int:
        return len(self.trail_lim)

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        val, phase, reason, act, heap = self.val, self.phase, self.reason, self.activity, self.heap
        start = self.trail_lim[lvl]
        for i in range(len(self.trail) - 1, start - 1, -1):
            lit = self.trail[i]
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = None
            phase[v] = not (lit & 1)
            heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)
        if len(heap) > 4 * self.num_vars + 64:
            self._rebuild_heap()

    def _propagate(self) -> Optional[_Clause]:
        val, watches, trail = self.val, self.watches, self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c.deleted:
                    continue
                lits = c.lits
                if lits[0] == false_lit:
                    lits[0] = lits[1]
                    lits[1] = false_lit
                first = lits[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if val[lk] != -1:
                        lits[1] = lk
                        lits[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return c
                    self._enqueue(first, c)
            del ws[j:]
        return None

    # -- heuristics ----------------------------------------------------------

    def _bump_var(self, v: int, amount: float = 1.0) -> None:
        act = self.activity
        act[v] += self.var_inc * amount
        if act[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _rebuild_heap(self) -> None:
        self.heap = [(-self.activity[v], v) for v in range(1, self.num_vars + 1) if self.val[2 * v] == 0]
        heapq.heapify(self.heap)

    def _bump_clause(self, c: _Clause) -> None:
        c.activity += self.cla_inc
        if c.activity > 1e20:
            for d in self.learnts:
                d.activity *= 1e-20
            self.cla_inc *= 1e-20

    def _pick_branch(self) -> int:
        heap, act, val = self.heap, self.activity, self.val
        while heap:
            neg, v = heapq.heappop(heap)
            if val[2 * v] != 0 or -neg != act[v]:
                continue
            return v
        return 0

    # -- conflict analysis ---------------------------------------------------

    def _analyze(self, confl: _Clause) -> tuple[list[int], int, int]:
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        cur = self._decision_level()
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        c = confl
        while True:
            if c.learnt:
                self._bump_clause(c)
            for q in (c.lits if p == -1 else c.lits[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump_var(v)
                    if level[v] >= cur:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            c = reason[p >> 1]
            seen[p >> 1] = 0
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1

        # recursive minimization
        to_clear = list(learnt[1:])
        abstract = 0
        for q in learnt[1:]:
            abstract |= 1 << (level[q >> 1] & 31)
        kept = [learnt[0]]
        for q in learnt[1:]:
            if reason[q >> 1] is None or not self._redundant(q, abstract, to_clear):
                kept.append(q)
        for q in to_clear:
            seen[q >> 1] = 0
        learnt = kept

        if len(learnt) == 1:
            bt = 0
        else:
            hi = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
            learnt[1], learnt[hi] = learnt[hi], learnt[1]
            bt = level[learnt[1] >> 1]
        lbd = len({level[q >> 1] for q in learnt})
        return learnt, bt, lbd

    def _redundant(self, lit: int, abstract: int, to_clear: list[int]) -> bool:
        seen, level, reason = self.seen, self.level, self.reason
        stack = [lit]
        top = len(to_clear)
        while stack:
            q = stack.pop()
            c = reason[q >> 1]
            for r in c.lits[1:]:
                v = r >> 1
                if not seen[v] and level[v] > 0:
                    if reason[v] is not None and (1 << (level[v] & 31)) & abstract:
                        seen[v] = 1
                        stack.append(r)
                        to_clear.append(r)
                    else:
                        for k in range(top, len(to_clear)):
                            seen[to_clear[k] >> 1] = 0
                        del to_clear[top:]
                        return False
        return True

    # -- restarts, rephasing, reduction --------------------------------------

    def _note_conflict(self, lbd: int) -> None:
        self.lbd_total += lbd
        if len(self.lbd_queue) == self.lbd_queue.maxlen:
            self.lbd_queue_sum -= self.lbd_queue[0]
        self.lbd_queue.append(lbd)
        self.lbd_queue_sum += lbd
        t = len(self.trail)
        if len(self.trail_queue) == self.trail_queue.maxlen:
            self.trail_queue_sum -= self.trail_queue[0]
        self.trail_queue.append(t)
        self.trail_queue_sum += t
        # glucose restart blocking: a much longer trail than usual suggests we are close to a model
        if (self.config.restart_policy == "glucose_lbd" and self.conflicts > 10000
                and len(self.lbd_queue) == self.lbd_queue.maxlen
                and len(self.trail_queue) == self.trail_queue.maxlen
                and t > 1.4 * self.trail_queue_sum / len(self.trail_queue)):
            self.lbd_queue.clear()
            self.lbd_queue_sum = 0

    def _should_restart(self, conflicts_since_restart: int) -> bool:
        if self.config.restart_policy == "luby":
            return conflicts_since_restart >= self.luby_budget
        q = self.lbd_queue
        return (len(q) == q.maxlen
                and (self.lbd_queue_sum / len(q)) * 0.8 > self.lbd_total / self.conflicts)

    def _on_restart(self) -> None:
        self.restarts += 1
        self.lbd_queue.clear()
        self.lbd_queue_sum = 0
        if self.config.restart_policy == "luby":
            self.luby_index += 1
            self.luby_budget = luby(self.luby_index) * self.config.luby_unit

    def _rephase(self, hints: BranchingHints) -> None:
        for v in range(1, self.num_vars + 1):
            if v in hints.polarity:
                self.phase[v] = hints.polarity[v]
            else:
                self.phase[v] = self.rng.random() < 0.5

    def _locked(self, c: _Clause) -> bool:
        v = c.lits[0] >> 1
        return self.reason[v] is c and self.val[c.lits[0]] == 1

    def _reduce_db(self) -> None:
        glue = self.config.glue_lbd
        keep, candidates = [], []
        for c in self.learnts:
            (keep if c.lbd <= glue or self._locked(c) else candidates).append(c)
        if len(candidates) < self.max_learnts:
            return
        candidates.sort(key=lambda c: (c.activity, -c.lbd))
        half = len(candidates) // 2
        for c in candidates[:half]:
            c.deleted = True
        self.learnts = keep + candidates[half:]
        self.max_learnts = int(self.max_learnts * self.config.learnts_growth)

    # -- main loop -----------------------------------------------------------

    def solve(self, hints: Optional[BranchingHints] = None, seed: Optional[int] = None,
              stop: Optional[threading.Event] = None) -> Optional[Model]:
        """Return a model of the clauses, or None if they are unsatisfiable.

        Raises ResourceLimitError when ``config.max_conflicts`` conflicts pass
        in this call, and Cancelled when ``stop`` is set.
        """
        if not self.ok:
            return None
        hints = hints or BranchingHints()
        hints.validate(self.num_vars)
        if seed is not None:
            self.rng.seed(seed)
        self._backtrack(0)
        for v, pol in hints.polarity.items():
            self.phase[v] = bool(pol)
        for v, b in sorted(hints.priority_bump.items()):
            if b > 0:
                self._bump_var(v, b)

        budget = self.config.max_conflicts
        local_conflicts = 0
        since_restart = 0
        ticks = 0
        try:
            while True:
                ticks += 1
                if stop is not None and ticks & 63 == 0 and stop.is_set():
                    raise Cancelled()
                confl = self._propagate()
                if confl is not None:
                    self.conflicts += 1
                    local_conflicts += 1
                    since_restart += 1
                    if self._decision_level() == 0:
                        self.ok = False
                        return None
                    learnt, bt, lbd = self._analyze(confl)
                    self._note_conflict(lbd)
                    self._backtrack(bt)
                    if len(learnt) == 1:
                        self._enqueue(learnt[0], None)
                    else:
                        c = _Clause(learnt, learnt=True, lbd=lbd)
                        self.learnts.append(c)
                        self.watches[learnt[0]].append(c)
                        self.watches[learnt[1]].append(c)
                        self._bump_clause(c)
                        self._enqueue(learnt[0], c)
                    self.var_inc /= self.config.var_decay
                    self.cla_inc /= self.config.clause_decay
                    if self.conflicts >= self.next_rephase:
                        self.next_rephase += self.config.rephase_interval
                        self._rephase(hints)
                    if budget is not None and local_conflicts >= budget:
                        raise ResourceLimitError(f"conflict budget {budget} exhausted", local_conflicts)
                    continue
                if self._should_restart(since_restart):
                    self._on_restart()
                    since_restart = 0
                    self._backtrack(0)
                    continue
                if self.conflicts >= self.next_reduce:
                    self.next_reduce = self.conflicts + self.config.reduce_interval
                    self._reduce_db()
                v = self._pick_branch()
                if v == 0:
                    return self._extract_model()
                self.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._enqueue(2 * v + (0 if self.phase[v] else 1), None)
        finally:
            self._backtrack(0)

    def _extract_model(self) -> Model:
        bits = 0
        val = self.val
        for v in range(1, self.num_vars + 1):
            if val[2 * v] == 1:
                bits |= 1 << (v - 1)
        model = Model(self.num_vars, bits)
        if not check_model(self.original, model):
            raise SolverInvariantError("solver returned a non-model")
        return model


def solve(clauses: Iterable[Iterable[int]], num_vars: Optional[int] = None,
          config: Optional[SolverConfig] = None, hints: Optional[BranchingHints] = None) -> Optional[Model]:
    """One-shot solve; returns a verified model or None for UNSAT."""
    return Solver(clauses, num_vars, config).solve(hints)
