import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsat.cdcl import BranchingHints, ResourceLimitError, Solver, SolverConfig, _enc, luby, solve
from dsat.model import check_model
from dsat.oracle import enumerate_models

from helpers import pigeonhole, random_kcnf


def test_contradictory_units_are_unsat():
    assert solve([[1], [-1]]) is None


def test_hints_steer_the_model():
    hints = BranchingHints(polarity={1: False, 2: True})
    for seed in range(5):
        model = solve([[1, 2]], 2, SolverConfig(seed=seed), hints)
        assert model.literals() == [-1, 2]


def test_empty_formula_uses_default_phase():
    assert solve([], 1).literals() == [-1]


def test_unit_chain_propagation():
    s = Solver([[-1, 2], [-2, 3]], 3)
    s.trail_lim.append(len(s.trail))
    s._enqueue(_enc(1), None)
    assert s._propagate() is None
    assert s.val[_enc(2)] == 1 and s.val[_enc(3)] == 1
    assert s.level[2] == s.level[3] == 1


def test_first_uip_on_two_clause_conflict():
    # 1 forces both 2 and -2; the shared cause -1 is learnt and asserted at level 0
    s = Solver([[-1, 2], [-1, -2]], 2)
    s.trail_lim.append(len(s.trail))
    s._enqueue(_enc(1), None)
    confl = s._propagate()
    assert confl is not None
    learnt, bt, lbd = s._analyze(confl)
    assert learnt == [_enc(-1)] and bt == 0 and lbd == 1


def test_minimization_removes_implied_literals():
    # decisions 1, then 3; 2 is implied by 1, conflict on 3 involves 1 and 2
    clauses = [[-1, 2], [-3, -2, 4], [-3, -1, -4]]
    s = Solver(clauses, 4)
    s.trail_lim.append(len(s.trail))
    s._enqueue(_enc(1), None)
    assert s._propagate() is None
    s.trail_lim.append(len(s.trail))
    s._enqueue(_enc(3), None)
    confl = s._propagate()
    learnt, bt, _ = s._analyze(confl)
    assert sorted(learnt) == sorted([_enc(-3), _enc(-1)])
    assert bt == 1


def test_pigeonhole_3_2_unsat_confirmed_by_oracle():
    clauses, n = pigeonhole(3, 2)
    assert len(enumerate_models(clauses, n)) == 0
    assert solve(clauses, n) is None


@pytest.mark.parametrize("policy", ["glucose_lbd", "luby"])
def test_larger_pigeonhole(policy):
    clauses, n = pigeonhole(6, 5)
    assert solve(clauses, n, SolverConfig(restart_policy=policy)) is None


def test_luby_sequence():
    assert [luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_conflict_budget_is_distinct_from_unsat():
    clauses, n = pigeonhole(7, 6)
    with pytest.raises(ResourceLimitError):
        solve(clauses, n, SolverConfig(max_conflicts=5))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(var_decay=1.0)
    with pytest.raises(ValueError):
        SolverConfig(rephase_interval=0)
    with pytest.raises(ValueError):
        solve([[1]], 1, hints=BranchingHints(polarity={2: True}))
    with pytest.raises(ValueError):
        solve([[1]], 1, hints=BranchingHints(priority_bump={1: -1.0}))


def test_tautologies_duplicates_and_empty_clause():
    assert solve([[1, -1], [2, 2]], 2).literals()[1] == 2
    assert solve([[1], []], 1) is None


def test_clause_database_reduction_keeps_answers_correct():
    rng = random.Random(9)
    cfg = SolverConfig(max_learnts=20, reduce_interval=50, rephase_interval=100)
    for _ in range(30):
        clauses = random_kcnf(rng, 18, 77)
        s = Solver(clauses, 18, cfg)
        got = s.solve()
        assert (got is None) == (len(enumerate_models(clauses, 18)) == 0)
        if got is not None:
            assert check_model(clauses, got)


def test_solver_is_reusable_across_calls():
    rng = random.Random(4)
    clauses = random_kcnf(rng, 15, 50)
    s = Solver(clauses, 15)
    seen = set()
    for k in range(20):
        hints = BranchingHints(polarity={v: rng.random() < 0.5 for v in range(1, 16)},
                               priority_bump={rng.randint(1, 15): 5.0})
        m = s.solve(hints, seed=k)
        assert m is not None and check_model(clauses, m)
        seen.add(m)
    assert len(seen) > 1


def test_rescaling_keeps_heap_consistent():
    s = Solver([[1, 2], [-1, 3]], 3)
    s.var_inc = 1e99
    for _ in range(5):
        m = s.solve(BranchingHints(priority_bump={3: 50.0}))
        assert check_model([[1, 2], [-1, 3]], m)
    assert max(s.activity) < 1e100


cnf = st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.lists(st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=3),
             max_size=5 * n)))
hint_st = st.dictionaries(st.integers(1, 8), st.booleans())


@settings(max_examples=200)
@given(cnf, hint_st, st.dictionaries(st.integers(1, 8), st.floats(0, 100)), st.integers(0, 2**32))
def test_hints_never_change_the_verdict(problem, polarity, bumps, seed):
    n, clauses = problem
    hints = BranchingHints({v: p for v, p in polarity.items() if v <= n},
                           {v: b for v, b in bumps.items() if v <= n})
    plain = solve(clauses, n)
    hinted = solve(clauses, n, SolverConfig(seed=seed), hints)
    truth = len(enumerate_models(clauses, n)) > 0
    assert (plain is not None) == (hinted is not None) == truth
    if hinted is not None:
        assert check_model(clauses, hinted)


@settings(max_examples=50)
@given(cnf, hint_st, st.integers(0, 2**32))
def test_solve_is_deterministic(problem, polarity, seed):
    n, clauses = problem
    hints = BranchingHints({v: p for v, p in polarity.items() if v <= n})
    cfg = SolverConfig(seed=seed)
    assert solve(clauses, n, cfg, hints) == solve(clauses, n, cfg, hints)


@pytest.mark.parametrize("ratio", [3.0, 4.26, 5.0])
def test_agrees_with_oracle_on_random_3cnf(ratio):
    rng = random.Random(int(ratio * 100))
    for _ in range(40):
        clauses = random_kcnf(rng, 14, round(ratio * 14))
        assert (solve(clauses, 14) is None) == (len(enumerate_models(clauses, 14)) == 0)
