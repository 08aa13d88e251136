import math
import random

import pytest

from dsat.costfn import (Abs, Add, Const, CostDomainError, CostSyntaxError, Div, Freq, Mul, Neg, Pow, Sign,
                         Sub, UndeclaredParameterError, depth, differentiate, evaluate, parse_cost, simplify,
                         sum_terms, to_string)

from helpers import central_difference, gradient_cases, random_expr, relative_error

MSE = Pow(Sub(Const(0.5), Freq(1)), 2.0)


def test_parse_examples():
    assert parse_cost("(0.5-f(1))^2", {1}) == MSE
    assert parse_cost("abs(f(1)-0.3)/2") == Div(Abs(Sub(Freq(1), Const(0.3))), Const(2.0))
    with pytest.raises(CostSyntaxError, match="exponent"):
        parse_cost("f(1)^f(2)", {1, 2})


def test_parse_precedence_and_associativity():
    assert parse_cost("-f(1)^2") == Neg(Pow(Freq(1), 2.0))
    assert parse_cost("2^3^2") == Pow(Const(2.0), 9.0)
    assert parse_cost("1-2-3") == Sub(Sub(Const(1.0), Const(2.0)), Const(3.0))
    assert parse_cost("f(1)*2/4") == Div(Mul(Freq(1), Const(2.0)), Const(4.0))
    assert parse_cost("1+2*f(1)") == Add(Const(1.0), Mul(Const(2.0), Freq(1)))
    assert parse_cost("f(1)^-1") == Pow(Freq(1), -1.0)
    assert parse_cost("f(1)^(1/2)") == Pow(Freq(1), 0.5)


@pytest.mark.parametrize("text", ["f(1", "f(x)", "2 +", "foo(1)", "f(1) f(2)", "1 $ 2", "()"])
def test_syntax_errors_have_positions(text):
    with pytest.raises(CostSyntaxError) as info:
        parse_cost(text)
    assert 0 <= info.value.position <= len(text)


def test_undeclared_variable():
    with pytest.raises(UndeclaredParameterError) as info:
        parse_cost("f(1) + f(3)", {1})
    assert info.value.var == 3 and info.value.position == 7


def test_evaluate_examples():
    assert evaluate(MSE, {1: 0.5}) == 0.0
    assert evaluate(MSE, {1: 0.9}) == pytest.approx(0.16, abs=1e-15)
    assert evaluate(parse_cost("f(1)+f(2)"), {1: 0.25, 2: 0.5}) == 0.75


@pytest.mark.parametrize("text, point", [
    ("log(f(1))", {1: 0.0}),
    ("log(f(1) - 1)", {1: 0.5}),
    ("sqrt(f(1) - 1)", {1: 0.5}),
    ("1 / f(1)", {1: 0.0}),
    ("f(1) ^ -1", {1: 0.0}),
    ("(f(1) - 1) ^ 0.5", {1: 0.5}),
    ("exp(1000 * f(1))", {1: 1.0}),
])
def test_domain_errors_are_reported(text, point):
    with pytest.raises(CostDomainError):
        evaluate(parse_cost(text), point)


def test_differentiate_examples():
    d = differentiate(MSE, 1)
    # hand chain rule: 2 (0.5 - f) (-1) = 0.8 at f = 0.9
    assert evaluate(d, {1: 0.9}) == pytest.approx(0.8, abs=1e-15)
    assert differentiate(MSE, 2) == Const(0.0)
    assert differentiate(parse_cost("f(1)*f(2)"), 1) == Freq(2)


def test_abs_derivative_uses_sign_with_zero_at_kink():
    d = differentiate(parse_cost("abs(f(1) - 0.3)"), 1)
    assert d == Sign(Sub(Freq(1), Const(0.3)))
    assert evaluate(d, {1: 0.3}) == 0
    assert evaluate(d, {1: 0.1}) == -1
    assert evaluate(d, {1: 0.9}) == 1


@pytest.mark.parametrize("text, v, at, expected", [
    ("exp(2*f(1))", 1, 0.3, 2 * math.exp(0.6)),
    ("log(f(1))", 1, 0.25, 4.0),
    ("sqrt(f(1))", 1, 0.25, 1.0),
    ("f(1)/f(2)", 2, 0.5, -0.5 / 0.25),
    ("-f(1)^3", 1, 0.5, -0.75),
])
def test_differentiate_standard_rules(text, v, at, expected):
    point = {1: at, 2: at}
    assert evaluate(differentiate(parse_cost(text), v), point) == pytest.approx(expected, rel=1e-12)


def test_simplify_examples():
    assert simplify(Add(Const(0.0), Freq(1))) == Freq(1)
    assert simplify(Mul(Const(0.0), Freq(1))) == Const(0.0)
    assert simplify(Pow(Freq(1), 1.0)) == Freq(1)
    assert simplify(Pow(Freq(1), 0.0)) == Const(1.0)
    assert simplify(Neg(Neg(Freq(1)))) == Freq(1)
    assert simplify(Mul(Freq(1), Const(1.0))) == Freq(1)
    assert simplify(Sub(Freq(1), Const(0.0))) == Freq(1)
    assert simplify(Add(Const(1.0), Mul(Const(2.0), Const(3.0)))) == Const(7.0)


def test_simplify_leaves_undefined_constants_alone():
    e = Div(Const(1.0), Const(0.0))
    assert simplify(e) == e


def test_sum_terms_examples():
    t = Pow(Sub(Const(0.2), Freq(1)), 2.0)
    u = Pow(Sub(Const(0.6), Freq(2)), 2.0)
    assert sum_terms([t]) == t
    folded = simplify(sum_terms([Const(0.2), Const(0.4)]))
    assert isinstance(folded, Const) and folded.value == pytest.approx(0.3, abs=1e-15)
    assert sum_terms([t, u]) == Div(Add(t, u), Const(2.0))
    with pytest.raises(ValueError):
        sum_terms([])


def test_gradient_check_against_finite_differences():
    worst = 0.0
    for expr, points in gradient_cases(seed=11, count=200):
        assert depth(expr) <= 6
        for p in points:
            for v in (1, 2, 3):
                sym = evaluate(differentiate(expr, v), p)
                worst = max(worst, relative_error(sym, central_difference(expr, p, v)))
    assert worst <= 1e-5


def test_simplify_preserves_value():
    rng = random.Random(3)
    checked = 0
    while checked < 100:
        expr = random_expr(rng, rng.randint(1, 6))
        s = simplify(expr)
        for _ in range(100):
            p = {v: rng.uniform(0.05, 0.95) for v in (1, 2, 3)}
            try:
                a = evaluate(expr, p)
            except ArithmeticError:
                continue
            b = evaluate(s, p)
            assert b == pytest.approx(a, rel=1e-12, abs=1e-12)
        checked += 1


def test_print_then_parse_is_fixpoint():
    rng = random.Random(5)
    for _ in range(300):
        expr = random_expr(rng, rng.randint(1, 6))
        once = parse_cost(to_string(expr))
        assert once == expr
        assert parse_cost(to_string(once)) == once
    odd = [Const(-0.0), Neg(Const(2.0)), Const(-1.5e-300), Pow(Freq(1), -2.0), Sign(Freq(2))]
    for e in odd:
        assert parse_cost(to_string(e)) == e
