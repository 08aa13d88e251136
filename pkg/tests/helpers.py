"""Instance and expression generators shared by the test modules."""
from __future__ import annotations

import itertools
import math
import random
from pathlib import Path

from dsat import costfn
from dsat.costfn import Abs, Add, Const, Div, Exp, Freq, Log, Mul, Neg, Pow, Sqrt, Sub

INSTANCES = Path(__file__).parent / "instances"
SUITE = sorted(INSTANCES.iterdir())


def random_kcnf(rng: random.Random, n: int, m: int, k: int = 3) -> list[tuple[int, ...]]:
    return [tuple(rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), k)) for _ in range(m)]


def random_clause(rng: random.Random, n: int, max_len: int = 3) -> tuple[int, ...]:
    size = rng.randint(1, min(max_len, n))
    return tuple(rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), size))


def naive_models(clauses, n: int) -> list[tuple[bool, ...]]:
    """Truth-table enumeration, kept independent of the bit-packed oracle."""
    out = []
    for values in itertools.product((False, True), repeat=n):
        if all(any(values[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            out.append(values)
    return out


def pigeonhole(pigeons: int, holes: int) -> tuple[list[tuple[int, ...]], int]:
    var = lambda i, j: i * holes + j + 1  # noqa: E731
    clauses = [tuple(var(i, j) for j in range(holes)) for i in range(pigeons)]
    for j in range(holes):
        for a, b in itertools.combinations(range(pigeons), 2):
            clauses.append((-var(a, j), -var(b, j)))
    return clauses, pigeons * holes


EXPONENTS = (2.0, 3.0, 0.5, -1.0, 1.5, -2.0)


def random_expr(rng: random.Random, depth: int, variables=(1, 2, 3)):
    if depth <= 1 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return Freq(rng.choice(variables))
        return Const(round(rng.uniform(-2, 2), 3))
    kind = rng.choice(("add", "sub", "mul", "div", "neg", "pow", "abs", "exp", "log", "sqrt"))
    sub = lambda: random_expr(rng, depth - 1, variables)  # noqa: E731
    if kind == "add":
        return Add(sub(), sub())
    if kind == "sub":
        return Sub(sub(), sub())
    if kind == "mul":
        return Mul(sub(), sub())
    if kind == "div":
        return Div(sub(), sub())
    if kind == "neg":
        return Neg(sub())
    if kind == "pow":
        return Pow(sub(), rng.choice(EXPONENTS))
    return {"abs": Abs, "exp": Exp, "log": Log, "sqrt": Sqrt}[kind](sub())


def well_conditioned(expr, point, margin: float = 0.05, bound: float = 1e3) -> bool:
    """True when ``expr`` is smooth and moderate in a neighbourhood of ``point``.

    Rejects points near division poles, log/sqrt domain edges, abs kinks and
    large magnitudes, where finite differences stop being meaningful.
    """
    ok = True

    def walk(e):
        nonlocal ok
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Freq):
            return point[e.var]
        if isinstance(e, (Add, Sub, Mul, Div)):
            a, b = walk(e.left), walk(e.right)
            if not ok:
                return 0.0
            if isinstance(e, Div):
                if abs(b) < margin:
                    ok = False
                    return 0.0
                r = a / b
            else:
                r = a + b if isinstance(e, Add) else a - b if isinstance(e, Sub) else a * b
        elif isinstance(e, Pow):
            a = walk(e.base)
            if not ok:
                return 0.0
            if abs(a) < margin or (a < 0 and not e.exponent.is_integer()):
                ok = False
                return 0.0
            r = math.pow(abs(a), e.exponent) * (1 if a > 0 or e.exponent % 2 == 0 else -1)
        else:
            a = walk(e.arg)
            if not ok:
                return 0.0
            if isinstance(e, Neg):
                r = -a
            elif isinstance(e, Abs):
                if abs(a) < margin:
                    ok = False
                    return 0.0
                r = abs(a)
            elif isinstance(e, Exp):
                if a > 6:
                    ok = False
                    return 0.0
                r = math.exp(a)
            elif isinstance(e, Log):
                if a < margin:
                    ok = False
                    return 0.0
                r = math.log(a)
            elif isinstance(e, Sqrt):
                if a < margin:
                    ok = False
                    return 0.0
                r = math.sqrt(a)
            else:
                r = a
        if abs(r) > bound:
            ok = False
        return r

    walk(expr)
    return ok


def central_difference(expr, point: dict, v: int, h: float = 1e-6) -> float:
    up = dict(point)
    down = dict(point)
    up[v] += h
    down[v] -= h
    return (costfn.evaluate(expr, up) - costfn.evaluate(expr, down)) / (2 * h)


def gradient_cases(seed: int, count: int, points: int = 5, max_depth: int = 6):
    """Yield ``count`` (expr, [points]) pairs where every point is well conditioned."""
    rng = random.Random(seed)
    found = 0
    while found < count:
        expr = random_expr(rng, rng.randint(2, max_depth))
        if not costfn.freq_vars(expr):
            continue
        pts = []
        for _ in range(20 * points):
            p = {v: rng.uniform(0.05, 0.95) for v in (1, 2, 3)}
            if well_conditioned(expr, p):
                pts.append(p)
                if len(pts) == points:
                    break
        if len(pts) < points:
            continue
        found += 1
        yield expr, pts


def relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))
