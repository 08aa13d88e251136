"""Differentiable cost expressions over atom frequencies ``f(v)``.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative, exponent constant
    atom   := NUMBER | 'f' '(' INT ')' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := abs | exp | log | sqrt | sign

``sign`` only exists so that derivatives of ``abs`` print and reparse.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union


class CostSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.message = message
        self.position = position
        self.text = text
        super().__init__(f"{message} at column {position + 1}")


class UndeclaredParameterError(ValueError):
    def __init__(self, var: int, position: int = -1):
        self.var = var
        self.position = position
        where = f" at column {position + 1}" if position >= 0 else ""
        super().__init__(f"f({var}) refers to an undeclared parameter atom{where}")


class CostDomainError(ArithmeticError):
    """Evaluation left the real domain (log/sqrt/division/overflow)."""


# -- nodes -------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Freq:
    var: int


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


@dataclass(frozen=True)
class Abs:
    arg: "Expr"


@dataclass(frozen=True)
class Exp:
    arg: "Expr"


@dataclass(frozen=True)
class Log:
    arg: "Expr"


@dataclass(frozen=True)
class Sqrt:
    arg: "Expr"


@dataclass(frozen=True)
class Sign:
    arg: "Expr"


Expr = Union[Const, Freq, Add, Sub, Mul, Div, Neg, Pow, Abs, Exp, Log, Sqrt, Sign]

BINARY = (Add, Sub, Mul, Div)
UNARY_FUNCS = {"abs": Abs, "exp": Exp, "log": Log, "sqrt": Sqrt, "sign": Sign}
_FUNC_NAMES = {cls: name for name, cls in UNARY_FUNCS.items()}
_OPS = {Add: "+", Sub: "-", Mul: "*", Div: "/"}

ZERO = Const(0.0)
ONE = Const(1.0)


def freq_vars(expr: Expr) -> set[int]:
    out: set[int] = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, Freq):
            out.add(e.var)
        elif isinstance(e, BINARY):
            stack.append(e.left)
            stack.append(e.right)
        elif isinstance(e, Pow):
            stack.append(e.base)
        elif not isinstance(e, Const):
            stack.append(e.arg)
    return out


def depth(expr: Expr) -> int:
    if isinstance(expr, (Const, Freq)):
        return 1
    if isinstance(expr, BINARY):
        return 1 + max(depth(expr.left), depth(expr.right))
    if isinstance(expr, Pow):
        return 1 + depth(expr.base)
    return 1 + depth(expr.arg)


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise CostSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, declared: Optional[set[int]]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.declared = declared

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise CostSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def error(self, message: str, pos: int):
        return CostSyntaxError(message, pos, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise self.error(f"unexpected {val!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.next()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.next()[1]
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.next()
            start = self.i
            operand = self.unary()
            # "-<number>" is a negative literal, so printed constants reparse exactly
            if isinstance(operand, Const) and self.i == start + 1 and self.tokens[start][0] == "num":
                return Const(-operand.value)
            return Neg(operand)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.next()
            exp_pos = self.peek()[2]
            exponent = self.unary()
            if freq_vars(exponent):
                raise self.error("exponent must be a numeric constant", exp_pos)
            folded = simplify(exponent)
            if not isinstance(folded, Const):
                raise self.error("exponent must be a numeric constant", exp_pos)
            return Pow(base, folded.value)
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.next()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val == "f":
                self.expect("(")
                k2, v2, p2 = self.next()
                if k2 != "num" or not v2.isdigit():
                    raise self.error("f(...) takes a positive integer variable id", p2)
                var = int(v2)
                if var < 1:
                    raise self.error("variable ids start at 1", p2)
                self.expect(")")
                if self.declared is not None and var not in self.declared:
                    raise UndeclaredParameterError(var, pos)
                return Freq(var)
            if val in UNARY_FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return UNARY_FUNCS[val](arg)
            raise self.error(f"unknown function {val!r}", pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        raise self.error(f"unexpected {found}", pos)


def parse_cost(text: str, declared: Optional[Iterable[int]] = None) -> Expr:
    """Parse ``text`` into an expression tree.

    When ``declared`` is given, every ``f(v)`` must name one of its variables.
    """
    return _Parser(text, None if declared is None else set(declared)).parse()


# -- printing ----------------------------------------------------------------

def _num(x: float) -> str:
    s = repr(float(x))
    return f"({s})" if x < 0 or s.startswith("-") else s


def to_string(expr: Expr) -> str:
    """Fully parenthesized form that :func:`parse_cost` maps back to ``expr``."""
    if isinstance(expr, Const):
        return _num(expr.value)
    if isinstance(expr, Freq):
        return f"f({expr.var})"
    if isinstance(expr, BINARY):
        return f"({to_string(expr.left)} {_OPS[type(expr)]} {to_string(expr.right)})"
    if isinstance(expr, Neg):
        return f"(-({to_string(expr.arg)}))"
    if isinstance(expr, Pow):
        return f"({to_string(expr.base)} ^ {_num(expr.exponent)})"
    return f"{_FUNC_NAMES[type(expr)]}({to_string(expr.arg)})"


# -- evaluation --------------------------------------------------------------

def evaluate(expr: Expr, freqs: Mapping[int, float]) -> float:
    """Evaluate with double-precision arithmetic.

    Raises CostDomainError instead of producing NaN or infinity, and KeyError
    when a frequency variable has no value.
    """
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Freq):
        return freqs[expr.var]
    if isinstance(expr, Add):
        return _finite(evaluate(expr.left, freqs) + evaluate(expr.right, freqs))
    if isinstance(expr, Sub):
        return _finite(evaluate(expr.left, freqs) - evaluate(expr.right, freqs))
    if isinstance(expr, Mul):
        return _finite(evaluate(expr.left, freqs) * evaluate(expr.right, freqs))
    if isinstance(expr, Div):
        den = evaluate(expr.right, freqs)
        if den == 0:
            raise CostDomainError("division by zero")
        return _finite(evaluate(expr.left, freqs) / den)
    if isinstance(expr, Neg):
        return -evaluate(expr.arg, freqs)
    if isinstance(expr, Pow):
        return _pow(evaluate(expr.base, freqs), expr.exponent)
    x = evaluate(expr.arg, freqs)
    if isinstance(expr, Abs):
        return abs(x)
    if isinstance(expr, Sign):
        return (x > 0) - (x < 0)
    if isinstance(expr, Exp):
        try:
            return math.exp(x)
        except OverflowError:
            raise CostDomainError(f"exp({x}) overflows") from None
    if isinstance(expr, Log):
        if x <= 0:
            raise CostDomainError(f"log of nonpositive value {x}")
        return math.log(x)
    if isinstance(expr, Sqrt):
        if x < 0:
            raise CostDomainError(f"sqrt of negative value {x}")
        return math.sqrt(x)
    raise TypeError(f"not a cost expression: {expr!r}")


def _finite(x: float) -> float:
    if math.isinf(x) or math.isnan(x):
        raise CostDomainError("arithmetic overflow")
    return x


def _pow(base: float, exponent: float) -> float:
    if base == 0 and exponent < 0:
        raise CostDomainError("zero raised to a negative power")
    if base < 0 and not float(exponent).is_integer():
        raise CostDomainError(f"negative base {base} with fractional exponent {exponent}")
    try:
        return _finite(math.pow(base, exponent))
    except OverflowError:
        raise CostDomainError("power overflows") from None


# -- differentiation ---------------------------------------------------------

def differentiate(expr: Expr, v: int) -> Expr:
    """Symbolic partial derivative with respect to ``f(v)``, simplified."""
    return simplify(_d(expr, v))


def _d(e: Expr, v: int) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Freq):
        return ONE if e.var == v else ZERO
    if v not in freq_vars(e):
        return ZERO
    if isinstance(e, Add):
        return Add(_d(e.left, v), _d(e.right, v))
    if isinstance(e, Sub):
        return Sub(_d(e.left, v), _d(e.right, v))
    if isinstance(e, Mul):
        return Add(Mul(_d(e.left, v), e.right), Mul(e.left, _d(e.right, v)))
    if isinstance(e, Div):
        # (u/w)' = (u'w - uw') / w^2
        num = Sub(Mul(_d(e.left, v), e.right), Mul(e.left, _d(e.right, v)))
        return Div(num, Pow(e.right, 2.0))
    if isinstance(e, Neg):
        return Neg(_d(e.arg, v))
    if isinstance(e, Pow):
        c = e.exponent
        if c == 0:
            return ZERO
        return Mul(Mul(Const(c), Pow(e.base, c - 1.0)), _d(e.base, v))
    du = _d(e.arg, v)
    if isinstance(e, Abs):
        return Mul(Sign(e.arg), du)
    if isinstance(e, Sign):
        return ZERO
    if isinstance(e, Exp):
        return Mul(e, du)
    if isinstance(e, Log):
        return Div(du, e.arg)
    if isinstance(e, Sqrt):
        return Div(du, Mul(Const(2.0), e))
    raise TypeError(f"not a cost expression: {e!r}")


def gradient(expr: Expr, variables: Iterable[int]) -> dict[int, Expr]:
    return {v: differentiate(expr, v) for v in variables}


# -- simplification ----------------------------------------------------------

def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def _fold(e: Expr) -> Expr:
    try:
        return Const(evaluate(e, {}))
    except ArithmeticError:
        return e


def simplify(expr: Expr) -> Expr:
    """Constant folding plus the 0/1 identities; value-preserving on the domain."""
    e = expr
    if isinstance(e, (Const, Freq)):
        return e
    if isinstance(e, BINARY):
        a, b = simplify(e.left), simplify(e.right)
        if isinstance(a, Const) and isinstance(b, Const):
            return _fold(type(e)(a, b))
        if isinstance(e, Add):
            if _is(a, 0):
                return b
            if _is(b, 0):
                return a
        elif isinstance(e, Sub):
            if _is(b, 0):
                return a
            if _is(a, 0):
                return simplify(Neg(b))
        elif isinstance(e, Mul):
            if _is(a, 0) or _is(b, 0):
                return ZERO
            if _is(a, 1):
                return b
            if _is(b, 1):
                return a
        elif isinstance(e, Div):
            if _is(b, 1):
                return a
        return type(e)(a, b)
    if isinstance(e, Neg):
        a = simplify(e.arg)
        if isinstance(a, Const):
            return Const(-a.value)
        if isinstance(a, Neg):
            return a.arg
        return Neg(a)
    if isinstance(e, Pow):
        a = simplify(e.base)
        if e.exponent == 1:
            return a
        if e.exponent == 0:
            return ONE
        if isinstance(a, Const):
            return _fold(Pow(a, e.exponent))
        return Pow(a, e.exponent)
    a = simplify(e.arg)
    node = type(e)(a)
    if isinstance(a, Const):
        return _fold(node)
    return node


def sum_terms(terms: Sequence[Expr]) -> Expr:
    """Combine objective terms as their arithmetic mean."""
    terms = list(terms)
    if not terms:
        raise ValueError("sum_terms needs at least one term")
    if len(terms) == 1:
        return terms[0]
    total = terms[0]
    for t in terms[1:]:
        total = Add(total, t)
    return Div(total, Const(float(len(terms))))


def squared_error(var: int, target: float) -> Expr:
    return Pow(Sub(Freq(var), Const(float(target))), 2.0)
