"""Readers for DIMACS CNF, probabilistic CNF (PCNF) and enhanced CNF.

* ``p cnf`` files hold hard clauses only.
* ``p pcnf`` files may prefix a clause with a probability token, i.e. a
  first token containing a decimal point: ``0.7 1 -2 0``.
* Enhanced files are ``p cnf`` files followed by trailer lines
  ``pats v1 v2 ...``, ``cost <expr>`` and ``query l1 l2 ... 0`` in any order.

Trailer lines are also accepted after a PCNF clause section.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

from . import costfn
from .costfn import CostSyntaxError, Expr, UndeclaredParameterError
from .model import Clause, normalize_clause

FORMATS = ("dimacs", "pcnf", "enhanced")
TRAILER_KEYWORDS = ("pats", "cost", "query")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{where}: {message}")


class HeaderCountWarning(UserWarning):
    pass


@dataclass
class ProblemInstance:
    num_vars: int
    hard_clauses: list[Clause] = field(default_factory=list)
    prob_clauses: list[tuple[Clause, float]] = field(default_factory=list)
    declared_params: set[int] = field(default_factory=set)
    cost_terms: list[Expr] = field(default_factory=list)
    queries: list[Clause] = field(default_factory=list)

    def validate(self):
        def check(lits, what):
            for lit in lits:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"{what} literal {lit} outside 1..{self.num_vars}")
        for c in self.hard_clauses:
            check(c, "clause")
        for c, p in self.prob_clauses:
            check(c, "clause")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        for q in self.queries:
            check(q, "query")
        check(self.declared_params, "parameter")
        for t in self.cost_terms:
            undeclared = costfn.freq_vars(t) - self.declared_params
            if undeclared:
                raise ValueError(f"cost refers to undeclared parameters {sorted(undeclared)}")
        return self


def _decode(text: Union[str, bytes]) -> str:
    if isinstance(text, bytes):
        try:
            return text.decode("ascii")
        except UnicodeDecodeError as exc:
            line = text[: exc.start].count(b"\n") + 1
            raise ParseError("input is not 7-bit ASCII text", line) from None
    return text


def _is_comment(line: str) -> bool:
    return line.startswith("c") and line.split(maxsplit=1)[0] != "cost"


def _lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        yield i, raw.strip()


def _header(text: str):
    """Return (line number, tag, num_vars, num_clauses) of the ``p`` line."""
    for lineno, line in _lines(text):
        if not line or _is_comment(line):
            continue
        if line.split(maxsplit=1)[0] == "p":
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] not in ("cnf", "pcnf"):
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                nv, nc = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if nv < 0 or nc < 0:
                raise ParseError("header counts must be nonnegative", lineno)
            return lineno, parts[1], nv, nc
        raise ParseError("expected 'p cnf' or 'p pcnf' header before clauses", lineno)
    raise ParseError("missing 'p cnf' header", 1)


def detect_format(text: Union[str, bytes]) -> str:
    text = _decode(text)
    if not text.strip():
        raise ParseError("empty input", 1)
    header_line, tag, _, _ = _header(text)
    if tag == "pcnf":
        return "pcnf"
    for lineno, line in _lines(text):
        words = line.split(maxsplit=1)
        if lineno > header_line and words and words[0] in TRAILER_KEYWORDS:
            return "enhanced"
    return "dimacs"


def _parse(text, *, header_tag: str, allow_prob: bool, allow_trailer: bool, strict: bool) -> ProblemInstance:
    text = _decode(text)
    header_line, tag, num_vars, num_clauses = _header(text)
    if tag != header_tag:
        raise ParseError(f"expected 'p {header_tag}' header, found 'p {tag}'", header_line)
    inst = ProblemInstance(num_vars)
    pending: list[int] = []
    pending_prob: Optional[float] = None
    pending_line = 0
    source_clauses = 0
    in_trailer = False
    cost_lines: list[tuple[int, int, str]] = []

    def literal(tok: str, lineno: int, col: int) -> int:
        try:
            lit = int(tok)
        except ValueError:
            raise ParseError(f"invalid literal {tok!r}", lineno, col) from None
        if abs(lit) > num_vars:
            raise ParseError(f"variable {abs(lit)} out of range 1..{num_vars}", lineno, col)
        return lit

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if lineno <= header_line:
            continue
        line = raw.strip()
        if not line or _is_comment(line):
            continue
        if line == "%":
            break
        keyword = line.split(maxsplit=1)[0]
        if keyword == "p":
            raise ParseError("duplicate header", lineno)
        if keyword in TRAILER_KEYWORDS:
            if not allow_trailer:
                raise ParseError(f"{keyword!r} lines are only valid in enhanced CNF", lineno, 1)
            if pending:
                raise ParseError("clause not terminated by 0", pending_line)
            in_trailer = True
            rest = line[len(keyword):]
            offset = raw.index(keyword) + len(keyword)
            if keyword == "pats":
                for tok, col in _tokens(rest, offset):
                    v = literal(tok, lineno, col)
                    if v <= 0:
                        raise ParseError(f"parameter atom must be a positive variable id, got {tok}", lineno, col)
                    inst.declared_params.add(v)
            elif keyword == "cost":
                if not rest.strip():
                    raise ParseError("empty cost expression", lineno, offset + 1)
                cost_lines.append((lineno, offset, rest))
            else:
                toks = list(_tokens(rest, offset))
                if not toks or toks[-1][0] != "0":
                    raise ParseError("query not terminated by 0", lineno)
                lits = [literal(t, lineno, c) for t, c in toks[:-1]]
                if 0 in lits:
                    raise ParseError("query must be a single clause", lineno)
                if not lits:
                    raise ParseError("empty query clause", lineno)
                inst.queries.append(normalize_clause(lits))
            continue
        if in_trailer:
            raise ParseError("clause line after trailer section", lineno, 1)
        for tok, col in _tokens(raw, 0):
            if "." in tok:
                if not allow_prob:
                    raise ParseError(f"probability token {tok!r} outside PCNF", lineno, col)
                if pending or pending_prob is not None:
                    raise ParseError("probability must be the first token of a clause", lineno, col)
                try:
                    p = float(tok)
                except ValueError:
                    raise ParseError(f"invalid probability {tok!r}", lineno, col) from None
                if not 0.0 <= p <= 1.0:
                    raise ParseError(f"probability {p} outside [0, 1]", lineno, col)
                pending_prob = p
                pending_line = lineno
                continue
            lit = literal(tok, lineno, col)
            if lit == 0:
                if pending_prob is not None and not pending:
                    raise ParseError("probability not followed by any literal", lineno, col)
                source_clauses += 1
                clause = normalize_clause(pending)
                _add_clause(inst, clause, pending_prob)
                pending = []
                pending_prob = None
            else:
                if not pending:
                    pending_line = lineno
                pending.append(lit)
    if pending or pending_prob is not None:
        raise ParseError("clause not terminated by 0", pending_line)

    for lineno, offset, expr_text in cost_lines:
        try:
            term = costfn.parse_cost(expr_text, inst.declared_params)
        except UndeclaredParameterError as exc:
            raise ParseError(f"f({exc.var}) is not a declared parameter atom (missing from 'pats')",
                             lineno, offset + exc.position + 1) from None
        except CostSyntaxError as exc:
            raise ParseError(exc.message, lineno, offset + exc.position + 1) from None
        inst.cost_terms.append(term)

    if source_clauses != num_clauses:
        msg = f"header declares {num_clauses} clauses, found {source_clauses}"
        if strict:
            raise ParseError(msg, header_line)
        warnings.warn(msg, HeaderCountWarning, stacklevel=3)
    return inst


def _tokens(line: str, offset: int):
    """Yield (token, 1-based column) pairs."""
    i = 0
    n = len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not line[j].isspace():
            j += 1
        yield line[i:j], offset + i + 1
        i = j


def _add_clause(inst: ProblemInstance, clause: Clause, p: Optional[float]):
    if p is None or p == 1.0:
        inst.hard_clauses.append(clause)
    elif p == 0.0:
        # the clause is false in every model: each of its literals is false
        for lit in clause:
            inst.hard_clauses.append((-lit,))
    else:
        inst.prob_clauses.append((clause, p))


def parse_dimacs(text, strict: bool = False) -> ProblemInstance:
    return _parse(text, header_tag="cnf", allow_prob=False, allow_trailer=False, strict=strict)


def parse_pcnf(text, strict: bool = False) -> ProblemInstance:
    return _parse(text, header_tag="pcnf", allow_prob=True, allow_trailer=True, strict=strict)


def parse_enhanced(text, strict: bool = False) -> ProblemInstance:
    return _parse(text, header_tag="cnf", allow_prob=False, allow_trailer=True, strict=strict)


_PARSERS = {"dimacs": parse_dimacs, "pcnf": parse_pcnf, "enhanced": parse_enhanced}


def parse(text, fmt: Optional[str] = None, strict: bool = False) -> ProblemInstance:
    """Parse with an explicit format tag, or auto-detect it."""
    if fmt is None:
        fmt = detect_format(text)
    if fmt not in _PARSERS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    return _PARSERS[fmt](text, strict=strict)


def read_file(path, fmt: Optional[str] = None, strict: bool = False) -> ProblemInstance:
    with open(path, "rb") as fh:
        return parse(fh.read(), fmt, strict)


def dumps(inst: ProblemInstance) -> str:
    """Serialize so that :func:`parse` reproduces ``inst``."""
    has_prob = bool(inst.prob_clauses)
    lines = [f"p {'pcnf' if has_prob else 'cnf'} {inst.num_vars} {len(inst.hard_clauses) + len(inst.prob_clauses)}"]
    for c in inst.hard_clauses:
        lines.append(" ".join(map(str, c)) + " 0")
    for c, p in inst.prob_clauses:
        lines.append(f"{_prob(p)} " + " ".join(map(str, c)) + " 0")
    if inst.declared_params:
        lines.append("pats " + " ".join(map(str, sorted(inst.declared_params))))
    for t in inst.cost_terms:
        lines.append("cost " + costfn.to_string(t))
    for q in inst.queries:
        lines.append("query " + " ".join(map(str, q)) + " 0")
    return "\n".join(lines) + "\n"


def _prob(p: float) -> str:
    s = repr(float(p))
    # the probability token must carry a decimal point
    if "." not in s:
        s = s.replace("e", ".0e") if "e" in s else s + ".0"
    return s
