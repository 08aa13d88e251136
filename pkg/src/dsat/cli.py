"""Command-line front end.

Exit codes: 10 satisfiable and converged, 20 unsatisfiable, 30 sampling
budget exhausted before the cost threshold was met, 1 input error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

from . import oracle, parsers
from .cdcl import SolverConfig
from .model import normalize_clause
from .sampler import (BUDGET_EXHAUSTED, CONVERGED, UNSAT, SampleResult, SamplerConfig,
                      SamplingInterrupted, project_and_report, sample)
from .translate import CoreProblem, translate

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_BUDGET = 30
EXIT_INPUT_ERROR = 1

OUTPUT_MODES = ("counts", "repeated", "json")


@dataclass
class RunOptions:
    input_path: str
    format_override: Optional[str] = None
    epsilon: float = 0.01
    min_models: int = 1
    max_models: int = 10000
    seed: int = 0
    threads: int = 1
    strict_parsing: bool = False
    output_mode: str = "counts"
    queries: list[str] = field(default_factory=list)
    oracle: bool = False
    restart_policy: str = "glucose_lbd"
    bump_scale: float = 10.0


class InputError(ValueError):
    pass


def parse_query(text: str, num_vars: int) -> tuple[int, ...]:
    toks = text.split()
    if toks and toks[-1] == "0":
        toks = toks[:-1]
    try:
        lits = [int(t) for t in toks]
    except ValueError:
        raise InputError(f"query {text!r}: literals must be integers") from None
    if not lits or 0 in lits:
        raise InputError(f"query {text!r}: expected one nonempty clause such as '1 -2 0'")
    for lit in lits:
        if abs(lit) > num_vars:
            raise InputError(f"query {text!r}: variable {abs(lit)} out of range 1..{num_vars}")
    return normalize_clause(lits)


def _oracle_report(core: CoreProblem) -> dict:
    if core.num_vars > oracle.MAX_VARS:
        return {"skipped": f"more than {oracle.MAX_VARS} variables"}
    models = oracle.enumerate_models(core.hard_clauses, core.num_vars)
    projected = models.project(core.num_original_vars) if models else models
    achievable = oracle.exact_achievable(core) if models else math.inf
    return {"models": len(projected), "achievable": None if math.isinf(achievable) else achievable}


def _fmt(x: float) -> str:
    return repr(float(x))


def render_text(result: SampleResult, core: CoreProblem, mode: str, oracle_info: Optional[dict] = None) -> str:
    out = []
    if result.status == UNSAT:
        out.append("s UNSATISFIABLE")
    else:
        out.append("s SATISFIABLE")
        view = project_and_report(result, core.num_original_vars)
        out.append(f"c status {result.status}")
        out.append(f"c models {view.total}")
        for rep in view.models:
            lits = " ".join(map(str, rep.model.literals()))
            line = f"v {lits} 0" if lits else "v 0"
            if mode == "repeated":
                out.extend([line] * rep.count)
            else:
                out.append(f"{line} # count={rep.count} prob={_fmt(rep.probability)}")
        out.append(f"c cost {_fmt(result.final_cost)}")
        for i in range(len(core.queries)):
            out.append(f"c query {i} {_fmt(view.query_answers[i])}")
    if oracle_info is not None:
        if "skipped" in oracle_info:
            out.append(f"c oracle skipped: {oracle_info['skipped']}")
        else:
            out.append(f"c oracle models {oracle_info['models']}")
            ach = oracle_info["achievable"]
            out.append(f"c oracle achievable {'inf' if ach is None else _fmt(ach)}")
    return "\n".join(out) + "\n"


def render_json(result: SampleResult, core: CoreProblem, options: RunOptions,
                oracle_info: Optional[dict] = None) -> str:
    doc: dict = {"status": result.status, "N": 0, "final_cost": None, "models": [], "queries": []}
    if result.status != UNSAT:
        view = project_and_report(result, core.num_original_vars)
        doc["N"] = view.total
        doc["final_cost"] = result.final_cost
        doc["models"] = [
            {"literals": rep.model.literals(), "count": rep.count, "prob": rep.probability}
            for rep in view.models
        ]
        doc["queries"] = [
            {"index": i, "clause": list(q), "prob": view.query_answers[i]}
            for i, q in enumerate(core.queries)
        ]
    else:
        doc["queries"] = [{"index": i, "clause": list(q), "prob": None} for i, q in enumerate(core.queries)]
    doc["seed"] = options.seed
    doc["config"] = {
        "format": options.format_override,
        "epsilon": options.epsilon,
        "min_models": options.min_models,
        "max_models": options.max_models,
        "threads": options.threads,
        "strict": options.strict_parsing,
        "restart_policy": options.restart_policy,
        "bump_scale": options.bump_scale,
    }
    if oracle_info is not None:
        doc["oracle"] = oracle_info
    return json.dumps(doc, indent=2) + "\n"


EXIT_CODES = {CONVERGED: EXIT_SAT, UNSAT: EXIT_UNSAT, BUDGET_EXHAUSTED: EXIT_BUDGET}


def run(options: RunOptions, stdout: TextIO = sys.stdout, stderr: TextIO = sys.stderr) -> int:
    try:
        if options.output_mode not in OUTPUT_MODES:
            raise InputError(f"unknown output mode {options.output_mode!r}")
        try:
            with open(options.input_path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {options.input_path}: {exc.strerror}") from None
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", parsers.HeaderCountWarning)
            instance = parsers.parse(data, options.format_override, strict=options.strict_parsing)
        for w in caught:
            print(f"warning: {options.input_path}: {w.message}", file=stderr)
        for q in options.queries:
            instance.queries.append(parse_query(q, instance.num_vars))
        core = translate(instance)
        sconfig = SamplerConfig(epsilon=options.epsilon, min_models=options.min_models,
                                max_models=options.max_models, bump_scale=options.bump_scale,
                                portfolio_width=options.threads, seed=options.seed)
        solver_config = SolverConfig(seed=options.seed, restart_policy=options.restart_policy)
    except (parsers.ParseError, InputError, ValueError) as exc:
        print(f"error: {options.input_path}: {exc}", file=stderr)
        return EXIT_INPUT_ERROR

    try:
        result = sample(core, sconfig, solver_config)
    except SamplingInterrupted as exc:
        result = exc.partial
        print(f"error: solver resource limit: {exc}", file=stderr)
    except ArithmeticError as exc:
        print(f"error: cost evaluation failed: {exc}", file=stderr)
        return EXIT_INPUT_ERROR

    oracle_info = _oracle_report(core) if options.oracle else None
    if options.output_mode == "json":
        stdout.write(render_json(result, core, options, oracle_info))
    else:
        stdout.write(render_text(result, core, options.output_mode, oracle_info))
    return EXIT_CODES[result.status]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dsat", description="CDCL SAT solving and gradient-steered model multiset sampling.")
    p.add_argument("input", help="DIMACS, PCNF or enhanced CNF file")
    p.add_argument("--format", choices=parsers.FORMATS, default=None, help="skip format auto-detection")
    p.add_argument("--epsilon", type=float, default=0.01, help="cost threshold for convergence (default 0.01)")
    p.add_argument("-n", "--min-models", type=int, default=1, help="minimum number of models to sample")
    p.add_argument("--max-models", type=int, default=10000, help="sampling budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="portfolio width")
    p.add_argument("--strict", action="store_true", help="header clause count mismatch is an error")
    p.add_argument("--output", choices=OUTPUT_MODES, default="counts")
    p.add_argument("--query", action="append", default=[], metavar="CLAUSE",
                   help='query clause, e.g. "1 -2 0" (repeatable)')
    p.add_argument("--oracle", action="store_true", help="also report brute-force statistics (small instances)")
    p.add_argument("--restarts", choices=("glucose_lbd", "luby"), default="glucose_lbd")
    p.add_argument("--bump-scale", type=float, default=10.0)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    options = RunOptions(
        input_path=args.input,
        format_override=args.format,
        epsilon=args.epsilon,
        min_models=args.min_models,
        max_models=args.max_models,
        seed=args.seed,
        threads=args.threads,
        strict_parsing=args.strict,
        output_mode=args.output,
        queries=list(args.query),
        oracle=args.oracle,
        restart_policy=args.restarts,
        bump_scale=args.bump_scale,
    )
    return run(options)


if __name__ == "__main__":
    sys.exit(main())
