"""Command-line front end for batch queries.

Exit codes: 0 success (and positive answers for predicate commands),
1 negative answer from a predicate command, 2 parse or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, Optional

from .analysis import count_members, enumerate_members, verdict_for
from .core import ParseError, Sequent, Ternary, parse_sequent
from .finitary import elide_vacuous_gfp, fin_to_tree, format_fin, represent
from .forest import expand, forest_to_tree, format_forest
from .lambda_bar import format_term, parse_term, typecheck_explain
from .semantics import EMPTY_ENV, check_equivalence, interpret

DEFAULT_FUEL = 8
DEFAULT_MAX_SIZE = 12


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ljtsearch",
        description="Proof search over the implicational fragment: finitary "
        "representations, truncated search spaces, inhabitant analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, sequent_arg: bool = True) -> None:
        if sequent_arg:
            p.add_argument("sequent", nargs="?", help="sequent, e.g. 'x: p |- p -> p'")
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
        p.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE)
        p.add_argument("--json", action="store_true", help="machine-tree output")
        p.add_argument("--seed", type=int, default=None, help="reserved for scripted corpus runs")
        p.add_argument("--corpus", metavar="FILE", help="one sequent per line, # comments")

    for name, doc in [
        ("represent", "print the finitary representation of the sequent"),
        ("expand", "print the truncated search space at the given fuel"),
        ("interp", "interpret the finitary representation back at the given fuel"),
        ("equiv", "check representation and direct expansion agree at the given fuel"),
        ("check", "typecheck a proof term (--term) against the sequent"),
        ("inhabit", "list inhabitants up to --max-size"),
        ("decide", "print the inhabitation/solvability verdict"),
        ("count", "count inhabitants up to --max-size"),
    ]:
        p = sub.add_parser(name, help=doc)
        common(p)
        if name == "check":
            p.add_argument("--term", required=True, help="proof term, e.g. '\\x:p. x'")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        sequents = _gather_sequents(args)
    except (ParseError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    worst = 0
    for label, sequent in sequents:
        if label:
            print(label)
        try:
            code = _run_one(args, sequent)
        except ParseError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        worst = max(worst, code)
    return worst


def _gather_sequents(args) -> list[tuple[str, Sequent]]:
    if args.corpus:
        out = []
        with open(args.corpus, encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                out.append((f"[{i}] {line}", parse_sequent(line)))
        return out
    if not args.sequent:
        raise ValueError("a sequent (or --corpus FILE) is required")
    return [("", parse_sequent(args.sequent))]


def _run_one(args, sequent: Sequent) -> int:
    command: str = args.command
    if command == "represent":
        term = elide_vacuous_gfp(represent(sequent))
        print(json.dumps(fin_to_tree(term), indent=2) if args.json else format_fin(term))
        return 0
    if command == "expand":
        forest = expand(sequent, args.fuel)
        print(json.dumps(forest_to_tree(forest), indent=2) if args.json else format_forest(forest))
        return 0
    if command == "interp":
        forest = interpret(represent(sequent), EMPTY_ENV, args.fuel)
        print(json.dumps(forest_to_tree(forest), indent=2) if args.json else format_forest(forest))
        return 0
    if command == "equiv":
        ok = check_equivalence(sequent, args.fuel)
        print(f"equivalent: {str(ok).lower()}")
        return 0 if ok else 1
    if command == "check":
        term = parse_term(args.term)
        problem = typecheck_explain(sequent.ctx, term, sequent.goal)
        print(f"well-typed: {str(problem is None).lower()}")
        if problem is not None:
            print(f"reason: {problem}")
        return 0 if problem is None else 1
    if command == "inhabit":
        members = enumerate_members(represent(sequent), args.max_size)
        if args.json:
            print(json.dumps([format_term(m) for m in members], indent=2))
        else:
            for m in members:
                print(format_term(m))
        return 0
    if command == "decide":
        verdict = verdict_for(sequent)
        if args.json:
            print(
                json.dumps(
                    {
                        "inhabited": verdict.inhabited,
                        "solvable": verdict.solvable,
                        "finitely_inhabited": verdict.finitely_inhabited.value,
                        "witness": None if verdict.witness is None else format_term(verdict.witness),
                    },
                    indent=2,
                )
            )
        else:
            line = (
                f"inhabited: {str(verdict.inhabited).lower()}, "
                f"solvable: {str(verdict.solvable).lower()}, "
                f"finitely inhabited: {verdict.finitely_inhabited.value}"
            )
            print(line)
            if verdict.witness is not None:
                print(f"witness: {format_term(verdict.witness)}")
        return 0 if verdict.inhabited else 1
    if command == "count":
        print(count_members(represent(sequent), args.max_size))
        return 0
    raise ValueError(f"unknown command {command!r}")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
