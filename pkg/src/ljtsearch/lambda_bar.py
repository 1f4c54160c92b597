"""Finite proof terms: lambdas and head variables applied to tuples.

Terms are identified up to renaming of bound variables; equality and
hashing go through a canonical form in which bound variables are
numbered by traversal order, so terms can live in sets and dicts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .core import (
    Atom,
    Context,
    Formula,
    Imp,
    ParseError,
    Sequent,
    TokenStream,
    _parse_formula_stream,
    decompose,
    format_formula,
    fresh_name,
    tokenize,
)


@dataclass(frozen=True, eq=False)
class Lam:
    var: str
    ann: Formula
    body: "ProofTerm"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, (Lam, App)) and canonical(self) == canonical(other)

    def __hash__(self) -> int:
        return hash(canonical(self))

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True, eq=False)
class App:
    head: str
    args: tuple["ProofTerm", ...] = ()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, (Lam, App)) and canonical(self) == canonical(other)

    def __hash__(self) -> int:
        return hash(canonical(self))

    def __str__(self) -> str:
        return format_term(self)


ProofTerm = Union[Lam, App]


def var(name: str) -> App:
    return App(name, ())


def term_size(t: ProofTerm) -> int:
    if isinstance(t, Lam):
        return 1 + term_size(t.body)
    return 1 + sum(term_size(a) for a in t.args)


def free_vars(t: ProofTerm) -> frozenset[str]:
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    out = frozenset([t.head])
    for a in t.args:
        out |= free_vars(a)
    return out


def canonical(t: ProofTerm) -> str:
    """Canonical print: bound variables numbered by traversal order."""
    return _canon(t, {}, 0)


def _canon(t: ProofTerm, env: dict[str, str], depth: int) -> str:
    if isinstance(t, Lam):
        env2 = dict(env)
        env2[t.var] = f"%{depth}"
        return f"\\%{depth}:{format_formula(t.ann)}. {_canon(t.body, env2, depth + 1)}"
    head = env.get(t.head, t.head)
    if not t.args:
        return head
    return f"{head}<{', '.join(_canon(a, env, depth) for a in t.args)}>"


def rename(t: ProofTerm, frm: str, to: str) -> ProofTerm:
    """Capture-avoiding substitution of variable `to` for variable `frm`."""
    if isinstance(t, Lam):
        if t.var == frm:
            return t
        if t.var == to and frm in free_vars(t.body):
            fresh = fresh_name("z", free_vars(t.body) | {frm, to})
            body = rename(t.body, t.var, fresh)
            return Lam(fresh, t.ann, rename(body, frm, to))
        return Lam(t.var, t.ann, rename(t.body, frm, to))
    head = to if t.head == frm else t.head
    return App(head, tuple(rename(a, frm, to) for a in t.args))


# ---------------------------------------------------------------------------
# Typing


def typecheck(ctx: Context, t: ProofTerm, goal: Formula) -> bool:
    return typecheck_explain(ctx, t, goal) is None


def typecheck_explain(ctx: Context, t: ProofTerm, goal: Formula) -> Optional[str]:
    """None when derivable; otherwise a message locating the first failure."""
    if isinstance(t, Lam):
        if not isinstance(goal, Imp):
            return f"lambda {t.var} checked against non-implication {format_formula(goal)}"
        if t.ann != goal.left:
            return (
                f"annotation {format_formula(t.ann)} on {t.var} differs from "
                f"{format_formula(goal.left)}"
            )
        if t.var in ctx:
            fresh = fresh_name("z", set(ctx.dom) | free_vars(t.body))
            return typecheck_explain(ctx, Lam(fresh, t.ann, rename(t.body, t.var, fresh)), goal)
        return typecheck_explain(ctx.extend(t.var, t.ann), t.body, goal.right)
    if not isinstance(goal, Atom):
        return f"application of {t.head} checked against non-atom {format_formula(goal)}"
    declared = ctx.get(t.head)
    if declared is None:
        return f"head variable {t.head} not declared"
    args, target = decompose(declared)
    if target != goal:
        return f"{t.head} proves {target.name}, goal is {goal.name}"
    if len(args) != len(t.args):
        return f"{t.head} expects {len(args)} arguments, got {len(t.args)}"
    for sub, formula in zip(t.args, args):
        msg = typecheck_explain(ctx, sub, formula)
        if msg is not None:
            return msg
    return None


# ---------------------------------------------------------------------------
# Brute-force enumeration (the independent oracle)


def enumerate_proofs(s: Sequent, max_depth: int) -> list[ProofTerm]:
    """All terms with a derivation of depth <= max_depth, up to alpha.

    Every rule application counts one level of depth.  Output is
    deduplicated and sorted by (size, canonical form).
    """
    found = _derivations(s.ctx, s.goal, max_depth)
    return _dedup_sorted(found)


def enumerate_proofs_sized(s: Sequent, max_size: int) -> list[ProofTerm]:
    """All terms of size <= max_size, up to alpha (size-bounded oracle)."""
    found = _derivations_sized(s.ctx, s.goal, max_size)
    return _dedup_sorted(found)


def _dedup_sorted(found: Iterable[ProofTerm]) -> list[ProofTerm]:
    best: dict[str, ProofTerm] = {}
    for t in found:
        best.setdefault(canonical(t), t)
    return [best[k] for k in sorted(best, key=lambda k: (term_size(best[k]), k))]


def _derivations(ctx: Context, goal: Formula, depth: int) -> list[ProofTerm]:
    if depth <= 0:
        return []
    if isinstance(goal, Imp):
        x = fresh_name("z", ctx.dom)
        return [Lam(x, goal.left, b) for b in _derivations(ctx.extend(x, goal.left), goal.right, depth - 1)]
    out: list[ProofTerm] = []
    for name, formula in ctx:
        args, target = decompose(formula)
        if target != goal:
            continue
        per_arg = [_derivations(ctx, a, depth - 1) for a in args]
        for combo in itertools.product(*per_arg):
            out.append(App(name, combo))
    return out


def _derivations_sized(ctx: Context, goal: Formula, size: int) -> list[ProofTerm]:
    if size <= 0:
        return []
    if isinstance(goal, Imp):
        x = fresh_name("z", ctx.dom)
        return [Lam(x, goal.left, b) for b in _derivations_sized(ctx.extend(x, goal.left), goal.right, size - 1)]
    out: list[ProofTerm] = []
    for name, formula in ctx:
        args, target = decompose(formula)
        if target != goal:
            continue
        if len(args) > size - 1:
            continue
        for combo in _arg_combos(ctx, args, size - 1):
            out.append(App(name, combo))
    return out


def _arg_combos(ctx: Context, formulas: tuple[Formula, ...], budget: int) -> list[tuple[ProofTerm, ...]]:
    if not formulas:
        return [()]
    head_budget = budget - len(formulas) + 1
    out: list[tuple[ProofTerm, ...]] = []
    for t in _derivations_sized(ctx, formulas[0], head_budget):
        for rest in _arg_combos(ctx, formulas[1:], budget - term_size(t)):
            out.append((t,) + rest)
    return out


# ---------------------------------------------------------------------------
# Concrete syntax


def format_term(t: ProofTerm) -> str:
    if isinstance(t, Lam):
        return f"\\{t.var}:{format_formula(t.ann)}. {format_term(t.body)}"
    if not t.args:
        return t.head
    return f"{t.head}<{', '.join(format_term(a) for a in t.args)}>"


def parse_term(text: str) -> ProofTerm:
    ts = TokenStream(tokenize(text))
    t = _parse_term_stream(ts)
    ts.expect("eof")
    return t


def _parse_term_stream(ts: TokenStream) -> ProofTerm:
    tok = ts.peek()
    if tok.kind == "punct" and tok.text == "\\":
        ts.next()
        name = ts.expect("ident").text
        ts.expect("punct", ":")
        ann = _parse_formula_stream(ts)
        ts.expect("punct", ".")
        return Lam(name, ann, _parse_term_stream(ts))
    if tok.kind == "ident":
        ts.next()
        args: list[ProofTerm] = []
        if ts.at("punct", "<"):
            ts.next()
            if not ts.at("punct", ">"):
                while True:
                    args.append(_parse_term_stream(ts))
                    if ts.at("punct", ","):
                        ts.next()
                        continue
                    break
            ts.expect("punct", ">")
        return App(tok.text, tuple(args))
    raise ParseError(f"expected proof term, found {tok.text or 'end of input'!r}", tok.pos)
