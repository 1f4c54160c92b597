"""Decision procedures over finitary representations.

Inhabitation and solvability are the least and greatest fixed points of
the same boolean system read off the cyclic term: a lambda is as good
as its body, a sum as good as its best alternative, an alternative as
good as its worst argument, and an occurrence stands for its binder.
Saturating an occurrence's context only renames head variables, which
neither creates nor destroys members, so verdicts transfer unchanged
through occurrences.

Enumeration unfolds the interpreted truncation at just enough fuel for
the requested size bound; the fuel accounting guarantees enumeration
never reaches a cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import Sequent, Ternary
from .forest import Cut, FLam, Forest, Sum
from .finitary import (
    FinAlt,
    FinGfp,
    FinLam,
    FinSum,
    FinTerm,
    FpOcc,
    fpv,
    is_strongly_regular,
    is_well_bound,
    represent,
)
from .lambda_bar import App, Lam, ProofTerm, canonical, term_size
from .semantics import EMPTY_ENV, interpret


@dataclass(frozen=True)
class Verdict:
    inhabited: bool
    solvable: bool
    finitely_inhabited: Ternary
    witness: Optional[ProofTerm]


def _require_analyzable(t: FinTerm) -> None:
    if fpv(t):
        raise ValueError("term has free fixed-point variables")
    if not is_well_bound(t):
        raise ValueError("term is not well-bound")
    if not is_strongly_regular(t):
        raise ValueError("term is not strongly regular")


# ---------------------------------------------------------------------------
# The boolean system on the cyclic term graph


def _build_graph(t: FinTerm) -> tuple[list, int]:
    """Flatten to positions: ("lam", child) | ("sum", alts) | ("gfp", alts)
    | ("alt", args) | ("occ", binder)."""
    nodes: list = []

    def add(entry) -> int:
        nodes.append(entry)
        return len(nodes) - 1

    def walk(term, fpenv: dict[str, int]) -> int:
        if isinstance(term, FinLam):
            return add(("lam", walk(term.body, fpenv)))
        if isinstance(term, FinGfp):
            idx = add(None)  # reserve: alternatives may refer back here
            env2 = dict(fpenv)
            env2[term.var] = idx
            nodes[idx] = ("gfp", tuple(walk_alt(a, env2) for a in term.alts))
            return idx
        if isinstance(term, FinSum):
            return add(("sum", tuple(walk_alt(a, fpenv) for a in term.alts)))
        if isinstance(term, FpOcc):
            return add(("occ", fpenv[term.var]))
        raise TypeError(f"not a finitary term: {term!r}")

    def walk_alt(a: FinAlt, fpenv: dict[str, int]) -> int:
        return add(("alt", tuple(walk(x, fpenv) for x in a.args)))

    root = walk(t, {})
    return nodes, root


def _fixpoint(nodes: list, start: bool) -> dict[int, bool]:
    unknowns = {i: start for i, n in enumerate(nodes) if n[0] == "gfp"}
    while True:
        memo: dict[int, bool] = {}

        def val(i: int) -> bool:
            if i in memo:
                return memo[i]
            tag, payload = nodes[i]
            if tag == "lam":
                r = val(payload)
            elif tag in ("sum", "gfp"):
                r = any(val(j) for j in payload) if tag == "sum" else unknowns[i]
            elif tag == "alt":
                r = all(val(j) for j in payload)
            else:
                r = unknowns[payload]
            memo[i] = r
            return r

        nxt = {i: any(val(j) for j in nodes[i][1]) for i in unknowns}
        if nxt == unknowns:
            return unknowns
        unknowns = nxt


def _evaluate(nodes: list, root: int, unknowns: dict[int, bool]) -> bool:
    memo: dict[int, bool] = {}

    def val(i: int) -> bool:
        if i in memo:
            return memo[i]
        tag, payload = nodes[i]
        if tag == "lam":
            r = val(payload)
        elif tag == "sum":
            r = any(val(j) for j in payload)
        elif tag == "gfp":
            r = unknowns[i]
        elif tag == "alt":
            r = all(val(j) for j in payload)
        else:
            r = unknowns[payload]
        memo[i] = r
        return r

    return val(root)


def decide_inhabited(t: FinTerm) -> bool:
    """Does the described space contain a finite solution?  (least fixed point)"""
    _require_analyzable(t)
    nodes, root = _build_graph(t)
    return _evaluate(nodes, root, _fixpoint(nodes, start=False))


def decide_solvable(t: FinTerm) -> bool:
    """Does it contain any solution, finite or not?  (greatest fixed point)"""
    _require_analyzable(t)
    nodes, root = _build_graph(t)
    return _evaluate(nodes, root, _fixpoint(nodes, start=True))


def decide_finite(t: FinTerm) -> Ternary:
    """Are there only finitely many finite solutions?

    No exactly when some occurrence is reachable through alternatives
    whose arguments are all inhabited and its binder is inhabited: the
    loop can then be taken any number of times and each pass grows the
    completed solution.  Context saturation along the loop only renames
    heads, so it cannot turn this criterion stale; the check is exact
    on closed strongly regular terms and Unknown is never needed.
    """
    _require_analyzable(t)
    nodes, root = _build_graph(t)
    unknowns = _fixpoint(nodes, start=False)
    memo: dict[int, bool] = {}

    def inh(i: int) -> bool:
        if i not in memo:
            tag, payload = nodes[i]
            if tag == "lam":
                memo[i] = inh(payload)
            elif tag == "sum":
                memo[i] = any(inh(j) for j in payload)
            elif tag == "gfp":
                memo[i] = unknowns[i]
            elif tag == "alt":
                memo[i] = all(inh(j) for j in payload)
            else:
                memo[i] = unknowns[payload]
        return memo[i]

    visited: set[int] = set()
    live_cycle = False

    def visit(i: int) -> None:
        nonlocal live_cycle
        if i in visited:
            return
        visited.add(i)
        tag, payload = nodes[i]
        if tag == "lam":
            visit(payload)
        elif tag in ("sum", "gfp"):
            for j in payload:
                visit(j)
        elif tag == "alt":
            if all(inh(j) for j in payload):
                for j in payload:
                    visit(j)
        else:
            if unknowns[payload]:
                live_cycle = True

    visit(root)
    return Ternary.NO if live_cycle else Ternary.YES


# ---------------------------------------------------------------------------
# Enumeration


def enumerate_members(t: FinTerm, max_size: int) -> list[ProofTerm]:
    """The finite members of the described space with size <= max_size,
    deduplicated up to alpha and sorted by (size, canonical form)."""
    _require_analyzable(t)
    if max_size < 0:
        raise ValueError("max_size must be >= 0")
    forest = interpret(t, EMPTY_ENV, max_size + 1)
    memo: dict[tuple[int, int], list[ProofTerm]] = {}
    found = _members(forest, max_size, memo)
    best: dict[str, ProofTerm] = {}
    for m in found:
        best.setdefault(canonical(m), m)
    return [best[k] for k in sorted(best, key=lambda k: (term_size(best[k]), k))]


def _members(f: Forest, budget: int, memo: dict) -> list[ProofTerm]:
    if budget <= 0:
        return []
    key = (id(f), budget)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(f, Cut):
        # fuel = max_size + 1 puts every cut strictly below any affordable depth
        raise RuntimeError("enumeration reached a cut; fuel accounting is broken")
    if isinstance(f, FLam):
        out = [Lam(f.var, f.ann, b) for b in _members(f.body, budget - 1, memo)]
    else:
        out = []
        for alt in f.alts:
            for combo in _arg_members(alt.args, budget - 1, memo):
                out.append(App(alt.head, combo))
    memo[key] = out
    return out


def _arg_members(args: tuple[Forest, ...], budget: int, memo: dict) -> list[tuple[ProofTerm, ...]]:
    if not args:
        return [()]
    if budget < len(args):
        return []
    out = []
    for first in _members(args[0], budget - len(args) + 1, memo):
        for rest in _arg_members(args[1:], budget - term_size(first), memo):
            out.append((first,) + rest)
    return out


def count_members(t: FinTerm, max_size: int) -> int:
    return len(enumerate_members(t, max_size))


# ---------------------------------------------------------------------------
# Putting it together


def verdict_for(s: Sequent, witness_bound: int = 12) -> Verdict:
    """Run every decision on the sequent's finitary representation."""
    t = represent(s)
    inhabited = decide_inhabited(t)
    solvable = decide_solvable(t)
    finite = decide_finite(t)
    witness = None
    if inhabited:
        bound = witness_bound
        while witness is None:
            members = enumerate_members(t, bound)
            if members:
                witness = members[0]
            else:
                bound *= 2
    return Verdict(inhabited, solvable, finite, witness)
