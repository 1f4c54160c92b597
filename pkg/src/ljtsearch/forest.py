"""Depth-bounded truncations of solution-space trees.

`expand` unfolds the search space of a sequent down to a fuel bound,
marking everything beyond the horizon with a cut node (`?`).  Sums of
elimination alternatives behave as finite sets: `+` is associative,
commutative and idempotent with unit `O`.  Fuel is consumed at lambda
and alternative nodes, never at sums.

The cut marker is neutral in three-valued fashion: bisimilarity treats
it as a wildcard, membership reports Unknown when a derivation reaches
it, and typechecking accepts it at any formula.  A truncation must
never manufacture an answer the full infinite tree would contradict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .core import (
    Atom,
    Context,
    Formula,
    Imp,
    ParseError,
    Sequent,
    Ternary,
    TokenStream,
    _parse_formula_stream,
    context_leq,
    decompose,
    format_formula,
    fresh_name,
    ternary_and,
    ternary_or,
    tokenize,
)
from .lambda_bar import App, Lam as TermLam, ProofTerm


class _Node:
    """Shared caching for canonical forms and free variables."""

    __slots__ = ("_ctree", "_ckey", "_free")

    def _init_caches(self) -> None:
        object.__setattr__(self, "_ctree", None)
        object.__setattr__(self, "_ckey", None)
        object.__setattr__(self, "_free", None)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _Node):
            return NotImplemented
        return canonical_key(self) == canonical_key(other)

    def __hash__(self) -> int:
        return hash(canonical_key(self))


@dataclass(frozen=True, eq=False)
class FLam(_Node):
    var: str
    ann: Formula
    body: "Forest"

    def __post_init__(self) -> None:
        self._init_caches()

    def __str__(self) -> str:
        return format_forest(self)


@dataclass(frozen=True, eq=False)
class Sum(_Node):
    alts: tuple["EAlt", ...]

    def __post_init__(self) -> None:
        self._init_caches()

    def __str__(self) -> str:
        return format_forest(self)


@dataclass(frozen=True, eq=False)
class Cut(_Node):
    def __post_init__(self) -> None:
        self._init_caches()

    def __str__(self) -> str:
        return "?"


@dataclass(frozen=True, eq=False)
class EAlt(_Node):
    head: str
    args: tuple["Forest", ...] = ()

    def __post_init__(self) -> None:
        self._init_caches()

    def __str__(self) -> str:
        return _format_alt(self)


Forest = Union[FLam, Sum, Cut]

CUT = Cut()
EMPTY = Sum(())


def summed(alts: Iterable[EAlt]) -> Sum:
    """Sum as a set: deduplicate up to alpha, keep first-seen order."""
    seen: set[str] = set()
    out: list[EAlt] = []
    for alt in alts:
        key = canonical_key(alt)
        if key not in seen:
            seen.add(key)
            out.append(alt)
    return Sum(tuple(out))


def is_total(f: Forest) -> bool:
    """True when no cut marker occurs (the truncation is the whole tree)."""
    if isinstance(f, Cut):
        return False
    if isinstance(f, FLam):
        return is_total(f.body)
    return all(is_total(a) for alt in f.alts for a in alt.args)


def free_names(node) -> frozenset[str]:
    cached = node._free
    if cached is None:
        if isinstance(node, Cut):
            cached = frozenset()
        elif isinstance(node, FLam):
            cached = free_names(node.body) - {node.var}
        elif isinstance(node, Sum):
            cached = frozenset().union(*(free_names(a) for a in node.alts)) if node.alts else frozenset()
        else:
            cached = frozenset([node.head]).union(*(free_names(a) for a in node.args))
        object.__setattr__(node, "_free", cached)
    return cached


# ---------------------------------------------------------------------------
# Canonical forms (de Bruijn references, sums sorted) for alpha/set equality


def canonical_tree(node):
    return _ctree(node, {}, 0)


def canonical_key(node) -> str:
    key = node._ckey
    if key is None:
        key = repr(canonical_tree(node))
        object.__setattr__(node, "_ckey", key)
    return key


def _ctree(node, env: dict[str, int], depth: int):
    cacheable = not (free_names(node) & env.keys())
    if cacheable and node._ctree is not None:
        return node._ctree
    if isinstance(node, Cut):
        tree = ("cut",)
    elif isinstance(node, FLam):
        env2 = dict(env)
        env2[node.var] = depth
        tree = ("lam", format_formula(node.ann), _ctree(node.body, env2, depth + 1))
    elif isinstance(node, Sum):
        subs = [_ctree(a, env, depth) for a in node.alts]
        tree = ("sum", tuple(sorted(set(subs), key=repr)))
    else:
        href = ("b", depth - env[node.head] - 1) if node.head in env else ("f", node.head)
        tree = ("alt", href, tuple(_ctree(a, env, depth) for a in node.args))
    if cacheable:
        object.__setattr__(node, "_ctree", tree)
    return tree


# ---------------------------------------------------------------------------
# Expansion of solution spaces


_EXPAND_MEMO: dict[tuple, Forest] = {}


def expand(s: Sequent, fuel: int) -> Forest:
    """Truncation of the full search space of `s` at the given fuel.

    Implication goals produce one lambda per argument formula; atomic
    goals produce the sum over all hypotheses whose target matches,
    each alternative spawning the argument subspaces in the extended
    context.  Fresh bound variables follow the z1, z2, ... scheme.
    """
    if fuel < 0:
        raise ValueError("fuel must be >= 0")
    key = (s.ctx.decls, s.goal, fuel)
    hit = _EXPAND_MEMO.get(key)
    if hit is not None:
        return hit
    goal = s.goal
    if isinstance(goal, Imp):
        if fuel == 0:
            out: Forest = CUT
        else:
            x = fresh_name("z", s.ctx.dom)
            out = FLam(x, goal.left, expand(Sequent(s.ctx.extend(x, goal.left), goal.right), fuel - 1))
    else:
        heads = [(name, decompose(formula)) for name, formula in s.ctx if decompose(formula)[1] == goal]
        if not heads:
            out = EMPTY
        elif fuel == 0:
            out = CUT
        else:
            out = summed(
                EAlt(name, tuple(expand(Sequent(s.ctx, b), fuel - 1) for b in args))
                for name, (args, _) in heads
            )
    _EXPAND_MEMO[key] = out
    return out


# ---------------------------------------------------------------------------
# Bisimilarity up to depth


def bisim_upto(a: Forest, b: Forest, fuel: int) -> bool:
    """Equality up to depth `fuel`: sums as sets, binders up to alpha,
    cuts matching anything."""
    return bisim3(a, b, fuel) is not Ternary.NO


def bisim3(a: Forest, b: Forest, fuel: int) -> Ternary:
    """Like bisim_upto but Unknown when agreement rests on a cut."""
    return _bisim_trees(canonical_tree(a), canonical_tree(b), fuel, {})


def _bisim_trees(ta, tb, fuel: int, memo: dict) -> Ternary:
    if ta[0] == "cut" or tb[0] == "cut":
        return Ternary.UNKNOWN
    if fuel <= 0:
        return Ternary.YES
    key = (id(ta), id(tb), fuel)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if ta[0] != tb[0]:
        out = Ternary.NO
    elif ta[0] == "lam":
        out = Ternary.NO if ta[1] != tb[1] else _bisim_trees(ta[2], tb[2], fuel - 1, memo)
    elif ta[0] == "sum":
        out = ternary_and(
            [_covered(x, tb[1], fuel, memo) for x in ta[1]]
            + [_covered(y, ta[1], fuel, memo) for y in tb[1]]
        )
    else:  # alt
        if ta[1] != tb[1] or len(ta[2]) != len(tb[2]):
            out = Ternary.NO
        else:
            out = ternary_and(_bisim_trees(x, y, fuel - 1, memo) for x, y in zip(ta[2], tb[2]))
    memo[key] = out
    return out


def _covered(alt, alts, fuel: int, memo: dict) -> Ternary:
    return ternary_or(_bisim_trees(alt, other, fuel, memo) for other in alts)


# ---------------------------------------------------------------------------
# Membership


def mem(t: ProofTerm, f: Forest) -> Ternary:
    """Is the finite term one of the solutions superimposed in f?

    Yes/No when the answer is determined within the truncation,
    Unknown when the deciding region was cut off.
    """
    return _mem(_term_tree(t, {}, 0), canonical_tree(f))


def _term_tree(t: ProofTerm, env: dict[str, int], depth: int):
    if isinstance(t, TermLam):
        env2 = dict(env)
        env2[t.var] = depth
        return ("lam", format_formula(t.ann), _term_tree(t.body, env2, depth + 1))
    href = ("b", depth - env[t.head] - 1) if t.head in env else ("f", t.head)
    return ("alt", href, tuple(_term_tree(a, env, depth) for a in t.args))


def _mem(tt, tf) -> Ternary:
    if tf[0] == "cut":
        return Ternary.UNKNOWN
    if tt[0] == "lam":
        if tf[0] != "lam" or tt[1] != tf[1]:
            return Ternary.NO
        return _mem(tt[2], tf[2])
    # tt is an application; it can only live inside a sum
    if tf[0] != "sum":
        return Ternary.NO
    return ternary_or(_mem_alt(tt, alt) for alt in tf[1])


def _mem_alt(tt, alt) -> Ternary:
    if alt[0] == "cut":
        return Ternary.UNKNOWN
    if tt[1] != alt[1] or len(tt[2]) != len(alt[2]):
        return Ternary.NO
    return ternary_and(_mem(x, y) for x, y in zip(tt[2], alt[2]))


# ---------------------------------------------------------------------------
# Co-contraction


def cocontract(g_small: Context, g_big: Context, f: Forest) -> Forest:
    """Saturate head choices of f from g_small to the extension g_big.

    A head declared in g_small becomes the sum over all variables that
    receive the same formula in {head} ∪ (g_big ∖ g_small); other heads
    and all other nodes map structurally, cuts stay cuts.
    """
    if not context_leq(g_small, g_big):
        raise ValueError("co-contraction requires an inessential context extension")
    added = [(n, a) for n, a in g_big.decls if (n, a) not in g_small.decl_set()]
    used = set(g_big.dom) | free_names(f)
    counter = [0]

    def freshen(name: str) -> str:
        while True:
            counter[0] += 1
            cand = f"z{counter[0]}"
            if cand not in used:
                used.add(cand)
                return cand

    def go(node: Forest, ren: dict[str, str]) -> Forest:
        if isinstance(node, Cut):
            return CUT
        if isinstance(node, FLam):
            if node.var in used:
                new = freshen(node.var)
                ren2 = dict(ren)
                ren2[node.var] = new
                return FLam(new, node.ann, go(node.body, ren2))
            used.add(node.var)
            ren2 = dict(ren)
            ren2[node.var] = node.var
            return FLam(node.var, node.ann, go(node.body, ren2))
        return summed(alt for a in node.alts for alt in go_alt(a, ren))

    def go_alt(alt: EAlt, ren: dict[str, str]) -> list[EAlt]:
        args = tuple(go(a, ren) for a in alt.args)
        if alt.head in ren:  # bound inside f: untouched by the operation
            return [EAlt(ren[alt.head], args)]
        formula = g_small.get(alt.head)
        if formula is None:
            return [EAlt(alt.head, args)]
        heads = [alt.head] + [n for n, a in added if a == formula]
        return [EAlt(h, args) for h in heads]

    return go(f, {})


# ---------------------------------------------------------------------------
# Maximal co-contraction


def is_max_cocontracted(g: Context, f: Forest, fuel: int) -> Ternary:
    """Depth-bounded check that every sum is saturated: whenever x heads
    a summand, every variable of the same type in the local context
    extension heads a bisimilar summand too."""
    missing = free_names(f) - set(g.dom)
    if missing:
        raise ValueError(f"free variables not declared: {sorted(missing)}")
    return _mcc(f, dict(g.decls), fuel)


def _mcc(node: Forest, delta: dict[str, Formula], fuel: int) -> Ternary:
    if fuel <= 0:
        return Ternary.YES
    if isinstance(node, Cut):
        return Ternary.UNKNOWN
    if isinstance(node, FLam):
        delta2 = dict(delta)
        delta2[node.var] = node.ann
        return _mcc(node.body, delta2, fuel - 1)
    checks: list[Ternary] = []
    for alt in node.alts:
        formula = delta.get(alt.head)
        for other, other_formula in delta.items():
            if other == alt.head or other_formula != formula:
                continue
            checks.append(
                ternary_or(
                    _same_args(alt, cand, fuel) for cand in node.alts if cand.head == other
                )
            )
        for a in alt.args:
            checks.append(_mcc(a, delta, fuel - 1))
    return ternary_and(checks)


def _same_args(a: EAlt, b: EAlt, fuel: int) -> Ternary:
    if len(a.args) != len(b.args):
        return Ternary.NO
    return ternary_and(bisim3(x, y, fuel - 1) for x, y in zip(a.args, b.args))


# ---------------------------------------------------------------------------
# Typing of truncations (cut accepted at any formula)


def forest_typecheck(ctx: Context, f: Forest, goal: Formula) -> bool:
    return _ftc(f, dict(ctx.decls), goal)


def _ftc(node: Forest, env: dict[str, Formula], goal: Formula) -> bool:
    if isinstance(node, Cut):
        return True
    if isinstance(node, FLam):
        if not isinstance(goal, Imp) or node.ann != goal.left:
            return False
        env2 = dict(env)
        env2[node.var] = node.ann
        return _ftc(node.body, env2, goal.right)
    if not isinstance(goal, Atom):
        return False
    for alt in node.alts:
        declared = env.get(alt.head)
        if declared is None:
            return False
        args, target = decompose(declared)
        if target != goal or len(args) != len(alt.args):
            return False
        if not all(_ftc(a, env, b) for a, b in zip(alt.args, args)):
            return False
    return True


# ---------------------------------------------------------------------------
# Concrete syntax: `\x:A. N`, sums with `+`, `O` empty sum, `?` cut


def format_forest(f: Forest) -> str:
    if isinstance(f, Cut):
        return "?"
    if isinstance(f, FLam):
        return f"\\{f.var}:{format_formula(f.ann)}. {format_forest(f.body)}"
    if not f.alts:
        return "O"
    return " + ".join(_format_alt(a) for a in f.alts)


def _format_alt(a: EAlt) -> str:
    if not a.args:
        return a.head
    return f"{a.head}<{', '.join(format_forest(x) for x in a.args)}>"


def parse_forest(text: str) -> Forest:
    ts = TokenStream(tokenize(text))
    f = _parse_forest_stream(ts)
    ts.expect("eof")
    return f


def _parse_forest_stream(ts: TokenStream) -> Forest:
    tok = ts.peek()
    if tok.kind == "punct" and tok.text == "\\":
        ts.next()
        name = ts.expect("ident").text
        ts.expect("punct", ":")
        ann = _parse_formula_stream(ts)
        ts.expect("punct", ".")
        return FLam(name, ann, _parse_forest_stream(ts))
    if tok.kind == "punct" and tok.text == "?":
        ts.next()
        return CUT
    if tok.kind == "ident" and tok.text == "O":
        ts.next()
        return EMPTY
    alts = [_parse_alt(ts)]
    while ts.at("punct", "+"):
        ts.next()
        alts.append(_parse_alt(ts))
    return summed(alts)


def _parse_alt(ts: TokenStream) -> EAlt:
    tok = ts.expect("ident")
    args: list[Forest] = []
    if ts.at("punct", "<"):
        ts.next()
        if not ts.at("punct", ">"):
            while True:
                args.append(_parse_forest_stream(ts))
                if ts.at("punct", ","):
                    ts.next()
                    continue
                break
        ts.expect("punct", ">")
    return EAlt(tok.text, tuple(args))


# ---------------------------------------------------------------------------
# Machine-readable trees


def forest_to_tree(f: Forest) -> dict:
    if isinstance(f, Cut):
        return {"kind": "cut"}
    if isinstance(f, FLam):
        return {
            "kind": "lam",
            "var": f.var,
            "ann": format_formula(f.ann),
            "body": forest_to_tree(f.body),
        }
    return {
        "kind": "sum",
        "alts": [
            {"kind": "alt", "head": a.head, "args": [forest_to_tree(x) for x in a.args]}
            for a in f.alts
        ],
    }


def forest_from_tree(doc: dict) -> Forest:
    kind = doc.get("kind")
    if kind == "cut":
        return CUT
    if kind == "lam":
        from .core import parse_formula

        return FLam(doc["var"], parse_formula(doc["ann"]), forest_from_tree(doc["body"]))
    if kind == "sum":
        return summed(
            EAlt(a["head"], tuple(forest_from_tree(x) for x in a["args"])) for a in doc["alts"]
        )
    raise ValueError(f"bad forest node kind: {kind!r}")
