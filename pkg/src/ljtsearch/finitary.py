"""Finitary terms with a greatest-fixed-point binder over sums.

Fixed-point variables are annotated with atomic sequents and bound in a
relaxed fashion: a binder captures every free occurrence of its name,
whatever sequent the occurrence carries.  Well-boundness asks that each
captured occurrence extend the binder's sequent; regularity asks that
the occurrences of each free name have a common lower bound.

`represent` computes the cyclic finitary description of a sequent's
entire search space.  Its termination rests on a counting measure over
stripped sequents, which is checked on every recursive call.
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
    TokenStream,
    _parse_formula_stream,
    _parse_sequent_stream,
    decompose,
    format_formula,
    fresh_name,
    parse_formula,
    parse_sequent,
    sequent_leq,
    subformula_closure,
    tokenize,
)

FpContext = tuple[tuple[str, Sequent], ...]


class _FNode:
    __slots__ = ("_ctree", "_ckey", "_freevars", "_freefps")

    def _init_caches(self) -> None:
        object.__setattr__(self, "_ctree", None)
        object.__setattr__(self, "_ckey", None)
        object.__setattr__(self, "_freevars", None)
        object.__setattr__(self, "_freefps", None)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _FNode):
            return NotImplemented
        return fin_canonical_key(self) == fin_canonical_key(other)

    def __hash__(self) -> int:
        return hash(fin_canonical_key(self))


def _require_atomic(s: Sequent) -> None:
    if not s.atomic:
        raise ValueError("fixed-point annotations must be atomic sequents")


@dataclass(frozen=True, eq=False)
class FinLam(_FNode):
    var: str
    ann: Formula
    body: "FinTerm"

    def __post_init__(self) -> None:
        self._init_caches()

    def __str__(self) -> str:
        return format_fin(self)


@dataclass(frozen=True, eq=False)
class FinGfp(_FNode):
    var: str
    sequent: Sequent
    alts: tuple["FinAlt", ...]

    def __post_init__(self) -> None:
        _require_atomic(self.sequent)
        self._init_caches()

    def __str__(self) -> str:
        return format_fin(self)


@dataclass(frozen=True, eq=False)
class FinSum(_FNode):
    """Sum with no binder: the shorthand for a gfp whose variable is unused."""

    alts: tuple["FinAlt", ...]

    def __post_init__(self) -> None:
        self._init_caches()

    def __str__(self) -> str:
        return format_fin(self)


@dataclass(frozen=True, eq=False)
class FpOcc(_FNode):
    var: str
    sequent: Sequent

    def __post_init__(self) -> None:
        _require_atomic(self.sequent)
        self._init_caches()

    def __str__(self) -> str:
        return format_fin(self)


@dataclass(frozen=True, eq=False)
class FinAlt(_FNode):
    head: str
    args: tuple["FinTerm", ...] = ()

    def __post_init__(self) -> None:
        self._init_caches()

    def __str__(self) -> str:
        return _format_fin_alt(self)


FinTerm = Union[FinLam, FinGfp, FinSum, FpOcc]


# ---------------------------------------------------------------------------
# Free variables, canonical forms


def fin_free_vars(node) -> frozenset[str]:
    """Free term variables, including those inside sequent annotations."""
    cached = node._freevars
    if cached is None:
        if isinstance(node, FinLam):
            cached = fin_free_vars(node.body) - {node.var}
        elif isinstance(node, FinGfp):
            cached = frozenset(node.sequent.ctx.dom).union(
                *(fin_free_vars(a) for a in node.alts)
            )
        elif isinstance(node, FinSum):
            cached = frozenset().union(*(fin_free_vars(a) for a in node.alts)) if node.alts else frozenset()
        elif isinstance(node, FpOcc):
            cached = frozenset(node.sequent.ctx.dom)
        else:
            cached = frozenset([node.head]).union(*(fin_free_vars(a) for a in node.args))
        object.__setattr__(node, "_freevars", cached)
    return cached


def fpv(node) -> frozenset[tuple[str, Sequent]]:
    """Free occurrences of typed fixed-point variables (name, sequent)."""
    cached = node._freefps
    if cached is None:
        if isinstance(node, FinLam):
            cached = fpv(node.body)
        elif isinstance(node, FinGfp):
            inner = frozenset().union(*(fpv(a) for a in node.alts)) if node.alts else frozenset()
            cached = frozenset(p for p in inner if p[0] != node.var)
        elif isinstance(node, FinSum):
            cached = frozenset().union(*(fpv(a) for a in node.alts)) if node.alts else frozenset()
        elif isinstance(node, FpOcc):
            cached = frozenset([(node.var, node.sequent)])
        else:
            cached = frozenset().union(*(fpv(a) for a in node.args)) if node.args else frozenset()
        object.__setattr__(node, "_freefps", cached)
    return cached


def fin_canonical_key(node) -> str:
    key = node._ckey
    if key is None:
        key = repr(_fctree(node, {}, 0, {}, 0))
        object.__setattr__(node, "_ckey", key)
    return key


def _seq_tree(s: Sequent, env: dict[str, int], depth: int):
    decls = []
    for name, formula in s.ctx:
        ref = ("b", depth - env[name] - 1) if name in env else ("f", name)
        decls.append((format_formula(formula), ref[0], str(ref[1])))
    return ("seq", tuple(sorted(decls)), format_formula(s.goal))


def _fctree(node, env: dict[str, int], depth: int, fpenv: dict[str, int], fpdepth: int):
    cacheable = not (fin_free_vars(node) & env.keys()) and not (
        {name for name, _ in fpv(node)} & fpenv.keys()
    )
    if cacheable and node._ctree is not None:
        return node._ctree
    if isinstance(node, FinLam):
        env2 = dict(env)
        env2[node.var] = depth
        tree = ("lam", format_formula(node.ann), _fctree(node.body, env2, depth + 1, fpenv, fpdepth))
    elif isinstance(node, FinGfp):
        fpenv2 = dict(fpenv)
        fpenv2[node.var] = fpdepth
        subs = [_fctree(a, env, depth, fpenv2, fpdepth + 1) for a in node.alts]
        tree = ("gfp", _seq_tree(node.sequent, env, depth), tuple(sorted(set(subs), key=repr)))
    elif isinstance(node, FinSum):
        subs = [_fctree(a, env, depth, fpenv, fpdepth) for a in node.alts]
        tree = ("sum", tuple(sorted(set(subs), key=repr)))
    elif isinstance(node, FpOcc):
        ref = ("b", fpdepth - fpenv[node.var] - 1) if node.var in fpenv else ("f", node.var)
        tree = ("occ", ref, _seq_tree(node.sequent, env, depth))
    else:
        href = ("b", depth - env[node.head] - 1) if node.head in env else ("f", node.head)
        tree = ("alt", href, tuple(_fctree(a, env, depth, fpenv, fpdepth) for a in node.args))
    if cacheable:
        object.__setattr__(node, "_ctree", tree)
    return tree


# ---------------------------------------------------------------------------
# Renaming


def subst_var(node, frm: str, to: str):
    """Rename a free term variable, also inside sequent annotations.

    The new name must be fresh for the term (no capture handling for
    occupied names)."""
    if to in fin_free_vars(node):
        raise ValueError(f"target name {to} already occurs free")
    return _subst_var(node, frm, to)


def _rename_seq(s: Sequent, frm: str, to: str) -> Sequent:
    if frm not in s.ctx:
        return s
    return Sequent(Context((to if n == frm else n, f) for n, f in s.ctx), s.goal)


def _subst_var(node, frm: str, to: str):
    if frm not in fin_free_vars(node):
        return node
    if isinstance(node, FinLam):
        return FinLam(node.var, node.ann, _subst_var(node.body, frm, to))
    if isinstance(node, FinGfp):
        return FinGfp(
            node.var,
            _rename_seq(node.sequent, frm, to),
            tuple(_subst_var(a, frm, to) for a in node.alts),
        )
    if isinstance(node, FinSum):
        return FinSum(tuple(_subst_var(a, frm, to) for a in node.alts))
    if isinstance(node, FpOcc):
        return FpOcc(node.var, _rename_seq(node.sequent, frm, to))
    head = to if node.head == frm else node.head
    return FinAlt(head, tuple(_subst_var(a, frm, to) for a in node.args))


def subst_fp(node, frm: str, to: str):
    """Rename free occurrences of a fixed-point name (annotations kept)."""
    if isinstance(node, FinLam):
        return FinLam(node.var, node.ann, subst_fp(node.body, frm, to))
    if isinstance(node, FinGfp):
        if node.var == frm:
            return node
        return FinGfp(node.var, node.sequent, tuple(subst_fp(a, frm, to) for a in node.alts))
    if isinstance(node, FinSum):
        return FinSum(tuple(subst_fp(a, frm, to) for a in node.alts))
    if isinstance(node, FpOcc):
        return FpOcc(to, node.sequent) if node.var == frm else node
    return FinAlt(node.head, tuple(subst_fp(a, frm, to) for a in node.args))


# ---------------------------------------------------------------------------
# Well-boundness, regularity


def is_well_bound(t) -> bool:
    """Every binder's sequent extends into each occurrence it captures."""
    if isinstance(t, FinLam):
        return is_well_bound(t.body)
    if isinstance(t, FinGfp):
        for name, sequent in frozenset().union(*(fpv(a) for a in t.alts)) if t.alts else ():
            if name == t.var and not sequent_leq(t.sequent, sequent):
                return False
        return all(is_well_bound(a) for a in t.alts)
    if isinstance(t, FinSum):
        return all(is_well_bound(a) for a in t.alts)
    if isinstance(t, FpOcc):
        return True
    return all(is_well_bound(a) for a in t.args)


def is_trivially_regular(t) -> bool:
    """No free fixed-point name occurs with two different sequents."""
    seen: dict[str, Sequent] = {}
    for name, sequent in fpv(t):
        if name in seen and seen[name] != sequent:
            return False
        seen[name] = sequent
    return True


def is_regular(t) -> bool:
    """Each free name's occurrence sequents have a common lower bound.

    The candidate is canonical: the declaration-set intersection of the
    occurrence contexts with their (necessarily shared) goal atom.  If
    that candidate is not below every occurrence, no sequent is."""
    byname: dict[str, list[Sequent]] = {}
    for name, sequent in fpv(t):
        byname.setdefault(name, []).append(sequent)
    for occs in byname.values():
        goals = {s.goal for s in occs}
        if len(goals) > 1:
            return False
        common = occs[0].ctx.decl_set()
        for s in occs[1:]:
            common &= s.ctx.decl_set()
        candidate = Sequent(Context((n, f) for n, f in occs[0].ctx if (n, f) in common), occs[0].goal)
        if not all(sequent_leq(candidate, s) for s in occs):
            return False
    return True


def subexpressions(t) -> list:
    out = [t]
    if isinstance(t, FinLam):
        out += subexpressions(t.body)
    elif isinstance(t, (FinGfp, FinSum)):
        for a in t.alts:
            out += subexpressions(a)
    elif isinstance(t, FinAlt):
        for a in t.args:
            out += subexpressions(a)
    return out


def is_strongly_regular(t) -> bool:
    return all(is_regular(sub) for sub in subexpressions(t))


# ---------------------------------------------------------------------------
# Typing


def fin_typecheck(xi: Iterable[tuple[str, Sequent]], ctx: Context, t, goal: Formula) -> bool:
    xi = tuple(xi)
    names = [n for n, _ in xi]
    if len(set(names)) != len(names):
        raise ValueError("fixed-point context declares a name twice")
    return _ftc(dict(xi), ctx, t, goal)


def _ftc(xi: dict[str, Sequent], ctx: Context, t, goal: Formula) -> bool:
    if isinstance(t, FinLam):
        if not isinstance(goal, Imp) or t.ann != goal.left:
            return False
        if t.var in ctx:
            fresh = fresh_name("z", set(ctx.dom) | fin_free_vars(t.body))
            return _ftc(xi, ctx.extend(fresh, t.ann), _subst_var(t.body, t.var, fresh), goal.right)
        return _ftc(xi, ctx.extend(t.var, t.ann), t.body, goal.right)
    if isinstance(t, FinGfp):
        if not isinstance(goal, Atom) or t.sequent.goal != goal:
            return False
        if not t.sequent.ctx.decl_set() <= ctx.decl_set():
            return False
        var, alts = t.var, t.alts
        if var in xi:
            var = fresh_name("X", set(xi) | {n for n, _ in frozenset().union(*(fpv(a) for a in alts))} if alts else set(xi))
            alts = tuple(subst_fp(a, t.var, var) for a in alts)
        xi2 = dict(xi)
        xi2[var] = t.sequent
        return all(_ftc(xi2, ctx, a, goal) for a in alts)
    if isinstance(t, FinSum):
        if not isinstance(goal, Atom):
            return False
        return all(_ftc(xi, ctx, a, goal) for a in t.alts)
    if isinstance(t, FpOcc):
        if not isinstance(goal, Atom) or t.sequent.goal != goal:
            return False
        binder = xi.get(t.var)
        if binder is None:
            return False
        return sequent_leq(binder, t.sequent) and t.sequent.ctx.decl_set() <= ctx.decl_set()
    # elimination alternative
    if not isinstance(goal, Atom):
        return False
    declared = ctx.get(t.head)
    if declared is None:
        return False
    args, target = decompose(declared)
    if target != goal or len(args) != len(t.args):
        return False
    return all(_ftc(xi, ctx, a, b) for a, b in zip(t.args, args))


# ---------------------------------------------------------------------------
# The finitary representation map


_measure_checks = 0


def measure_check_count() -> int:
    """How many termination-measure checks have run (test instrumentation)."""
    return _measure_checks


def stripped_size(formulas: frozenset[Formula]) -> int:
    """Number of stripped sequents over a formula set: atoms * 2^formulas."""
    atoms = sum(1 for f in formulas if isinstance(f, Atom))
    return atoms * (2 ** len(formulas))


def represent(s: Sequent, xi: Iterable[tuple[str, Sequent]] = ()) -> FinTerm:
    """Finitary description of the whole search space of `s`.

    With goal A1 -> ... -> An -> p and the context extended by fresh
    z's for the Ai: if some declared fixed point covers the extended
    position (same goal atom, context included in the original one,
    formula sets matching), return the occurrence of the biggest such
    index; otherwise bind a fresh fixed point over the sum of
    alternatives, one per hypothesis targeting p.
    """
    xi = tuple(xi)
    _validate_fp_context(s, xi)
    universe = subformula_closure(s.ctx.formulas | {s.goal})
    budget = stripped_size(universe)
    strips = frozenset(sequent.strip() for _, sequent in xi)
    taken = {name for name, _ in xi}
    counter = [0]

    def fresh_fp() -> str:
        while True:
            counter[0] += 1
            cand = f"X{counter[0]}"
            if cand not in taken:
                taken.add(cand)
                return cand

    def go(ctx: Context, goal: Formula, entries: FpContext, strips: frozenset) -> FinTerm:
        global _measure_checks
        args, p = decompose(goal)
        delta = ctx
        zs: list[tuple[str, Formula]] = []
        for a in args:
            z = fresh_name("z", delta.dom)
            delta = delta.extend(z, a)
            zs.append((z, a))
        sigma = Sequent(delta, p)
        target_formulas = ctx.formulas | frozenset(args)
        chosen: Optional[str] = None
        for name, declared in entries:
            if (
                declared.goal == p
                and declared.ctx.decl_set() <= ctx.decl_set()
                and declared.ctx.formulas == target_formulas
            ):
                chosen = name  # keep scanning: the biggest index wins
        if chosen is not None:
            body: FinTerm = FpOcc(chosen, sigma)
        else:
            strip = sigma.strip()
            _measure_checks += 1
            if strip in strips or not (strip.formulas <= universe and strip.goal_atom in universe):
                raise RuntimeError(
                    f"termination measure failed to decrease at {sigma} "
                    f"(budget {budget}, used {len(strips)})"
                )
            fp = fresh_fp()
            alts = []
            for y, formula in delta:
                bs, target = decompose(formula)
                if target != p:
                    continue
                alts.append(
                    FinAlt(
                        y,
                        tuple(
                            go(delta, b, entries + ((fp, sigma),), strips | {strip}) for b in bs
                        ),
                    )
                )
            body = FinGfp(fp, sigma, tuple(alts))
        for z, a in reversed(zs):
            body = FinLam(z, a, body)
        return body

    return go(s.ctx, s.goal, xi, strips)


def _validate_fp_context(s: Sequent, xi: FpContext) -> None:
    names = [n for n, _ in xi]
    if len(set(names)) != len(names):
        raise ValueError("fixed-point context declares a name twice")
    if not xi:
        return
    universe = subformula_closure(s.ctx.formulas)
    prev: Optional[Context] = None
    strips = set()
    for _, declared in xi:
        if not declared.atomic:
            raise ValueError("fixed-point declarations must use atomic sequents")
        if prev is not None and not prev.decl_set() <= declared.ctx.decl_set():
            raise ValueError("declared contexts must grow along the fixed-point context")
        if declared.goal not in universe:
            raise ValueError(f"goal {declared.goal} is not a subformula of the context")
        strip = declared.strip()
        if strip in strips:
            raise ValueError("two declarations share a stripped sequent")
        strips.add(strip)
        prev = declared.ctx
    if prev.decl_set() != s.ctx.decl_set():
        raise ValueError("the last declared context must equal the sequent's context")


def elide_vacuous_gfp(t):
    """Drop binders whose fixed-point name has no occurrence."""
    if isinstance(t, FinLam):
        return FinLam(t.var, t.ann, elide_vacuous_gfp(t.body))
    if isinstance(t, FinGfp):
        alts = tuple(elide_vacuous_gfp(a) for a in t.alts)
        used = any(t.var == name for a in alts for name, _ in fpv(a))
        return FinGfp(t.var, t.sequent, alts) if used else FinSum(alts)
    if isinstance(t, FinSum):
        return FinSum(tuple(elide_vacuous_gfp(a) for a in t.alts))
    if isinstance(t, FpOcc):
        return t
    return FinAlt(t.head, tuple(elide_vacuous_gfp(a) for a in t.args))


# ---------------------------------------------------------------------------
# Concrete syntax


def format_fin(t) -> str:
    if isinstance(t, FinLam):
        return f"\\{t.var}:{format_formula(t.ann)}. {format_fin(t.body)}"
    if isinstance(t, FinGfp):
        return f"gfp {t.var}^{{{t.sequent}}}. {_format_alts(t.alts)}"
    if isinstance(t, FinSum):
        return _format_alts(t.alts)
    if isinstance(t, FpOcc):
        return f"{t.var}^{{{t.sequent}}}"
    return _format_fin_alt(t)


def _format_alts(alts: tuple[FinAlt, ...]) -> str:
    if not alts:
        return "O"
    return " + ".join(_format_fin_alt(a) for a in alts)


def _format_fin_alt(a: FinAlt) -> str:
    if not a.args:
        return a.head
    return f"{a.head}<{', '.join(format_fin(x) for x in a.args)}>"


def parse_fin(text: str) -> FinTerm:
    ts = TokenStream(tokenize(text))
    t = _parse_fin_stream(ts)
    ts.expect("eof")
    return t


def _parse_fin_stream(ts: TokenStream) -> FinTerm:
    tok = ts.peek()
    if tok.kind == "punct" and tok.text == "\\":
        ts.next()
        name = ts.expect("ident").text
        ts.expect("punct", ":")
        ann = _parse_formula_stream(ts)
        ts.expect("punct", ".")
        return FinLam(name, ann, _parse_fin_stream(ts))
    if tok.kind == "ident" and tok.text == "gfp":
        ts.next()
        name = ts.expect("ident").text
        sequent = _parse_fp_annotation(ts)
        ts.expect("punct", ".")
        return FinGfp(name, sequent, _parse_fin_alts(ts))
    if tok.kind == "ident" and tok.text == "O":
        ts.next()
        return FinSum(())
    if tok.kind == "ident" and ts.tokens[ts.i + 1].text == "^":
        ts.next()
        return FpOcc(tok.text, _parse_fp_annotation(ts))
    if tok.kind == "ident":
        return FinSum(_parse_fin_alts(ts))
    raise ParseError(f"expected finitary term, found {tok.text or 'end of input'!r}", tok.pos)


def _parse_fp_annotation(ts: TokenStream) -> Sequent:
    ts.expect("punct", "^")
    ts.expect("punct", "{")
    sequent = _parse_sequent_stream(ts)
    ts.expect("punct", "}")
    return sequent


def _parse_fin_alts(ts: TokenStream) -> tuple[FinAlt, ...]:
    if ts.at("ident", "O"):
        ts.next()
        return ()
    alts = [_parse_fin_alt(ts)]
    while ts.at("punct", "+"):
        ts.next()
        alts.append(_parse_fin_alt(ts))
    return tuple(alts)


def _parse_fin_alt(ts: TokenStream) -> FinAlt:
    tok = ts.expect("ident")
    args: list[FinTerm] = []
    if ts.at("punct", "<"):
        ts.next()
        if not ts.at("punct", ">"):
            while True:
                args.append(_parse_fin_stream(ts))
                if ts.at("punct", ","):
                    ts.next()
                    continue
                break
        ts.expect("punct", ">")
    return FinAlt(tok.text, tuple(args))


# ---------------------------------------------------------------------------
# Machine-readable trees


def fin_to_tree(t) -> dict:
    if isinstance(t, FinLam):
        return {"kind": "lam", "var": t.var, "ann": format_formula(t.ann), "body": fin_to_tree(t.body)}
    if isinstance(t, FinGfp):
        return {
            "kind": "gfp",
            "fpvar": t.var,
            "sequent": str(t.sequent),
            "alts": [fin_to_tree(a) for a in t.alts],
        }
    if isinstance(t, FinSum):
        return {"kind": "sum", "alts": [fin_to_tree(a) for a in t.alts]}
    if isinstance(t, FpOcc):
        return {"kind": "fpvar", "fpvar": t.var, "sequent": str(t.sequent)}
    return {"kind": "alt", "head": t.head, "args": [fin_to_tree(a) for a in t.args]}


def fin_from_tree(doc: dict):
    kind = doc.get("kind")
    if kind == "lam":
        return FinLam(doc["var"], parse_formula(doc["ann"]), fin_from_tree(doc["body"]))
    if kind == "gfp":
        return FinGfp(
            doc["fpvar"],
            parse_sequent(doc["sequent"]),
            tuple(fin_from_tree(a) for a in doc["alts"]),
        )
    if kind == "sum":
        return FinSum(tuple(fin_from_tree(a) for a in doc["alts"]))
    if kind == "fpvar":
        return FpOcc(doc["fpvar"], parse_sequent(doc["sequent"]))
    if kind == "alt":
        return FinAlt(doc["head"], tuple(fin_from_tree(a) for a in doc["args"]))
    raise ValueError(f"bad finitary node kind: {kind!r}")
