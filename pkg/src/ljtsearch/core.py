"""Formulas, contexts and sequents of the implicational fragment.

Formulas are built from atoms with a single right-associative arrow.
Contexts are variable-to-formula maps that remember insertion order but
compare as sets of declarations; this keeps all printed output
deterministic while matching the set semantics of the calculus.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional, Union


class Ternary(Enum):
    """Three-valued answer used by fuel-bounded checks."""

    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __bool__(self) -> bool:  # pragma: no cover - guard against misuse
        raise TypeError("Ternary is not a boolean; compare explicitly")


def ternary_and(values: Iterable[Ternary]) -> Ternary:
    out = Ternary.YES
    for v in values:
        if v is Ternary.NO:
            return Ternary.NO
        if v is Ternary.UNKNOWN:
            out = Ternary.UNKNOWN
    return out


def ternary_or(values: Iterable[Ternary]) -> Ternary:
    out = Ternary.NO
    for v in values:
        if v is Ternary.YES:
            return Ternary.YES
        if v is Ternary.UNKNOWN:
            out = Ternary.UNKNOWN
    return out


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Atom:
    name: str

    def __post_init__(self) -> None:
        if not _IDENT_RE.fullmatch(self.name):
            raise ValueError(f"bad atom name: {self.name!r}")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


Formula = Union[Atom, Imp]

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


def imp(*parts: Formula) -> Formula:
    """Right-nested implication of the given parts."""
    if not parts:
        raise ValueError("imp needs at least one formula")
    out = parts[-1]
    for part in reversed(parts[:-1]):
        out = Imp(part, out)
    return out


def decompose(f: Formula) -> tuple[tuple[Formula, ...], Atom]:
    """Split f into its argument vector and target atom."""
    args: list[Formula] = []
    while isinstance(f, Imp):
        args.append(f.left)
        f = f.right
    return tuple(args), f


def recompose(args: Iterable[Formula], target: Atom) -> Formula:
    out: Formula = target
    for a in reversed(tuple(args)):
        out = Imp(a, out)
    return out


def rank(f: Formula) -> int:
    if isinstance(f, Atom):
        return 0
    return max(rank(f.left) + 1, rank(f.right))


def subformulas(f: Formula) -> frozenset[Formula]:
    acc: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in acc:
            continue
        acc.add(g)
        if isinstance(g, Imp):
            stack.append(g.left)
            stack.append(g.right)
    return frozenset(acc)


def subformula_closure(fs: Iterable[Formula]) -> frozenset[Formula]:
    acc: frozenset[Formula] = frozenset()
    for f in fs:
        acc |= subformulas(f)
    return acc


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    left = format_formula(f.left)
    if isinstance(f.left, Imp):
        left = f"({left})"
    return f"{left} -> {format_formula(f.right)}"


# ---------------------------------------------------------------------------
# Contexts


class Context:
    """Insertion-ordered map from variable names to formulas.

    Equality and hashing ignore order (declaration-set semantics);
    iteration follows insertion order so sums come out reproducibly.
    """

    __slots__ = ("decls", "_byname", "_hash")

    def __init__(self, decls: Iterable[tuple[str, Formula]] = ()):
        decls = tuple(decls)
        byname: dict[str, Formula] = {}
        for name, formula in decls:
            if name in byname:
                raise ValueError(f"variable declared twice: {name}")
            byname[name] = formula
        object.__setattr__(self, "decls", decls)
        object.__setattr__(self, "_byname", byname)
        object.__setattr__(self, "_hash", hash(frozenset(decls)))

    def __setattr__(self, *a) -> None:  # pragma: no cover
        raise AttributeError("Context is immutable")

    def __iter__(self) -> Iterator[tuple[str, Formula]]:
        return iter(self.decls)

    def __len__(self) -> int:
        return len(self.decls)

    def __contains__(self, name: str) -> bool:
        return name in self._byname

    def __getitem__(self, name: str) -> Formula:
        return self._byname[name]

    def get(self, name: str) -> Optional[Formula]:
        return self._byname.get(name)

    @property
    def dom(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.decls)

    @property
    def formulas(self) -> frozenset[Formula]:
        """|Γ|: the set of formulas occurring, duplicates collapsed."""
        return frozenset(f for _, f in self.decls)

    def decl_set(self) -> frozenset[tuple[str, Formula]]:
        return frozenset(self.decls)

    def extend(self, name: str, formula: Formula) -> "Context":
        return Context(self.decls + ((name, formula),))

    def merge(self, other: "Context") -> "Context":
        """Union of two contexts; shared names must agree on the formula."""
        out = list(self.decls)
        for name, formula in other.decls:
            if name in self._byname:
                if self._byname[name] != formula:
                    raise ValueError(f"conflicting declarations for {name}")
            else:
                out.append((name, formula))
        return Context(out)

    def restrict(self, names: Iterable[str]) -> "Context":
        keep = set(names)
        return Context((n, f) for n, f in self.decls if n in keep)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Context):
            return NotImplemented
        return self.decl_set() == other.decl_set()

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return ", ".join(f"{n}: {format_formula(f)}" for n, f in self.decls)

    def __repr__(self) -> str:
        return f"Context({self.decls!r})"


def context_leq(g1: Context, g2: Context) -> bool:
    """Inessential extension: g1 ⊆ g2 with equal underlying formula sets."""
    return g1.decl_set() <= g2.decl_set() and g1.formulas == g2.formulas


# ---------------------------------------------------------------------------
# Sequents


@dataclass(frozen=True)
class Sequent:
    ctx: Context
    goal: Formula

    @property
    def atomic(self) -> bool:
        return isinstance(self.goal, Atom)

    def strip(self) -> "StrippedSequent":
        if not isinstance(self.goal, Atom):
            raise ValueError("only atomic sequents can be stripped")
        return StrippedSequent(self.ctx.formulas, self.goal)

    def __str__(self) -> str:
        ctx = str(self.ctx)
        sep = " " if ctx else ""
        return f"{ctx}{sep}|- {format_formula(self.goal)}"


@dataclass(frozen=True)
class StrippedSequent:
    formulas: frozenset[Formula]
    goal_atom: Atom


def sequent_leq(s1: Sequent, s2: Sequent) -> bool:
    return s1.goal == s2.goal and context_leq(s1.ctx, s2.ctx)


def fresh_name(prefix: str, used: Iterable[str]) -> str:
    """Smallest prefix+index not in `used` (canonical z1, z2, ... scheme)."""
    taken = set(used)
    i = 1
    while f"{prefix}{i}" in taken:
        i += 1
    return f"{prefix}{i}"


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->|⊃)|(?P<turnstile>\|-)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<punct>[(),:.<>+?{}^\\])|(?P<keyword>λ))"
)


class Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind
        self.text = text
        self.pos = pos

    def __repr__(self) -> str:  # pragma: no cover
        return f"Token({self.kind}, {self.text!r}, {self.pos})"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.lastgroup == "arrow":
            tokens.append(Token("arrow", "->", m.start(m.lastgroup)))
        elif m.lastgroup == "turnstile":
            tokens.append(Token("turnstile", "|-", m.start(m.lastgroup)))
        elif m.lastgroup == "ident":
            tokens.append(Token("ident", m.group("ident"), m.start(m.lastgroup)))
        elif m.lastgroup == "keyword":
            tokens.append(Token("punct", "\\", m.start(m.lastgroup)))
        else:
            tokens.append(Token("punct", m.group("punct"), m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.next()

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)


def _parse_formula_stream(ts: TokenStream) -> Formula:
    left = _parse_formula_atom(ts)
    if ts.at("arrow"):
        ts.next()
        right = _parse_formula_stream(ts)
        return Imp(left, right)
    return left


def _parse_formula_atom(ts: TokenStream) -> Formula:
    tok = ts.peek()
    if tok.kind == "ident":
        ts.next()
        return Atom(tok.text)
    if tok.kind == "punct" and tok.text == "(":
        ts.next()
        inner = _parse_formula_stream(ts)
        ts.expect("punct", ")")
        return inner
    raise ParseError(f"expected formula, found {tok.text or 'end of input'!r}", tok.pos)


def parse_formula(text: str) -> Formula:
    ts = TokenStream(tokenize(text))
    f = _parse_formula_stream(ts)
    ts.expect("eof")
    return f


def _parse_context_stream(ts: TokenStream) -> Context:
    decls: list[tuple[str, Formula]] = []
    if not ts.at("turnstile"):
        while True:
            name = ts.expect("ident").text
            ts.expect("punct", ":")
            decls.append((name, _parse_formula_stream(ts)))
            if ts.at("punct", ","):
                ts.next()
                continue
            break
    return Context(decls)


def _parse_sequent_stream(ts: TokenStream) -> Sequent:
    ctx = _parse_context_stream(ts)
    ts.expect("turnstile")
    goal = _parse_formula_stream(ts)
    return Sequent(ctx, goal)


def parse_sequent(text: str) -> Sequent:
    ts = TokenStream(tokenize(text))
    seq = _parse_sequent_stream(ts)
    ts.expect("eof")
    return seq


def format_sequent(s: Sequent) -> str:
    return str(s)
