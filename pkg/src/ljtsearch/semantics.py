"""Interpretation of finitary terms as fuel-bounded truncations.

A fixed-point binder closes over its alternatives and environment as a
thunk; forcing the thunk at some fuel unfolds one layer of the cyclic
structure.  An occurrence forces the thunk of its binder and then
saturates the produced layer by co-contraction from the binder's
context to the occurrence's context, which is what the relaxed binding
discipline means semantically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Protocol

from .core import Sequent, sequent_leq
from .forest import CUT, EMPTY, EAlt, Forest, bisim_upto, cocontract, expand, summed
from .finitary import (
    FinAlt,
    FinGfp,
    FinLam,
    FinSum,
    FinTerm,
    FpOcc,
    fpv,
    is_well_bound,
    represent,
)
from .forest import FLam


class Thunk(Protocol):
    def force(self, fuel: int) -> Forest: ...


@dataclass
class SequentThunk:
    """Environment value whose unfoldings are the search space itself.

    This is the harness half of the equivalence check: it lets a
    nonempty environment be populated independently of interpretation.
    """

    sequent: Sequent

    def force(self, fuel: int) -> Forest:
        return expand(self.sequent, fuel)


class GfpThunk:
    """One fixed point: its binder sequent, alternatives and closure."""

    __slots__ = ("sequent", "alts", "env", "_memo")

    def __init__(self, sequent: Sequent, alts: tuple[FinAlt, ...]):
        self.sequent = sequent
        self.alts = alts
        self.env: Optional[Environment] = None  # tied after construction
        self._memo: dict[int, Forest] = {}

    def force(self, fuel: int) -> Forest:
        hit = self._memo.get(fuel)
        if hit is None:
            hit = _interpret_sum(self.alts, self.env, fuel)
            self._memo[fuel] = hit
        return hit


class Environment:
    """Finite map from fixed-point names to (binder sequent, thunk)."""

    __slots__ = ("entries",)

    def __init__(self, entries: Mapping[str, tuple[Sequent, Thunk]] = {}):
        self.entries = dict(entries)

    def bind(self, name: str, sequent: Sequent, thunk: Thunk) -> "Environment":
        if not sequent.atomic:
            raise ValueError("environment sequents must be atomic")
        out = dict(self.entries)
        out[name] = (sequent, thunk)  # rebinding = renaming the old entry away
        return Environment(out)

    def lookup(self, name: str) -> Optional[tuple[Sequent, Thunk]]:
        return self.entries.get(name)

    def names(self) -> frozenset[str]:
        return frozenset(self.entries)


EMPTY_ENV = Environment()


def env_for(xi: Iterable[tuple[str, Sequent]]) -> Environment:
    """The canonical environment sending each declaration to its own space."""
    env = EMPTY_ENV
    for name, sequent in xi:
        env = env.bind(name, sequent, SequentThunk(sequent))
    return env


def is_admissible(env: Environment, t: FinTerm) -> bool:
    """Every free occurrence has its name bound below the occurrence."""
    for name, sequent in fpv(t):
        entry = env.lookup(name)
        if entry is None or not sequent_leq(entry[0], sequent):
            return False
    return True


def interpret(t: FinTerm, env: Environment = EMPTY_ENV, fuel: int = 8) -> Forest:
    if fuel < 0:
        raise ValueError("fuel must be >= 0")
    if not is_well_bound(t):
        raise ValueError("term is not well-bound")
    if not is_admissible(env, t):
        raise ValueError("environment is not admissible for the term")
    return _interpret(t, env, fuel)


def _interpret(t: FinTerm, env: Environment, fuel: int) -> Forest:
    if isinstance(t, FinLam):
        if fuel == 0:
            return CUT
        return FLam(t.var, t.ann, _interpret(t.body, env, fuel - 1))
    if isinstance(t, FinGfp):
        thunk = GfpThunk(t.sequent, t.alts)
        thunk.env = env.bind(t.var, t.sequent, thunk)
        return thunk.force(fuel)
    if isinstance(t, FinSum):
        return _interpret_sum(t.alts, env, fuel)
    # occurrence: unfold the binder, then saturate to the occurrence context
    binder_sequent, thunk = env.lookup(t.var)
    layer = thunk.force(fuel)
    if binder_sequent.ctx == t.sequent.ctx:
        return layer
    return cocontract(binder_sequent.ctx, t.sequent.ctx, layer)


def _interpret_sum(alts: tuple[FinAlt, ...], env: Environment, fuel: int) -> Forest:
    if not alts:
        return EMPTY
    if fuel == 0:
        return CUT
    return summed(
        EAlt(a.head, tuple(_interpret(x, env, fuel - 1) for x in a.args)) for a in alts
    )


def check_equivalence(s: Sequent, fuel: int) -> bool:
    """Interpretation of the finitary representation against the directly
    expanded space, compared up to the same depth."""
    return bisim_upto(interpret(represent(s), EMPTY_ENV, fuel), expand(s, fuel), fuel)
