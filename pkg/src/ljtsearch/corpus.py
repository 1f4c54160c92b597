"""Seeded random sequents for differential and property testing."""

from __future__ import annotations

import random
from typing import Optional

from .core import Atom, Context, Formula, Imp, Sequent, fresh_name

ATOM_POOL = ("p", "q", "r")
VAR_POOL = ("a", "b", "c", "d", "e", "f", "g", "h")


def random_formula(rng: random.Random, max_rank: int = 3, atoms: tuple[str, ...] = ATOM_POOL) -> Formula:
    """A1 -> ... -> Ak -> p with small k, arguments one rank lower.

    Bounding the argument count keeps expansion desk-scale; the
    geometric alternative produces heads of enormous arity."""
    target = Atom(rng.choice(atoms))
    if max_rank == 0:
        return target
    k = rng.choices((0, 1, 2, 3), weights=(4, 4, 2, 1))[0]
    out: Formula = target
    for _ in range(k):
        out = Imp(random_formula(rng, max_rank - 1, atoms), out)
    return out


def random_context(
    rng: random.Random,
    max_size: int = 4,
    max_rank: int = 3,
    atoms: tuple[str, ...] = ATOM_POOL,
) -> Context:
    n = rng.randint(0, max_size)
    return Context((VAR_POOL[i], random_formula(rng, max_rank, atoms)) for i in range(n))


def random_sequent(
    rng: random.Random,
    max_ctx: int = 4,
    max_rank: int = 3,
    atoms: tuple[str, ...] = ATOM_POOL,
) -> Sequent:
    return Sequent(random_context(rng, max_ctx, max_rank, atoms), random_formula(rng, max_rank, atoms))


def random_extension(rng: random.Random, ctx: Context, max_extra: int = 2) -> Context:
    """Inessential extension: duplicate declared formulas under fresh names."""
    out = ctx
    if len(ctx) == 0:
        return out
    for _ in range(rng.randint(0, max_extra)):
        _, formula = rng.choice(ctx.decls)
        out = out.extend(fresh_name("w", out.dom), formula)
    return out


def random_sequents(seed: int, count: int, **kwargs) -> list[Sequent]:
    rng = random.Random(seed)
    return [random_sequent(rng, **kwargs) for _ in range(count)]
