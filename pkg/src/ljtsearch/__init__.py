"""Proof search over intuitionistic implication: whole solution spaces,
their finitary cyclic representations, and inhabitant analysis."""

from .core import (
    Atom,
    Context,
    Formula,
    Imp,
    ParseError,
    Sequent,
    StrippedSequent,
    Ternary,
    context_leq,
    decompose,
    format_formula,
    format_sequent,
    imp,
    parse_formula,
    parse_sequent,
    rank,
    recompose,
    sequent_leq,
)
from .lambda_bar import (
    App,
    Lam,
    ProofTerm,
    enumerate_proofs,
    enumerate_proofs_sized,
    format_term,
    parse_term,
    rename,
    term_size,
    typecheck,
    typecheck_explain,
)
from .forest import (
    CUT,
    EMPTY,
    EAlt,
    FLam,
    Forest,
    Sum,
    bisim_upto,
    bisim3,
    cocontract,
    expand,
    forest_from_tree,
    forest_to_tree,
    forest_typecheck,
    format_forest,
    is_max_cocontracted,
    is_total,
    mem,
    parse_forest,
)
from .finitary import (
    FinAlt,
    FinGfp,
    FinLam,
    FinSum,
    FinTerm,
    FpOcc,
    elide_vacuous_gfp,
    fin_from_tree,
    fin_to_tree,
    fin_typecheck,
    format_fin,
    fpv,
    is_regular,
    is_strongly_regular,
    is_trivially_regular,
    is_well_bound,
    parse_fin,
    represent,
)
from .semantics import (
    EMPTY_ENV,
    Environment,
    GfpThunk,
    SequentThunk,
    check_equivalence,
    env_for,
    interpret,
    is_admissible,
)
from .analysis import (
    Verdict,
    count_members,
    decide_finite,
    decide_inhabited,
    decide_solvable,
    enumerate_members,
    verdict_for,
)

__all__ = [name for name in dir() if not name.startswith("_")]
