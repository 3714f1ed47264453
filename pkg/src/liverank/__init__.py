"""Liveness verification for first-order transition systems via implicit rankings."""

from .fol import (
    App, Atom, BoolConst, Eq, Exists, FolError, ForAll, Formula, Implies, Ite,
    Not, And, Or, Signature, Sort, SortMismatch, Tag, TagMismatch, Term, TRUE,
    FALSE, UnsortedSymbol, Var, free_vars, is_closed, mk_and, mk_eq, mk_exists,
    mk_forall, mk_iff, mk_implies, mk_not, mk_or, pretty, retag, substitute,
    well_sorted,
)
from .ranking import (
    ImplicitRanking, OrderFormula, apply_hints, bin_rank, dom_lex, dom_lin,
    dom_perm, dom_pw, elaborate, lex_rank, lin_rank, mk_immut_order, pos_rank,
    pw_rank,
)
from .problem import (
    Diagnostic, Problem, parse_problem, parse_problem_file, unparse,
    validate_problem,
)
from .vcgen import ProofObligation, generate_premises, premise_negation
from .smt import (
    DischargeReport, SolverConfig, SolverVerdict, check, discharge_all,
    emit_query,
)
from .oracle import (
    FiniteStructure, McResult, SoundnessReport, bounded_premise_check,
    check_ranking_soundness, enumerate_structures, eval_formula, height,
    height_bound, model_check_liveness,
)

__version__ = "0.1.0"
