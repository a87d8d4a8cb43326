"""Satisfiability checking for Hybrid PDL ABoxes.

Typical use::

    from hpdl import parse_abox, decide, extract_model

    abox = parse_abox("'a:[s*]p; s('a,'b); 'b:<(?('a)+s)*>~p")
    result = decide(abox)
    result.verdict            # "UNSAT"
"""

from .automata import NFA, accepts, compile_program, delta, enumerate_words
from .engine import (
    Closure, Decision, ResourceLimitExceeded, RunStats, build_closure, decide,
    label_violations, validate_labels,
)
from .kripke import (
    KripkeModel, SearchBudgetExceeded, UninterpretedSymbol, bounded_search,
    check_abox, eval_formula, eval_program,
)
from .parser import ParseError, parse_abox, parse_formula, parse_program
from .status import apply_unsat, compute_realizability
from .syntax import negate_nnf, show, substitute_nominal, to_nnf
from .tableau import Tableau
from .witness import (
    ModelGraph, Witness, WitnessError, build_model_graph, check_hintikka,
    extract_model, pick_anchor, saturation_path, trace_realization,
)

__all__ = [
    "NFA", "accepts", "compile_program", "delta", "enumerate_words",
    "Closure", "Decision", "ResourceLimitExceeded", "RunStats", "build_closure", "decide",
    "label_violations", "validate_labels",
    "KripkeModel", "SearchBudgetExceeded", "UninterpretedSymbol", "bounded_search",
    "check_abox", "eval_formula", "eval_program",
    "ParseError", "parse_abox", "parse_formula", "parse_program",
    "apply_unsat", "compute_realizability",
    "negate_nnf", "show", "substitute_nominal", "to_nnf",
    "Tableau",
    "ModelGraph", "Witness", "WitnessError", "build_model_graph", "check_hintikka",
    "extract_model", "pick_anchor", "saturation_path", "trace_realization",
]
