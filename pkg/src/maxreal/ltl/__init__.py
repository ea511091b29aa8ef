from .formula import (FALSE, TRUE, And, Atom, Finally, Formula, Globally,
                      Implies, Next, Not, NotSafetyShape, Or, Release, Until,
                      atoms, conj, disj, evaluate, is_nnf,
                      is_syntactically_safe, relax_vector, simplify, size,
                      subformulas, substitute, to_nnf, to_string)
from .parser import ParseError, parse
from .problem import SCHEMES, SoftSpec, SpecProblem
from .words import all_lassos, all_letters, holds_on_lasso

__all__ = [
    "FALSE", "TRUE", "And", "Atom", "Finally", "Formula", "Globally", "Implies",
    "Next", "Not", "NotSafetyShape", "Or", "Release", "Until", "atoms", "conj",
    "disj", "evaluate", "is_nnf", "is_syntactically_safe", "relax_vector",
    "simplify", "size", "subformulas", "substitute", "to_nnf", "to_string",
    "ParseError", "parse", "SCHEMES", "SoftSpec", "SpecProblem", "all_lassos",
    "all_letters", "holds_on_lasso",
]
