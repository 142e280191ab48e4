"""Neural-symbolic recursive sequence model.

Learns symbol grounding, dependency syntax, and program semantics jointly
from (input, result) pairs, by greedy deduction plus search-based
abduction, with program induction over a minimal lambda calculus.
"""

__version__ = "0.1.0"

from .values import NOTHING, IntV, ListV, TokenV, format_value, parse_value, token_list
from .terms import (
    App,
    Comb,
    Lam,
    LitInt,
    LitList,
    LitNothing,
    LitTok,
    Prim,
    Var,
    format_term,
    parse_term,
    program_size,
)
from .interpreter import EvalLimits, evaluate, evaluate_tree
from .tree import GssTree, Vocabulary, new_tree, rotate

__all__ = [
    "NOTHING",
    "IntV",
    "ListV",
    "TokenV",
    "format_value",
    "parse_value",
    "token_list",
    "App",
    "Comb",
    "Lam",
    "LitInt",
    "LitList",
    "LitNothing",
    "LitTok",
    "Prim",
    "Var",
    "format_term",
    "parse_term",
    "program_size",
    "EvalLimits",
    "evaluate",
    "evaluate_tree",
    "GssTree",
    "Vocabulary",
    "new_tree",
    "rotate",
    "__version__",
]
