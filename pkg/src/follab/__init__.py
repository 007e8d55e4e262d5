"""follab: a first-order-logic workbench with three independent engines.

- syntax: formulas with equality, parsing, printing, substitution
- tableau: semantic trees with equality rules and replayable output
- hilbert: verification of numbered proof scripts
- model: brute-force evaluation over all finite membership relations
- corpus: the bundled regression suite tying the engines together
"""

from .hilbert import check, check_tautology, parse_script, skeletonize
from .model import Interpretation, enumerate_models, evaluate, validity_sweep
from .syntax import (
    DefinitionTable,
    Formula,
    ParseError,
    Term,
    alpha_equal,
    free_vars,
    parse,
    render,
    substitute,
    unfold,
)
from .tableau import Budget, TableauProver, export_tree, prove, refute

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "DefinitionTable",
    "Formula",
    "Interpretation",
    "ParseError",
    "TableauProver",
    "Term",
    "alpha_equal",
    "check",
    "check_tautology",
    "enumerate_models",
    "evaluate",
    "export_tree",
    "free_vars",
    "parse",
    "parse_script",
    "prove",
    "refute",
    "render",
    "skeletonize",
    "substitute",
    "unfold",
    "validity_sweep",
    "__version__",
]
