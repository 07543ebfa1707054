"""Many-sorted first-order logic: object model, concrete syntax, semantics."""

from .core import (
    And,
    Apply,
    CheckReport,
    Compare,
    Elem,
    Equal,
    Exists,
    FolError,
    Forall,
    Formula,
    Iff,
    IllTyped,
    Implies,
    Interpretation,
    Not,
    Offset,
    Or,
    Pred,
    SortingError,
    Term,
    Theory,
    TheoryError,
    TooLarge,
    Var,
    conjoin,
    count_models,
    enumerate_interpretations,
    evaluate,
    expand_quantifiers,
    sort_check,
    substitute,
    theory_from_doc,
    theory_to_doc,
)
from .parse import FolDocument, ParseError, SourceSpan, parse_document, parse_formula, parse_theory
from .pretty import print_formula, print_term, print_theory

__all__ = [
    "And", "Apply", "CheckReport", "Compare", "Elem", "Equal", "Exists",
    "FolDocument", "FolError", "Forall", "Formula", "Iff", "IllTyped",
    "Implies", "Interpretation", "Not", "Offset", "Or", "ParseError", "Pred",
    "SortingError", "SourceSpan", "Term", "Theory", "TheoryError", "TooLarge",
    "Var", "conjoin", "count_models", "enumerate_interpretations", "evaluate",
    "expand_quantifiers", "parse_document", "parse_formula", "parse_theory",
    "print_formula", "print_term", "print_theory", "sort_check", "substitute",
    "theory_from_doc", "theory_to_doc",
]
