"""Canonical text rendering of theories and formulas.

print_formula emits minimal parentheses for the parser's precedence table,
so parse(print(f)) is structurally identical to f.  Negated equalities are
rendered with `!=`.
"""

from __future__ import annotations

from .core import (
    And,
    Apply,
    Compare,
    Elem,
    Equal,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Offset,
    Or,
    Pred,
    Term,
    Theory,
    Var,
)


def print_term(term: Term) -> str:
    if isinstance(term, (Var, Elem)):
        return term.name
    if isinstance(term, Apply):
        if not term.args:
            return term.func
        return f"{term.func}({', '.join(print_term(a) for a in term.args)})"
    if isinstance(term, Offset):
        if term.delta < 0:
            return f"{print_term(term.base)} - {-term.delta}"
        return f"{print_term(term.base)} + {term.delta}"
    raise TypeError(f"not a term: {term!r}")


# precedence: <-> 1, -> 2, | 3, & 4, ~ 5, atoms 6; quantifiers bind weakest.


def _render(f: Formula, min_prec: int, rightmost: bool) -> str:
    if isinstance(f, (Forall, Exists)):
        if not rightmost:
            return "(" + _render(f, 0, True) + ")"
        word = "forall" if isinstance(f, Forall) else "exists"
        return f"{word} {f.var}: {f.sort}. {_render(f.body, 0, True)}"
    if isinstance(f, Not) and isinstance(f.body, Equal):
        return f"{print_term(f.body.left)} != {print_term(f.body.right)}"
    if isinstance(f, Equal):
        return f"{print_term(f.left)} = {print_term(f.right)}"
    if isinstance(f, Compare):
        return f"{print_term(f.left)} {f.op} {print_term(f.right)}"
    if isinstance(f, Pred):
        return f"{f.name}({', '.join(print_term(a) for a in f.args)})"
    if isinstance(f, Not):
        return "~" + _render(f.body, 5, rightmost)
    if isinstance(f, And):
        s = _render(f.left, 4, False) + " & " + _render(f.right, 5, rightmost)
        prec = 4
    elif isinstance(f, Or):
        s = _render(f.left, 3, False) + " | " + _render(f.right, 4, rightmost)
        prec = 3
    elif isinstance(f, Implies):
        s = _render(f.left, 3, False) + " -> " + _render(f.right, 2, rightmost)
        prec = 2
    elif isinstance(f, Iff):
        s = _render(f.left, 2, False) + " <-> " + _render(f.right, 1, rightmost)
        prec = 1
    else:
        raise TypeError(f"not a formula: {f!r}")
    if prec < min_prec:
        return "(" + _render(f, 0, True) + ")"
    return s


def print_formula(formula: Formula) -> str:
    """Canonical source text of a formula (single spaces, minimal parentheses)."""
    return _render(formula, 0, True)


def print_theory(theory: Theory) -> str:
    """Theory declarations in the concrete syntax accepted by parse_theory."""
    lines = []
    for name, elems in theory.sorts.items():
        if name in theory.int_ranges:
            low, high = theory.int_ranges[name]
            lines.append(f"sort {name} = {low}..{high}")
        else:
            lines.append(f"sort {name} = {{{', '.join(elems)}}}")
    for name, (args, result) in theory.functions.items():
        if args:
            lines.append(f"func {name} : {', '.join(args)} -> {result}")
        else:
            lines.append(f"const {name} : {result}")
    for name, args in theory.predicates.items():
        lines.append(f"pred {name} : {', '.join(args)}")
    return "\n".join(lines)
