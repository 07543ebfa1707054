"""Grounding: compile (theory, ground formulas) to propositional CNF.

Function tables are encoded with one selector variable per (point, value)
pair under an exactly-one constraint (pairwise at-most-one; domains in the
target problems are small).  Ground terms become "evaluates to v" circuits,
atoms become disjunctions over consistent valuations, and the circuit is
converted by a polarity-aware Tseitin transformation over AND gates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .cnf import Cnf
from .fol.core import (
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
    Interpretation,
    Not,
    Offset,
    Or,
    Pred,
    Term,
    Theory,
    Var,
    expand_quantifiers,
)

__all__ = ["VarMap", "InconsistentModel", "expand_quantifiers", "encode", "decode_model", "dimacs_comments"]


class InconsistentModel(Exception):
    """A propositional model violated an exactly-one selector group."""


@dataclass
class VarMap:
    """Propositional variable layout for one encoding."""

    theory: Theory
    sel: dict[tuple[str, tuple[str, ...], str], int] = field(default_factory=dict)
    pv: dict[tuple[str, tuple[str, ...]], int] = field(default_factory=dict)
    aux: list[int] = field(default_factory=list)
    roles: dict[int, tuple] = field(default_factory=dict)

    def role(self, var: int) -> tuple:
        return self.roles.get(var, ("unknown",))


_Ref = Union[int, bool]  # CNF literal (signed var id) or a folded constant


def _neg(ref: _Ref) -> _Ref:
    if ref is True:
        return False
    if ref is False:
        return True
    return -ref


class _Circuit:
    """AND-gate circuit over CNF literals with hash-consing and folding."""

    def __init__(self, cnf: Cnf, varmap: VarMap):
        self.cnf = cnf
        self.varmap = varmap
        self.gates: dict[int, tuple[_Ref, ...]] = {}  # aux var -> AND children
        self.cons: dict[tuple[_Ref, ...], int] = {}

    def mk_and(self, children: Sequence[_Ref]) -> _Ref:
        flat: list[int] = []
        seen: set[int] = set()
        for c in children:
            if c is True:
                continue
            if c is False:
                return False
            if -c in seen:
                return False
            if c not in seen:
                seen.add(c)
                flat.append(c)
        if not flat:
            return True
        if len(flat) == 1:
            return flat[0]
        key = tuple(flat)
        var = self.cons.get(key)
        if var is None:
            var = self.cnf.new_var()
            self.varmap.aux.append(var)
            self.varmap.roles[var] = ("aux",)
            self.gates[var] = key
            self.cons[key] = var
        return var

    def mk_or(self, children: Sequence[_Ref]) -> _Ref:
        return _neg(self.mk_and([_neg(c) for c in children]))

    def emit(self, roots: Sequence[_Ref]) -> None:
        """Assert each root and emit gate clauses only in the polarities used."""
        marked: set[tuple[int, int]] = set()
        stack: list[tuple[int, int]] = []
        for root in roots:
            if root is True:
                continue
            if root is False:
                fresh = self.cnf.new_var()
                self.varmap.aux.append(fresh)
                self.varmap.roles[fresh] = ("aux",)
                self.cnf.add([fresh])
                self.cnf.add([-fresh])
                continue
            self.cnf.add([root])
            var, pol = abs(root), (1 if root > 0 else -1)
            if var in self.gates and (var, pol) not in marked:
                marked.add((var, pol))
                stack.append((var, pol))
        while stack:
            var, pol = stack.pop()
            for child in self.gates[var]:
                cvar = abs(child)
                if cvar not in self.gates:
                    continue
                cpol = pol * (1 if child > 0 else -1)
                if (cvar, cpol) not in marked:
                    marked.add((cvar, cpol))
                    stack.append((cvar, cpol))
        for var in sorted(self.gates):
            children = self.gates[var]
            if (var, 1) in marked:
                for c in children:
                    self.cnf.add([-var, c])
            if (var, -1) in marked:
                self.cnf.add([var] + [-c for c in children])


def _candidates(theory: Theory, term: Term) -> list:
    """Possible semantic values of a ground term (str / int; may leave all domains)."""
    if isinstance(term, Elem):
        return [theory.element_value(term.name, term.sort)]
    if isinstance(term, Apply):
        _, result = theory.functions[term.func]
        return [theory.element_value(e, result) for e in theory.sorts[result]]
    if isinstance(term, Offset):
        return [v + term.delta for v in _candidates(theory, term.base)]
    if isinstance(term, Var):
        raise ValueError("formula is not ground: variable remains after expansion")
    raise TypeError(f"not a term: {term!r}")


class _Encoder:
    def __init__(self, theory: Theory, cnf: Cnf, varmap: VarMap):
        self.theory = theory
        self.circuit = _Circuit(cnf, varmap)
        self.varmap = varmap
        self.term_cache: dict[tuple[Term, object], _Ref] = {}

    def term_ref(self, term: Term, value) -> _Ref:
        """Circuit for `term evaluates to value`."""
        key = (term, value)
        cached = self.term_cache.get(key)
        if cached is not None:
            return cached
        th = self.theory
        if isinstance(term, Elem):
            ref: _Ref = th.element_value(term.name, term.sort) == value
        elif isinstance(term, Offset):
            ref = self.term_ref(term.base, value - term.delta) if isinstance(value, int) else False
        elif isinstance(term, Apply):
            arg_sorts, result = th.functions[term.func]
            vname = str(value) if isinstance(value, int) else value
            if vname not in th.sorts[result]:
                ref = False
            else:
                options: list[_Ref] = []
                for combo in itertools.product(*(_candidates(th, a) for a in term.args)):
                    names = []
                    ok = True
                    for v, s in zip(combo, arg_sorts):
                        n = str(v) if isinstance(v, int) else v
                        if n not in th.sorts[s]:
                            ok = False
                            break
                        names.append(n)
                    if not ok:
                        continue
                    sel = self.varmap.sel[(term.func, tuple(names), vname)]
                    parts = [self.term_ref(a, v) for a, v in zip(term.args, combo)]
                    options.append(self.circuit.mk_and(parts + [sel]))
                ref = self.circuit.mk_or(options)
        else:
            raise ValueError("formula is not ground: variable remains after expansion")
        self.term_cache[key] = ref
        return ref

    def _relational(self, left: Term, right: Term, test) -> _Ref:
        th = self.theory
        options: list[_Ref] = []
        for a in _candidates(th, left):
            for b in _candidates(th, right):
                if test(a, b):
                    options.append(self.circuit.mk_and([self.term_ref(left, a), self.term_ref(right, b)]))
        return self.circuit.mk_or(options)

    def formula_ref(self, f: Formula) -> _Ref:
        th = self.theory
        mk_and, mk_or = self.circuit.mk_and, self.circuit.mk_or
        if isinstance(f, Equal):
            return self._relational(f.left, f.right, lambda a, b: a == b)
        if isinstance(f, Compare):
            test = {"<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
                    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}[f.op]
            return self._relational(f.left, f.right, test)
        if isinstance(f, Pred):
            sig = th.predicates[f.name]
            options: list[_Ref] = []
            for combo in itertools.product(*(_candidates(th, a) for a in f.args)):
                names = []
                ok = True
                for v, s in zip(combo, sig):
                    n = str(v) if isinstance(v, int) else v
                    if n not in th.sorts[s]:
                        ok = False
                        break
                    names.append(n)
                if not ok:
                    continue
                parts = [self.term_ref(a, v) for a, v in zip(f.args, combo)]
                options.append(mk_and(parts + [self.varmap.pv[(f.name, tuple(names))]]))
            return mk_or(options)
        if isinstance(f, Not):
            return _neg(self.formula_ref(f.body))
        if isinstance(f, And):
            return mk_and([self.formula_ref(f.left), self.formula_ref(f.right)])
        if isinstance(f, Or):
            return mk_or([self.formula_ref(f.left), self.formula_ref(f.right)])
        if isinstance(f, Implies):
            return mk_or([_neg(self.formula_ref(f.left)), self.formula_ref(f.right)])
        if isinstance(f, Iff):
            a, b = self.formula_ref(f.left), self.formula_ref(f.right)
            return mk_or([mk_and([a, b]), mk_and([_neg(a), _neg(b)])])
        if isinstance(f, (Forall, Exists)):
            raise ValueError("formula is not ground: quantifier remains; expand first")
        raise TypeError(f"not a formula: {f!r}")


def encode(theory: Theory, ground_formulas: Sequence[Formula]) -> tuple[Cnf, VarMap]:
    """Encode ground formulas to a CNF equisatisfiable over the theory's tables."""
    cnf = Cnf(0)
    varmap = VarMap(theory)
    for fname in sorted(theory.functions):
        _, result = theory.functions[fname]
        for point in theory.function_points(fname):
            for value in theory.sorts[result]:
                var = cnf.new_var()
                varmap.sel[(fname, point, value)] = var
                varmap.roles[var] = ("sel", fname, point, value)
    for pname in sorted(theory.predicates):
        for point in theory.predicate_points(pname):
            var = cnf.new_var()
            varmap.pv[(pname, point)] = var
            varmap.roles[var] = ("pv", pname, point)
    # exactly-one selector per function point
    for fname in sorted(theory.functions):
        _, result = theory.functions[fname]
        for point in theory.function_points(fname):
            group = [varmap.sel[(fname, point, v)] for v in theory.sorts[result]]
            cnf.add(group)
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    cnf.add([-group[i], -group[j]])
    encoder = _Encoder(theory, cnf, varmap)
    roots = [encoder.formula_ref(f) for f in ground_formulas]
    encoder.circuit.emit(roots)
    return cnf, varmap


def decode_model(varmap: VarMap, assignment: Sequence[bool]) -> Interpretation:
    """Read the function/predicate tables out of a satisfying assignment."""
    theory = varmap.theory
    functions: dict[str, dict[tuple[str, ...], str]] = {n: {} for n in theory.functions}
    predicates: dict[str, dict[tuple[str, ...], bool]] = {n: {} for n in theory.predicates}
    for fname in theory.functions:
        _, result = theory.functions[fname]
        for point in theory.function_points(fname):
            chosen = [v for v in theory.sorts[result] if assignment[varmap.sel[(fname, point, v)]]]
            if len(chosen) != 1:
                raise InconsistentModel(
                    f"{fname}({','.join(point)}) has {len(chosen)} selected values")
            functions[fname][point] = chosen[0]
    for pname in theory.predicates:
        for point in theory.predicate_points(pname):
            predicates[pname][point] = bool(assignment[varmap.pv[(pname, point)]])
    return Interpretation(theory, functions, predicates, validate=False)


def dimacs_comments(varmap: VarMap) -> list[str]:
    """Comment lines documenting selector and predicate variables."""
    lines = []
    for (fname, point, value), var in varmap.sel.items():
        lines.append(f"sel {fname}({','.join(point)})={value} {var}")
    for (pname, point), var in varmap.pv.items():
        lines.append(f"pv {pname}({','.join(point)}) {var}")
    return lines
