"""Many-sorted first-order logic over finite domains.

The object model here is deliberately small: a theory fixes named sorts with
finite domains (every domain element doubles as a constant naming itself),
typed function and predicate symbols, and nothing else.  An interpretation is
a total table for every function and predicate point.  Arithmetic is limited
to integer-range sorts with constant offsets and comparisons, which is enough
for ordering/adjacency constraints while keeping every theory finitely
enumerable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence, Union

DEFAULT_ENUMERATION_CAP = 10_000_000


class FolError(Exception):
    pass


class TheoryError(FolError):
    """Raised when a theory declaration violates an invariant."""


class TooLarge(FolError):
    """Raised when an enumeration would exceed the configured cap."""


class IllTyped(FolError):
    """Raised when an operation receives a formula that fails sort checking."""

    def __init__(self, report: "CheckReport"):
        self.report = report
        super().__init__("; ".join(e.message for e in report.errors) or "ill-typed formula")


# ---------------------------------------------------------------------------
# Theory


class Theory:
    """Finite skeleton of a theory: sorts, fixed domain constants, symbol types.

    All interpretations extending this skeleton (i.e. filling in the function
    and predicate tables) are the theory's interpretations.
    """

    def __init__(
        self,
        sorts: Sequence[tuple[str, Sequence[str]]],
        functions: Sequence[tuple[str, Sequence[str], str]] = (),
        predicates: Sequence[tuple[str, Sequence[str]]] = (),
        int_ranges: Optional[dict[str, tuple[int, int]]] = None,
    ):
        self.sorts: dict[str, tuple[str, ...]] = {}
        self.int_ranges: dict[str, tuple[int, int]] = dict(int_ranges or {})
        self.functions: dict[str, tuple[tuple[str, ...], str]] = {}
        self.predicates: dict[str, tuple[str, ...]] = {}

        for name, elems in sorts:
            if name in self.sorts:
                raise TheoryError(f"duplicate sort {name!r}")
            if not elems:
                raise TheoryError(f"sort {name!r} has an empty domain")
            if len(set(elems)) != len(elems):
                raise TheoryError(f"sort {name!r} repeats a domain element")
            self.sorts[name] = tuple(elems)
        for name, (low, high) in self.int_ranges.items():
            if name not in self.sorts:
                raise TheoryError(f"integer range declared for unknown sort {name!r}")
            expected = tuple(str(i) for i in range(low, high + 1))
            if self.sorts[name] != expected:
                raise TheoryError(f"integer sort {name!r} domain must be {low}..{high}")
        for name, args, result in functions:
            self._check_symbol_name(name, "function")
            for s in (*args, result):
                if s not in self.sorts:
                    raise TheoryError(f"function {name!r} uses undeclared sort {s!r}")
            self.functions[name] = (tuple(args), result)
        for name, args in predicates:
            self._check_symbol_name(name, "predicate")
            if not args:
                raise TheoryError(f"predicate {name!r} must have arity >= 1")
            for s in args:
                if s not in self.sorts:
                    raise TheoryError(f"predicate {name!r} uses undeclared sort {s!r}")
            self.predicates[name] = tuple(args)

        # element name -> sorts containing it (may be several integer sorts)
        self.element_sorts: dict[str, tuple[str, ...]] = {}
        for sname, elems in self.sorts.items():
            for e in elems:
                self.element_sorts[e] = self.element_sorts.get(e, ()) + (sname,)

    def _check_symbol_name(self, name: str, kind: str) -> None:
        if name in self.functions or name in self.predicates:
            raise TheoryError(f"duplicate symbol {name!r}")
        for sname, elems in self.sorts.items():
            if name in elems:
                raise TheoryError(f"{kind} {name!r} collides with an element of sort {sname!r}")

    def is_int_sort(self, sort: str) -> bool:
        return sort in self.int_ranges

    def domain(self, sort: str) -> tuple[str, ...]:
        return self.sorts[sort]

    def element_value(self, element: str, sort: str):
        """Semantic value of a domain element: int for integer sorts, else the name."""
        return int(element) if sort in self.int_ranges else element

    def interpretation_count(self) -> int:
        """Number of total interpretations of this skeleton."""
        n = 1
        for args, result in self.functions.values():
            points = math.prod(len(self.sorts[s]) for s in args)
            n *= len(self.sorts[result]) ** points
        for args in self.predicates.values():
            points = math.prod(len(self.sorts[s]) for s in args)
            n *= 2 ** points
        return n

    def function_points(self, name: str) -> list[tuple[str, ...]]:
        args, _ = self.functions[name]
        return [tuple(p) for p in itertools.product(*(self.sorts[s] for s in args))]

    def predicate_points(self, name: str) -> list[tuple[str, ...]]:
        args = self.predicates[name]
        return [tuple(p) for p in itertools.product(*(self.sorts[s] for s in args))]

    def __repr__(self) -> str:
        return f"Theory(sorts={list(self.sorts)}, functions={list(self.functions)}, predicates={list(self.predicates)})"


# ---------------------------------------------------------------------------
# Terms and formulas


@dataclass(frozen=True)
class Var:
    name: str
    sort: str


@dataclass(frozen=True)
class Elem:
    """A domain element used as the constant naming itself."""

    name: str
    sort: str


@dataclass(frozen=True)
class Apply:
    func: str
    args: tuple["Term", ...]


@dataclass(frozen=True)
class Offset:
    """base + delta over an integer-range sort; evaluates over the integers."""

    base: "Term"
    delta: int


Term = Union[Var, Elem, Apply, Offset]


@dataclass(frozen=True)
class Equal:
    left: Term
    right: Term


@dataclass(frozen=True)
class Compare:
    op: str  # one of < <= > >=
    left: Term
    right: Term


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    sort: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: str
    body: "Formula"


Formula = Union[Equal, Compare, Pred, Not, And, Or, Implies, Iff, Forall, Exists]

COMPARE_OPS = ("<", "<=", ">", ">=")

_BINARY = {And: "&", Or: "|", Implies: "->", Iff: "<->"}


def conjoin(formulas: Sequence[Formula]) -> Optional[Formula]:
    """Right-nested conjunction of the given formulas; None when empty."""
    if not formulas:
        return None
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = And(f, out)
    return out


# ---------------------------------------------------------------------------
# Sort checking


@dataclass(frozen=True)
class SortingError:
    kind: str  # UnknownSymbol | ArityMismatch | SortMismatch | FreeVariable
    path: str
    message: str


@dataclass
class CheckReport:
    ok: bool
    errors: list[SortingError] = field(default_factory=list)


def _term_sort(theory: Theory, term: Term, env: dict[str, str], path: str, errors: list[SortingError]) -> Optional[str]:
    if isinstance(term, Var):
        bound = env.get(term.name)
        if bound is None:
            errors.append(SortingError("FreeVariable", path, f"unbound variable {term.name!r}"))
            return term.sort if term.sort in theory.sorts else None
        if bound != term.sort:
            errors.append(SortingError("SortMismatch", path, f"variable {term.name!r} bound at sort {bound!r}, used at {term.sort!r}"))
        return bound
    if isinstance(term, Elem):
        if term.sort not in theory.sorts:
            errors.append(SortingError("UnknownSymbol", path, f"unknown sort {term.sort!r}"))
            return None
        if term.name not in theory.sorts[term.sort]:
            errors.append(SortingError("UnknownSymbol", path, f"{term.name!r} is not an element of sort {term.sort!r}"))
        return term.sort
    if isinstance(term, Apply):
        sig = theory.functions.get(term.func)
        if sig is None:
            errors.append(SortingError("UnknownSymbol", path, f"unknown function {term.func!r}"))
            for i, a in enumerate(term.args):
                _term_sort(theory, a, env, f"{path}.arg{i}", errors)
            return None
        arg_sorts, result = sig
        if len(arg_sorts) != len(term.args):
            errors.append(SortingError(
                "ArityMismatch", path,
                f"function {term.func!r} expects {len(arg_sorts)} argument(s), got {len(term.args)}"))
        for i, (a, expected) in enumerate(zip(term.args, arg_sorts)):
            got = _term_sort(theory, a, env, f"{path}.arg{i}", errors)
            if got is not None and got != expected:
                errors.append(SortingError(
                    "SortMismatch", f"{path}.arg{i}",
                    f"argument {i} of {term.func!r} has sort {got!r}, expected {expected!r}"))
        return result
    if isinstance(term, Offset):
        base = _term_sort(theory, term.base, env, f"{path}.base", errors)
        if base is not None and not theory.is_int_sort(base):
            errors.append(SortingError("SortMismatch", path, f"offset base has non-integer sort {base!r}"))
        return base
    raise TypeError(f"not a term: {term!r}")


def _comparable(theory: Theory, s1: Optional[str], s2: Optional[str]) -> bool:
    if s1 is None or s2 is None:
        return True  # an error was already recorded for the unknown side
    if s1 == s2:
        return True
    return theory.is_int_sort(s1) and theory.is_int_sort(s2)


def _check(theory: Theory, formula: Formula, env: dict[str, str], path: str, errors: list[SortingError]) -> None:
    if isinstance(formula, Equal):
        s1 = _term_sort(theory, formula.left, env, f"{path}.left", errors)
        s2 = _term_sort(theory, formula.right, env, f"{path}.right", errors)
        if not _comparable(theory, s1, s2):
            errors.append(SortingError("SortMismatch", path, f"equality between sorts {s1!r} and {s2!r}"))
    elif isinstance(formula, Compare):
        s1 = _term_sort(theory, formula.left, env, f"{path}.left", errors)
        s2 = _term_sort(theory, formula.right, env, f"{path}.right", errors)
        for s, side in ((s1, "left"), (s2, "right")):
            if s is not None and not theory.is_int_sort(s):
                errors.append(SortingError("SortMismatch", f"{path}.{side}", f"comparison over non-integer sort {s!r}"))
    elif isinstance(formula, Pred):
        sig = theory.predicates.get(formula.name)
        if sig is None:
            errors.append(SortingError("UnknownSymbol", path, f"unknown predicate {formula.name!r}"))
            for i, a in enumerate(formula.args):
                _term_sort(theory, a, env, f"{path}.arg{i}", errors)
            return
        if len(sig) != len(formula.args):
            errors.append(SortingError(
                "ArityMismatch", path,
                f"predicate {formula.name!r} expects {len(sig)} argument(s), got {len(formula.args)}"))
        for i, (a, expected) in enumerate(zip(formula.args, sig)):
            got = _term_sort(theory, a, env, f"{path}.arg{i}", errors)
            if got is not None and got != expected:
                errors.append(SortingError(
                    "SortMismatch", f"{path}.arg{i}",
                    f"argument {i} of {formula.name!r} has sort {got!r}, expected {expected!r}"))
    elif isinstance(formula, Not):
        _check(theory, formula.body, env, f"{path}.body", errors)
    elif isinstance(formula, (And, Or, Implies, Iff)):
        _check(theory, formula.left, env, f"{path}.left", errors)
        _check(theory, formula.right, env, f"{path}.right", errors)
    elif isinstance(formula, (Forall, Exists)):
        if formula.sort not in theory.sorts:
            errors.append(SortingError("UnknownSymbol", path, f"quantifier over unknown sort {formula.sort!r}"))
            return
        saved = env.get(formula.var)
        env[formula.var] = formula.sort
        _check(theory, formula.body, env, f"{path}.body", errors)
        if saved is None:
            del env[formula.var]
        else:
            env[formula.var] = saved
    else:
        raise TypeError(f"not a formula: {formula!r}")


def sort_check(theory: Theory, formula: Formula) -> CheckReport:
    """Check that a formula is closed and every symbol use obeys its declared type."""
    errors: list[SortingError] = []
    _check(theory, formula, {}, "f", errors)
    return CheckReport(ok=not errors, errors=errors)


# ---------------------------------------------------------------------------
# Interpretations


class Interpretation:
    """Total function and predicate tables over a theory's domains.

    Table keys are tuples of domain-element names; function values are
    element names, predicate values booleans.
    """

    __slots__ = ("theory", "functions", "predicates")

    def __init__(
        self,
        theory: Theory,
        functions: dict[str, dict[tuple[str, ...], str]],
        predicates: dict[str, dict[tuple[str, ...], bool]],
        validate: bool = True,
    ):
        self.theory = theory
        self.functions = functions
        self.predicates = predicates
        if validate:
            self._validate()

    def _validate(self) -> None:
        th = self.theory
        for name, (args, result) in th.functions.items():
            table = self.functions.get(name)
            if table is None:
                raise FolError(f"missing table for function {name!r}")
            points = th.function_points(name)
            if set(table) != set(points):
                raise FolError(f"table for function {name!r} is not total")
            rdom = set(th.sorts[result])
            for k, v in table.items():
                if v not in rdom:
                    raise FolError(f"{name}({','.join(k)}) = {v!r} is outside sort {result!r}")
        for name in th.predicates:
            table = self.predicates.get(name)
            if table is None:
                raise FolError(f"missing table for predicate {name!r}")
            if set(table) != set(th.predicate_points(name)):
                raise FolError(f"table for predicate {name!r} is not total")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Interpretation)
            and self.functions == other.functions
            and self.predicates == other.predicates
        )

    def __hash__(self):
        return hash((
            tuple(sorted((f, tuple(sorted(t.items()))) for f, t in self.functions.items())),
            tuple(sorted((p, tuple(sorted(t.items()))) for p, t in self.predicates.items())),
        ))

    # --- interchange formats -------------------------------------------------

    def to_text(self) -> str:
        """One line per table entry, `f(args) = v` / `p(args) = true|false`, sorted."""
        lines = []
        for name, table in self.functions.items():
            for args, v in table.items():
                lines.append(f"{name}({','.join(args)}) = {v}")
        for name, table in self.predicates.items():
            for args, v in table.items():
                lines.append(f"{name}({','.join(args)}) = {'true' if v else 'false'}")
        return "\n".join(sorted(lines))

    def to_doc(self) -> dict:
        return {
            "theory": theory_to_doc(self.theory),
            "functions": {
                name: {",".join(args): v for args, v in sorted(table.items())}
                for name, table in sorted(self.functions.items())
            },
            "predicates": {
                name: {",".join(args): v for args, v in sorted(table.items())}
                for name, table in sorted(self.predicates.items())
            },
        }

    @classmethod
    def from_doc(cls, theory: Theory, doc: dict) -> "Interpretation":
        def split(key: str) -> tuple[str, ...]:
            return tuple(key.split(",")) if key else ()

        functions = {
            name: {split(k): v for k, v in table.items()}
            for name, table in doc.get("functions", {}).items()
        }
        predicates = {
            name: {split(k): bool(v) for k, v in table.items()}
            for name, table in doc.get("predicates", {}).items()
        }
        return cls(theory, functions, predicates)


def theory_to_doc(theory: Theory) -> dict:
    return {
        "sorts": [
            {"name": name, "elements": list(elems)}
            | ({"int_range": list(theory.int_ranges[name])} if name in theory.int_ranges else {})
            for name, elems in theory.sorts.items()
        ],
        "functions": [
            {"name": n, "args": list(a), "result": r} for n, (a, r) in theory.functions.items()
        ],
        "predicates": [{"name": n, "args": list(a)} for n, a in theory.predicates.items()],
    }


def theory_from_doc(doc: dict) -> Theory:
    sorts = [(s["name"], s["elements"]) for s in doc["sorts"]]
    int_ranges = {
        s["name"]: (s["int_range"][0], s["int_range"][1])
        for s in doc["sorts"]
        if "int_range" in s
    }
    return Theory(
        sorts,
        [(f["name"], f["args"], f["result"]) for f in doc.get("functions", [])],
        [(p["name"], p["args"]) for p in doc.get("predicates", [])],
        int_ranges,
    )


# ---------------------------------------------------------------------------
# Evaluation

_UNDEF = object()  # value of a term whose function argument left the domain


def _eval_term(interp: Interpretation, term: Term, env: dict):
    th = interp.theory
    if isinstance(term, Elem):
        return th.element_value(term.name, term.sort)
    if isinstance(term, Var):
        try:
            return env[term.name]
        except KeyError:
            raise IllTyped(CheckReport(False, [SortingError("FreeVariable", "f", f"unbound variable {term.name!r}")]))
    if isinstance(term, Apply):
        sig = th.functions.get(term.func)
        if sig is None:
            raise IllTyped(CheckReport(False, [SortingError("UnknownSymbol", "f", f"unknown function {term.func!r}")]))
        arg_sorts, result = sig
        if len(arg_sorts) != len(term.args):
            raise IllTyped(CheckReport(False, [SortingError("ArityMismatch", "f", f"bad arity for {term.func!r}")]))
        key = []
        for a, s in zip(term.args, arg_sorts):
            v = _eval_term(interp, a, env)
            if v is _UNDEF:
                return _UNDEF
            name = str(v) if isinstance(v, int) else v
            if name not in th.sorts[s]:
                return _UNDEF
            key.append(name)
        out = interp.functions[term.func][tuple(key)]
        return th.element_value(out, result)
    if isinstance(term, Offset):
        v = _eval_term(interp, term.base, env)
        return _UNDEF if v is _UNDEF else v + term.delta
    raise TypeError(f"not a term: {term!r}")


def _eval(interp: Interpretation, formula: Formula, env: dict) -> bool:
    th = interp.theory
    if isinstance(formula, Equal):
        a = _eval_term(interp, formula.left, env)
        b = _eval_term(interp, formula.right, env)
        return a is not _UNDEF and b is not _UNDEF and a == b
    if isinstance(formula, Compare):
        a = _eval_term(interp, formula.left, env)
        b = _eval_term(interp, formula.right, env)
        if a is _UNDEF or b is _UNDEF:
            return False
        if formula.op == "<":
            return a < b
        if formula.op == "<=":
            return a <= b
        if formula.op == ">":
            return a > b
        return a >= b
    if isinstance(formula, Pred):
        sig = th.predicates.get(formula.name)
        if sig is None:
            raise IllTyped(CheckReport(False, [SortingError("UnknownSymbol", "f", f"unknown predicate {formula.name!r}")]))
        key = []
        for a, s in zip(formula.args, sig):
            v = _eval_term(interp, a, env)
            if v is _UNDEF:
                return False
            name = str(v) if isinstance(v, int) else v
            if name not in th.sorts[s]:
                return False
            key.append(name)
        return interp.predicates[formula.name][tuple(key)]
    if isinstance(formula, Not):
        return not _eval(interp, formula.body, env)
    if isinstance(formula, And):
        return _eval(interp, formula.left, env) and _eval(interp, formula.right, env)
    if isinstance(formula, Or):
        return _eval(interp, formula.left, env) or _eval(interp, formula.right, env)
    if isinstance(formula, Implies):
        return (not _eval(interp, formula.left, env)) or _eval(interp, formula.right, env)
    if isinstance(formula, Iff):
        return _eval(interp, formula.left, env) == _eval(interp, formula.right, env)
    if isinstance(formula, Forall):
        saved = env.get(formula.var, _UNDEF)
        ok = True
        for e in th.sorts[formula.sort]:
            env[formula.var] = th.element_value(e, formula.sort)
            if not _eval(interp, formula.body, env):
                ok = False
                break
        if saved is _UNDEF:
            env.pop(formula.var, None)
        else:
            env[formula.var] = saved
        return ok
    if isinstance(formula, Exists):
        saved = env.get(formula.var, _UNDEF)
        ok = False
        for e in th.sorts[formula.sort]:
            env[formula.var] = th.element_value(e, formula.sort)
            if _eval(interp, formula.body, env):
                ok = True
                break
        if saved is _UNDEF:
            env.pop(formula.var, None)
        else:
            env[formula.var] = saved
        return ok
    raise TypeError(f"not a formula: {formula!r}")


def evaluate(interp: Interpretation, formula: Formula) -> bool:
    """Tarskian truth value of a closed formula under a total interpretation.

    Quantifiers range over the declared finite domains; offsets and
    comparisons evaluate over the integers, and an atom whose term leaves
    every declared domain is false.
    """
    return _eval(interp, formula, {})


# ---------------------------------------------------------------------------
# Substitution


def substitute(formula: Formula, var: str, element: Elem) -> Formula:
    """Replace free occurrences of `var` by a domain constant of the same sort."""

    def sub_term(t: Term) -> Term:
        if isinstance(t, Var):
            if t.name != var:
                return t
            if t.sort != element.sort:
                raise IllTyped(CheckReport(False, [SortingError(
                    "SortMismatch", "f",
                    f"substituting {element.sort!r} element for variable of sort {t.sort!r}")]))
            return element
        if isinstance(t, Apply):
            return Apply(t.func, tuple(sub_term(a) for a in t.args))
        if isinstance(t, Offset):
            return Offset(sub_term(t.base), t.delta)
        return t

    def sub(f: Formula) -> Formula:
        if isinstance(f, Equal):
            return Equal(sub_term(f.left), sub_term(f.right))
        if isinstance(f, Compare):
            return Compare(f.op, sub_term(f.left), sub_term(f.right))
        if isinstance(f, Pred):
            return Pred(f.name, tuple(sub_term(a) for a in f.args))
        if isinstance(f, Not):
            return Not(sub(f.body))
        if isinstance(f, (And, Or, Implies, Iff)):
            return type(f)(sub(f.left), sub(f.right))
        if isinstance(f, (Forall, Exists)):
            if f.var == var:  # shadowed below this binder
                return f
            return type(f)(f.var, f.sort, sub(f.body))
        raise TypeError(f"not a formula: {f!r}")

    return sub(formula)


def expand_quantifiers(theory: Theory, formula: Formula) -> Formula:
    """Replace every quantifier by the finite conjunction/disjunction over its domain."""
    if isinstance(formula, (Equal, Compare, Pred)):
        return formula
    if isinstance(formula, Not):
        return Not(expand_quantifiers(theory, formula.body))
    if isinstance(formula, (And, Or, Implies, Iff)):
        return type(formula)(
            expand_quantifiers(theory, formula.left),
            expand_quantifiers(theory, formula.right),
        )
    if isinstance(formula, (Forall, Exists)):
        parts = [
            expand_quantifiers(theory, substitute(formula.body, formula.var, Elem(e, formula.sort)))
            for e in theory.sorts[formula.sort]
        ]
        out = parts[0]
        combine = And if isinstance(formula, Forall) else Or
        for p in parts[1:]:
            out = combine(out, p)
        return out
    raise TypeError(f"not a formula: {formula!r}")


# ---------------------------------------------------------------------------
# Brute-force enumeration (the test oracle for satisfiability questions)


def _table_layout(theory: Theory):
    """Deterministic flat layout of all table points: name-sorted symbols,
    argument tuples in domain order, then value choices."""
    layout = []  # (kind, symbol, point, choices)
    for name in sorted(theory.functions):
        _, result = theory.functions[name]
        for point in theory.function_points(name):
            layout.append(("f", name, point, theory.sorts[result]))
    for name in sorted(theory.predicates):
        for point in theory.predicate_points(name):
            layout.append(("p", name, point, (False, True)))
    return layout


def enumerate_interpretations(
    theory: Theory, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[Interpretation]:
    """Yield every total interpretation exactly once, in a fixed order."""
    total = theory.interpretation_count()
    if total > cap:
        raise TooLarge(f"{total} interpretations exceed cap {cap}")
    layout = _table_layout(theory)
    for values in itertools.product(*(choices for _, _, _, choices in layout)):
        functions: dict[str, dict[tuple[str, ...], str]] = {n: {} for n in theory.functions}
        predicates: dict[str, dict[tuple[str, ...], bool]] = {n: {} for n in theory.predicates}
        for (kind, name, point, _), v in zip(layout, values):
            if kind == "f":
                functions[name][point] = v
            else:
                predicates[name][point] = v
        yield Interpretation(theory, functions, predicates, validate=False)


def _compile_ground(theory: Theory, formula: Formula, slot: dict) -> Callable:
    """Compile a ground formula to a closure over a flat tuple of table values.

    Constant subexpressions fold away at compile time, which keeps the
    brute-force model counting usable at hundreds of thousands of
    interpretations.
    """

    def term(t: Term):
        # returns ("const", value) or ("fn", closure); value None means undefined
        if isinstance(t, Elem):
            return ("const", theory.element_value(t.name, t.sort))
        if isinstance(t, Apply):
            arg_sorts, result = theory.functions[t.func]
            compiled = [term(a) for a in t.args]
            int_result = theory.is_int_sort(result)
            if all(kind == "const" for kind, _ in compiled):
                key = []
                for (_, v), s in zip(compiled, arg_sorts):
                    if v is None:
                        return ("const", None)
                    name = str(v) if isinstance(v, int) else v
                    if name not in theory.sorts[s]:
                        return ("const", None)
                    key.append(name)
                idx = slot[("f", t.func, tuple(key))]
                if int_result:
                    return ("fn", lambda state, idx=idx: int(state[idx]))
                return ("fn", lambda state, idx=idx: state[idx])

            def run(state, compiled=compiled, arg_sorts=arg_sorts, func=t.func, int_result=int_result):
                key = []
                for (kind, v), s in zip(compiled, arg_sorts):
                    if kind == "fn":
                        v = v(state)
                    if v is None:
                        return None
                    name = str(v) if isinstance(v, int) else v
                    if name not in theory.sorts[s]:
                        return None
                    key.append(name)
                out = state[slot[("f", func, tuple(key))]]
                return int(out) if int_result else out

            return ("fn", run)
        if isinstance(t, Offset):
            kind, base = term(t.base)
            if kind == "const":
                return ("const", None if base is None else base + t.delta)
            return ("fn", lambda state, base=base, d=t.delta: (lambda v: None if v is None else v + d)(base(state)))
        raise TypeError(f"ground term expected, got {t!r}")

    def binop(op: str, lt, rt):
        lk, lv = lt
        rk, rv = rt
        table = {
            "==": lambda a, b: a == b,
            "<": lambda a, b: a < b,
            "<=": lambda a, b: a <= b,
            ">": lambda a, b: a > b,
            ">=": lambda a, b: a >= b,
        }
        fn = table[op]
        if lk == "const" and rk == "const":
            val = lv is not None and rv is not None and fn(lv, rv)
            return ("const", val)
        if lk == "const":
            if lv is None:
                return ("const", False)
            return ("fn", lambda state, lv=lv, rv=rv, fn=fn: (lambda b: b is not None and fn(lv, b))(rv(state)))
        if rk == "const":
            if rv is None:
                return ("const", False)
            return ("fn", lambda state, lv=lv, rv=rv, fn=fn: (lambda a: a is not None and fn(a, rv))(lv(state)))
        return ("fn", lambda state, lv=lv, rv=rv, fn=fn: (
            lambda a, b: a is not None and b is not None and fn(a, b))(lv(state), rv(state)))

    def fml(f: Formula):
        if isinstance(f, Equal):
            return binop("==", term(f.left), term(f.right))
        if isinstance(f, Compare):
            return binop(f.op, term(f.left), term(f.right))
        if isinstance(f, Pred):
            sig = theory.predicates[f.name]
            compiled = [term(a) for a in f.args]

            def run(state, compiled=compiled, sig=sig, name=f.name):
                key = []
                for (kind, v), s in zip(compiled, sig):
                    if kind == "fn":
                        v = v(state)
                    if v is None:
                        return False
                    nm = str(v) if isinstance(v, int) else v
                    if nm not in theory.sorts[s]:
                        return False
                    key.append(nm)
                return state[slot[("p", name, tuple(key))]]

            if all(kind == "const" for kind, _ in compiled):
                # key is fixed; reduce to a single slot read when it stays in domain
                key = []
                for (_, v), s in zip(compiled, sig):
                    nm = str(v) if isinstance(v, int) else (v if v is not None else None)
                    if nm is None or nm not in theory.sorts[s]:
                        return ("const", False)
                    key.append(nm)
                idx = slot[("p", f.name, tuple(key))]
                return ("fn", lambda state, idx=idx: state[idx])
            return ("fn", run)
        if isinstance(f, Not):
            k, v = fml(f.body)
            if k == "const":
                return ("const", not v)
            return ("fn", lambda state, v=v: not v(state))
        if isinstance(f, (And, Or)):
            lk, lv = fml(f.left)
            rk, rv = fml(f.right)
            is_and = isinstance(f, And)
            if lk == "const":
                if lv == is_and:
                    return (rk, rv)
                return ("const", lv)
            if rk == "const":
                if rv == is_and:
                    return (lk, lv)
                return ("const", rv)
            if is_and:
                return ("fn", lambda state, lv=lv, rv=rv: lv(state) and rv(state))
            return ("fn", lambda state, lv=lv, rv=rv: lv(state) or rv(state))
        if isinstance(f, Implies):
            return fml(Or(Not(f.left), f.right))
        if isinstance(f, Iff):
            lk, lv = fml(f.left)
            rk, rv = fml(f.right)
            if lk == "const" and rk == "const":
                return ("const", lv == rv)
            if lk == "const":
                return (rk, rv) if lv else ("fn", lambda state, rv=rv: not rv(state))
            if rk == "const":
                return (lk, lv) if rv else ("fn", lambda state, lv=lv: not lv(state))
            return ("fn", lambda state, lv=lv, rv=rv: lv(state) == rv(state))
        raise TypeError(f"ground formula expected, got {f!r}")

    kind, value = fml(formula)
    if kind == "const":
        return lambda state, value=value: value
    return value


def count_models(
    theory: Theory,
    formulas: Sequence[Formula],
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> int:
    """Count interpretations satisfying every formula, by exhaustive enumeration.

    Same enumeration order and cap as enumerate_interpretations, but tables
    are kept as flat tuples and formulas are compiled once, so counting over
    a few hundred thousand interpretations stays fast.
    """
    total = theory.interpretation_count()
    if total > cap:
        raise TooLarge(f"{total} interpretations exceed cap {cap}")
    for f in formulas:
        report = sort_check(theory, f)
        if not report.ok:
            raise IllTyped(report)
    layout = _table_layout(theory)
    slot = {(kind, name, point): i for i, (kind, name, point, _) in enumerate(layout)}
    ground = [expand_quantifiers(theory, f) for f in formulas]
    compiled = [_compile_ground(theory, g, slot) for g in ground]
    count = 0
    for state in itertools.product(*(choices for _, _, _, choices in layout)):
        if all(fn(state) for fn in compiled):
            count += 1
    return count
