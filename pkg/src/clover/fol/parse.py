"""Concrete syntax for theories, formulas, and .fol documents.

Grammar sketch (the full EBNF ships in docs/grammar.ebnf):

    theory decls   sort s = 1..6 | sort s = {a, b}
                   func f : s1, s2 -> s     const c : s     pred p : s1, s2
    formulas       forall v: s. body   exists v: s. body
                   ~ f    f & g    f | g    f -> g    f <-> g
                   t1 = t2   t1 != t2   t1 < t2  (<=, >, >=)
                   p(t, ...)   f(t, ...)   t + 3   t - 1
    documents      theory { ... }   formula name { ... }

Connective precedence, tightest first: ~, &, |, -> (right-assoc), <->.
A quantifier body extends maximally to the right.  `!=` is sugar for a
negated equality and is normalized away at parse time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

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
    TheoryError,
    Var,
)

RESERVED = {"forall", "exists", "sort", "func", "pred", "const", "theory", "formula"}


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int


class ParseError(Exception):
    """Parse or elaboration failure, pointing at the offending source span.

    kind is one of Lexical, Syntax, UnknownSymbol, Arity, Sort.
    """

    def __init__(self, kind: str, span: SourceSpan, message: str):
        self.kind = kind
        self.span = span
        self.message = message
        super().__init__(f"{kind} error at line {span.line}, column {span.column}: {message}")


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT INT PUNCT EOF
    text: str
    span: SourceSpan


_PUNCT = ("<->", "->", "<=", ">=", "!=", "..", "(", ")", "{", "}", ",", ":", ".", "=", "<", ">", "~", "&", "|", "+", "-")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")


def _lex(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        span_start = (i, line, col)
        m = _IDENT_RE.match(source, i)
        if m:
            text = m.group()
            tokens.append(_Token("IDENT", text, SourceSpan(i, m.end(), line, col)))
            col += len(text)
            i = m.end()
            continue
        m = _INT_RE.match(source, i)
        if m:
            text = m.group()
            tokens.append(_Token("INT", text, SourceSpan(i, m.end(), line, col)))
            col += len(text)
            i = m.end()
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                tokens.append(_Token("PUNCT", p, SourceSpan(i, i + len(p), line, col)))
                col += len(p)
                i += len(p)
                break
        else:
            raise ParseError("Lexical", SourceSpan(i, i + 1, line, col), f"unexpected character {c!r}")
    tokens.append(_Token("EOF", "", SourceSpan(n, n, line, col)))
    return tokens


class _Cursor:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at_punct(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "PUNCT" and t.text == text

    def eat_punct(self, text: str) -> Optional[_Token]:
        if self.at_punct(text):
            return self.next()
        return None

    def expect_punct(self, text: str) -> _Token:
        t = self.peek()
        if t.kind == "PUNCT" and t.text == text:
            return self.next()
        raise ParseError("Syntax", t.span, f"expected {text!r}, found {t.text or 'end of input'!r}")

    def expect_ident(self, what: str) -> _Token:
        t = self.peek()
        if t.kind != "IDENT":
            raise ParseError("Syntax", t.span, f"expected {what}, found {t.text or 'end of input'!r}")
        if t.text in RESERVED:
            raise ParseError("Syntax", t.span, f"reserved word {t.text!r} cannot be used as {what}")
        return self.next()


# ---------------------------------------------------------------------------
# Theory declarations


def _parse_theory_decls(cur: _Cursor, stop: Optional[str]) -> Theory:
    sorts: list[tuple[str, list[str]]] = []
    int_ranges: dict[str, tuple[int, int]] = {}
    functions: list[tuple[str, list[str], str]] = []
    predicates: list[tuple[str, list[str]]] = []
    declared: dict[str, SourceSpan] = {}

    def check_sort(tok: _Token) -> str:
        if tok.text not in declared:
            raise ParseError("UnknownSymbol", tok.span, f"undeclared sort {tok.text!r}")
        return tok.text

    while True:
        t = cur.peek()
        if t.kind == "EOF" or (stop is not None and cur.at_punct(stop)):
            break
        if t.kind != "IDENT" or t.text not in ("sort", "func", "const", "pred"):
            raise ParseError("Syntax", t.span, "expected a sort/func/const/pred declaration")
        cur.next()
        if t.text == "sort":
            name = cur.expect_ident("a sort name")
            cur.expect_punct("=")
            if cur.peek().kind == "INT":
                low_tok = cur.next()
                cur.expect_punct("..")
                high_tok = cur.peek()
                if high_tok.kind != "INT":
                    raise ParseError("Syntax", high_tok.span, "expected the high end of the integer range")
                cur.next()
                low, high = int(low_tok.text), int(high_tok.text)
                if high < low:
                    raise ParseError("Syntax", high_tok.span, f"empty integer range {low}..{high}")
                sorts.append((name.text, [str(i) for i in range(low, high + 1)]))
                int_ranges[name.text] = (low, high)
            else:
                cur.expect_punct("{")
                elems: list[str] = []
                if cur.at_punct("}"):
                    raise ParseError("Syntax", cur.peek().span, "sort must declare a non-empty domain")
                while True:
                    elems.append(cur.expect_ident("a domain element").text)
                    if not cur.eat_punct(","):
                        break
                cur.expect_punct("}")
                sorts.append((name.text, elems))
            declared[name.text] = name.span
        elif t.text == "func":
            name = cur.expect_ident("a function name")
            cur.expect_punct(":")
            args: list[str] = []
            if not cur.at_punct("->"):
                while True:
                    args.append(check_sort(cur.expect_ident("an argument sort")))
                    if not cur.eat_punct(","):
                        break
            cur.expect_punct("->")
            result = check_sort(cur.expect_ident("a result sort"))
            functions.append((name.text, args, result))
        elif t.text == "const":
            name = cur.expect_ident("a constant name")
            cur.expect_punct(":")
            result = check_sort(cur.expect_ident("a sort"))
            functions.append((name.text, [], result))
        else:  # pred
            name = cur.expect_ident("a predicate name")
            cur.expect_punct(":")
            args = [check_sort(cur.expect_ident("an argument sort"))]
            while cur.eat_punct(","):
                args.append(check_sort(cur.expect_ident("an argument sort")))
            predicates.append((name.text, args))

    try:
        return Theory(sorts, functions, predicates, int_ranges)
    except TheoryError as e:
        anchor = cur.peek().span
        raise ParseError("Sort", anchor, str(e)) from e


def parse_theory(source: str) -> Theory:
    """Parse bare theory declarations (no surrounding block)."""
    cur = _Cursor(_lex(source))
    theory = _parse_theory_decls(cur, stop=None)
    if cur.peek().kind != "EOF":
        raise ParseError("Syntax", cur.peek().span, "trailing input after theory declarations")
    return theory


# ---------------------------------------------------------------------------
# Raw term syntax (resolved against a theory in a second step)


@dataclass(frozen=True)
class _RawName:
    text: str
    span: SourceSpan


@dataclass(frozen=True)
class _RawCall:
    name: str
    args: tuple
    span: SourceSpan


@dataclass(frozen=True)
class _RawOffset:
    base: object
    delta: int
    span: SourceSpan


class _FormulaParser:
    def __init__(self, theory: Theory, cur: _Cursor):
        self.theory = theory
        self.cur = cur
        self.scope: list[tuple[str, str]] = []  # (variable, sort), innermost last

    # -- formula levels ----------------------------------------------------

    def formula(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        left = self.implies()
        if self.cur.eat_punct("<->"):
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.or_()
        if self.cur.eat_punct("->"):
            return Implies(left, self.implies())
        return left

    def or_(self) -> Formula:
        out = self.and_()
        while self.cur.eat_punct("|"):
            out = Or(out, self.and_())
        return out

    def and_(self) -> Formula:
        out = self.unary()
        while self.cur.eat_punct("&"):
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        if self.cur.eat_punct("~"):
            return Not(self.unary())
        t = self.cur.peek()
        if t.kind == "IDENT" and t.text in ("forall", "exists"):
            self.cur.next()
            var = self.cur.expect_ident("a variable name")
            self.cur.expect_punct(":")
            sort = self.cur.expect_ident("a sort name")
            if sort.text not in self.theory.sorts:
                raise ParseError("UnknownSymbol", sort.span, f"undeclared sort {sort.text!r}")
            self.cur.expect_punct(".")
            self.scope.append((var.text, sort.text))
            body = self.formula()
            self.scope.pop()
            cls = Forall if t.text == "forall" else Exists
            return cls(var.text, sort.text, body)
        if self.cur.eat_punct("("):
            inner = self.formula()
            self.cur.expect_punct(")")
            return inner
        return self.atom()

    # -- atoms ---------------------------------------------------------------

    def atom(self) -> Formula:
        left = self.raw_term()
        t = self.cur.peek()
        if t.kind == "PUNCT" and t.text in ("=", "!=", "<", "<=", ">", ">="):
            self.cur.next()
            right = self.raw_term()
            if t.text in ("=", "!="):
                l, r = self.resolve_equal(left, right)
                eq = Equal(l, r)
                return Not(eq) if t.text == "!=" else eq
            l, r = self.resolve_compare(left, right, t.span)
            return Compare(t.text, l, r)
        if isinstance(left, _RawCall) and left.name in self.theory.predicates:
            sig = self.theory.predicates[left.name]
            if len(sig) != len(left.args):
                raise ParseError(
                    "Arity", left.span,
                    f"predicate {left.name!r} expects {len(sig)} argument(s), got {len(left.args)}")
            args = tuple(self.resolve(a, expected) for a, expected in zip(left.args, sig))
            return Pred(left.name, args)
        raise ParseError("Syntax", t.span, "expected a comparison operator or a predicate atom")

    def raw_term(self):
        t = self.cur.peek()
        if t.kind == "INT":
            self.cur.next()
            base = _RawName(t.text, t.span)
        else:
            name = self.cur.expect_ident("a term")
            if self.cur.eat_punct("("):
                args = []
                if not self.cur.at_punct(")"):
                    while True:
                        args.append(self.raw_term())
                        if not self.cur.eat_punct(","):
                            break
                self.cur.expect_punct(")")
                base = _RawCall(name.text, tuple(args), name.span)
            else:
                base = _RawName(name.text, name.span)
        while True:
            if self.cur.at_punct("+") or self.cur.at_punct("-"):
                op = self.cur.next()
                k = self.cur.peek()
                if k.kind != "INT":
                    raise ParseError("Syntax", k.span, "expected an integer offset")
                self.cur.next()
                delta = int(k.text) if op.text == "+" else -int(k.text)
                base = _RawOffset(base, delta, op.span)
            else:
                return base

    # -- name resolution -----------------------------------------------------

    def lookup_var(self, name: str) -> Optional[str]:
        for v, s in reversed(self.scope):
            if v == name:
                return s
        return None

    def resolve(self, raw, expected: Optional[str]) -> Term:
        """Elaborate a raw term against an expected sort (exact match)."""
        th = self.theory
        if isinstance(raw, _RawOffset):
            base = self.resolve(raw.base, expected)
            base_sort = self.term_sort(base)
            if not th.is_int_sort(base_sort):
                raise ParseError("Sort", raw.span, f"offset applied to non-integer sort {base_sort!r}")
            return Offset(base, raw.delta)
        if isinstance(raw, _RawCall):
            if raw.name in th.predicates:
                raise ParseError("Sort", raw.span, f"predicate {raw.name!r} used as a term")
            sig = th.functions.get(raw.name)
            if sig is None:
                raise ParseError("UnknownSymbol", raw.span, f"unknown function {raw.name!r}")
            arg_sorts, result = sig
            if len(arg_sorts) != len(raw.args):
                raise ParseError(
                    "Arity", raw.span,
                    f"function {raw.name!r} expects {len(arg_sorts)} argument(s), got {len(raw.args)}")
            args = tuple(self.resolve(a, s) for a, s in zip(raw.args, arg_sorts))
            if expected is not None and result != expected:
                raise ParseError("Sort", raw.span, f"term of sort {result!r} where {expected!r} expected")
            return Apply(raw.name, args)
        # bare name
        name = raw.text
        var_sort = self.lookup_var(name)
        if var_sort is not None:
            if expected is not None and var_sort != expected:
                raise ParseError("Sort", raw.span, f"variable {name!r} has sort {var_sort!r}, expected {expected!r}")
            return Var(name, var_sort)
        if expected is not None:
            if name in th.sorts[expected]:
                return Elem(name, expected)
            sig = th.functions.get(name)
            if sig is not None and not sig[0]:
                if sig[1] != expected:
                    raise ParseError("Sort", raw.span, f"constant {name!r} has sort {sig[1]!r}, expected {expected!r}")
                return Apply(name, ())
            raise ParseError("UnknownSymbol", raw.span, f"{name!r} is not an element of sort {expected!r}")
        # no expected sort: the name must resolve uniquely
        sig = th.functions.get(name)
        if sig is not None and not sig[0]:
            return Apply(name, ())
        owners = th.element_sorts.get(name, ())
        if len(owners) == 1:
            return Elem(name, owners[0])
        if len(owners) > 1:
            raise ParseError("Sort", raw.span, f"{name!r} belongs to several sorts ({', '.join(owners)}); disambiguate via context")
        raise ParseError("UnknownSymbol", raw.span, f"unknown name {name!r}")

    def resolve_int(self, raw, expected: Optional[str]) -> Term:
        """Elaborate an operand that must carry an integer sort.

        A bare decimal literal may come from any integer-range sort; the
        expected sort wins when the value lies in its range.
        """
        th = self.theory
        if isinstance(raw, _RawOffset):
            base = self.resolve_int(raw.base, expected)
            return Offset(base, raw.delta)
        if isinstance(raw, _RawName) and self.lookup_var(raw.text) is None:
            owners = [s for s in th.element_sorts.get(raw.text, ()) if th.is_int_sort(s)]
            if expected is not None and expected in owners:
                return Elem(raw.text, expected)
            if len(owners) == 1:
                return Elem(raw.text, owners[0])
            if len(owners) > 1:
                raise ParseError("Sort", raw.span, f"literal {raw.text!r} belongs to several integer sorts; disambiguate via context")
        term = self.resolve(raw, None)
        sort = self.term_sort(term)
        if not th.is_int_sort(sort):
            raise ParseError("Sort", _raw_span(raw), f"term of non-integer sort {sort!r} in an integer context")
        return term

    def term_sort(self, term: Term) -> str:
        if isinstance(term, (Var, Elem)):
            return term.sort
        if isinstance(term, Apply):
            return self.theory.functions[term.func][1]
        return self.term_sort(term.base)

    def is_deferred(self, raw) -> bool:
        """True when a raw node cannot determine a sort by itself."""
        if isinstance(raw, _RawOffset):
            return self.is_deferred(raw.base)
        if isinstance(raw, _RawName):
            if self.lookup_var(raw.text) is not None:
                return False
            sig = self.theory.functions.get(raw.text)
            return not (sig is not None and not sig[0])
        return False

    def resolve_equal(self, left, right) -> tuple[Term, Term]:
        th = self.theory
        ldeferred, rdeferred = self.is_deferred(left), self.is_deferred(right)
        if not ldeferred:
            l = self.resolve(left, None)
            ls = self.term_sort(l)
            if th.is_int_sort(ls):
                r = self.resolve_int(right, ls)
            else:
                r = self.resolve(right, ls)
            return l, r
        if not rdeferred:
            r = self.resolve(right, None)
            rs = self.term_sort(r)
            if th.is_int_sort(rs):
                l = self.resolve_int(left, rs)
            else:
                l = self.resolve(left, rs)
            return l, r
        l = self.resolve(left, None)  # unique-ownership resolution or an error
        r = self.resolve(right, self.term_sort(l))
        return l, r

    def resolve_compare(self, left, right, span: SourceSpan) -> tuple[Term, Term]:
        ldeferred = self.is_deferred(left)
        if not ldeferred:
            l = self.resolve_int(left, None)
            r = self.resolve_int(right, self.term_sort(l))
            return l, r
        if not self.is_deferred(right):
            r = self.resolve_int(right, None)
            l = self.resolve_int(left, self.term_sort(r))
            return l, r
        l = self.resolve_int(left, None)
        r = self.resolve_int(right, self.term_sort(l))
        return l, r


def _raw_span(raw) -> SourceSpan:
    return raw.span


def parse_formula(theory: Theory, source: str) -> Formula:
    """Parse and sort-check a closed formula against a theory."""
    cur = _Cursor(_lex(source))
    parser = _FormulaParser(theory, cur)
    f = parser.formula()
    t = cur.peek()
    if t.kind != "EOF":
        raise ParseError("Syntax", t.span, f"trailing input {t.text!r} after formula")
    return f


# ---------------------------------------------------------------------------
# Documents


@dataclass
class FolDocument:
    theory: Optional[Theory]
    formulas: dict[str, Formula]


def parse_document(source: str) -> FolDocument:
    """Parse a .fol document: one optional theory block plus named formula blocks."""
    cur = _Cursor(_lex(source))
    theory: Optional[Theory] = None
    formulas: dict[str, Formula] = {}
    while cur.peek().kind != "EOF":
        t = cur.peek()
        if t.kind != "IDENT" or t.text not in ("theory", "formula"):
            raise ParseError("Syntax", t.span, "expected a `theory { ... }` or `formula name { ... }` block")
        cur.next()
        if t.text == "theory":
            if theory is not None:
                raise ParseError("Syntax", t.span, "duplicate theory block")
            cur.expect_punct("{")
            theory = _parse_theory_decls(cur, stop="}")
            cur.expect_punct("}")
        else:
            name = cur.expect_ident("a formula name")
            if theory is None:
                raise ParseError("Syntax", name.span, "formula block before the theory block")
            if name.text in formulas:
                raise ParseError("Syntax", name.span, f"duplicate formula block {name.text!r}")
            cur.expect_punct("{")
            parser = _FormulaParser(theory, cur)
            f = parser.formula()
            cur.expect_punct("}")
            formulas[name.text] = f
    return FolDocument(theory, formulas)
