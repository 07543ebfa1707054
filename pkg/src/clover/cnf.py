"""Propositional CNF container and DIMACS round-trip."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence


class FormatError(Exception):
    """Malformed DIMACS input."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass
class Cnf:
    """Clause list over variables 1..num_vars; a literal is a signed variable id."""

    num_vars: int
    clauses: list[list[int]] = field(default_factory=list)

    def add(self, clause: Iterable[int]) -> None:
        """Append a clause, deduplicating literals and dropping tautologies."""
        seen: dict[int, None] = {}
        for lit in clause:
            v = abs(lit)
            if lit == 0 or v > self.num_vars:
                raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")
            if -lit in seen:
                return  # tautology
            seen[lit] = None
        if not seen:
            raise ValueError("empty clause")
        self.clauses.append(list(seen))

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars


def write_dimacs(cnf: Cnf, comments: Sequence[str] = ()) -> str:
    """Render DIMACS text; comment lines (without the `c `) go before the header."""
    out = [f"c {c}" for c in comments]
    out.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    for clause in cnf.clauses:
        out.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(out) + "\n"


def read_dimacs(source: str) -> Cnf:
    """Parse DIMACS text, checking the header against the actual clause count."""
    num_vars: Optional[int] = None
    num_clauses = 0
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise FormatError(lineno, "duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormatError(lineno, f"bad header {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormatError(lineno, f"bad header {line!r}") from None
            continue
        if num_vars is None:
            raise FormatError(lineno, "clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise FormatError(lineno, f"bad literal {tok!r}") from None
            if lit == 0:
                if not current:
                    raise FormatError(lineno, "empty clause")
                clauses.append(current)
                current = []
            else:
                if abs(lit) > num_vars:
                    raise FormatError(lineno, f"literal {lit} exceeds declared variable count")
                current.append(lit)
    last = len(source.splitlines())
    if current:
        raise FormatError(last, "clause not terminated by 0")
    if num_vars is None:
        raise FormatError(last, "missing header")
    if len(clauses) != num_clauses:
        raise FormatError(last, f"header declares {num_clauses} clauses, found {len(clauses)}")
    cnf = Cnf(num_vars)
    for clause in clauses:
        cnf.add(clause)
    return cnf
