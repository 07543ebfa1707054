"""Conflict-driven clause-learning SAT solver.

Two-watched-literal propagation, first-UIP learning, activity-based
branching with multiplicative decay, phase saving, Luby restarts, and
activity-ranked deletion of learned clauses.  Every Sat answer is checked
against the original clauses before it is returned.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .cnf import Cnf

DEFAULT_BUDGET = 1_000_000
_ACTIVITY_DECAY = 0.95
_LUBY_BASE = 100
_CAP_GROWTH = 1.1


class SolveStatus(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass
class SolverStats:
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    restarts: int = 0
    learned: int = 0
    wall_millis: float = 0.0

    def to_doc(self, with_time: bool = True) -> dict:
        doc = {
            "conflicts": self.conflicts,
            "decisions": self.decisions,
            "propagations": self.propagations,
            "restarts": self.restarts,
            "learned": self.learned,
        }
        if with_time:
            doc["wallMillis"] = round(self.wall_millis, 3)
        return doc


@dataclass
class SolveResult:
    status: SolveStatus
    assignment: Optional[list[bool]] = None  # 1-indexed; slot 0 unused
    stats: SolverStats = field(default_factory=SolverStats)

    @property
    def is_sat(self) -> bool:
        return self.status is SolveStatus.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status is SolveStatus.UNSAT

    @property
    def out_of_budget(self) -> bool:
        return self.status is SolveStatus.BUDGET_EXCEEDED


def _luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) // 2
        seq -= 1
        i %= size
    return 1 << seq


class _Clause:
    __slots__ = ("lits", "learned", "activity")

    def __init__(self, lits: list[int], learned: bool):
        self.lits = lits
        self.learned = learned
        self.activity = 0.0


class Solver:
    """Single-use CDCL instance; create one per solve call."""

    def __init__(self, cnf: Cnf, seed: int = 0):
        self.nvars = cnf.num_vars
        self.assign: list[Optional[bool]] = [None] * (self.nvars + 1)
        self.level: list[int] = [0] * (self.nvars + 1)
        self.reason: list[Optional[_Clause]] = [None] * (self.nvars + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []  # trail indices at decision points
        self.qhead = 0
        self.watches: dict[int, list[_Clause]] = {}
        self.clauses: list[_Clause] = []
        self.learnts: list[_Clause] = []
        self.activity = [0.0] * (self.nvars + 1)
        self.var_inc = 1.0
        self.cla_inc = 1.0
        rng = random.Random(seed)
        self.saved_phase = [rng.random() < 0.5 for _ in range(self.nvars + 1)]
        self.stats = SolverStats()
        self.ok = True
        self.root_units: list[int] = []
        for lits in cnf.clauses:
            self._add_original(list(lits))

    # -- clause management ---------------------------------------------------

    def _watch(self, lit: int, clause: _Clause) -> None:
        self.watches.setdefault(lit, []).append(clause)

    def _add_original(self, lits: list[int]) -> None:
        if not self.ok:
            return
        if len(lits) == 1:
            self.root_units.append(lits[0])
            return
        clause = _Clause(lits, learned=False)
        self.clauses.append(clause)
        self._watch(lits[0], clause)
        self._watch(lits[1], clause)

    def _add_learnt(self, lits: list[int]) -> _Clause:
        clause = _Clause(lits, learned=True)
        if len(lits) >= 2:
            self.learnts.append(clause)
            self._watch(lits[0], clause)
            self._watch(lits[1], clause)
        self.stats.learned += 1
        return clause

    # -- assignment ----------------------------------------------------------

    def _value(self, lit: int) -> Optional[bool]:
        v = self.assign[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def _enqueue(self, lit: int, reason: Optional[_Clause]) -> bool:
        val = self._value(lit)
        if val is not None:
            return val
        var = abs(lit)
        self.assign[var] = lit > 0
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.trail.append(lit)
        return True

    def _propagate(self) -> Optional[_Clause]:
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            self.stats.propagations += 1
            falsified = -lit
            watchers = self.watches.get(falsified, [])
            i = 0
            while i < len(watchers):
                clause = watchers[i]
                lits = clause.lits
                # normalize: watched literals are lits[0] and lits[1]
                if lits[0] == falsified:
                    lits[0], lits[1] = lits[1], lits[0]
                other = lits[0]
                if self._value(other) is True:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(lits)):
                    if self._value(lits[k]) is not False:
                        lits[1], lits[k] = lits[k], lits[1]
                        watchers[i] = watchers[-1]
                        watchers.pop()
                        self._watch(lits[1], clause)
                        moved = True
                        break
                if moved:
                    continue
                if self._value(other) is False:
                    return clause  # conflict
                self._enqueue(other, clause)
                i += 1
        return None

    # -- activities ----------------------------------------------------------

    def _bump_var(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for v in range(1, self.nvars + 1):
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100

    def _bump_clause(self, clause: _Clause) -> None:
        clause.activity += self.cla_inc
        if clause.activity > 1e20:
            for c in self.learnts:
                c.activity *= 1e-20
            self.cla_inc *= 1e-20

    def _decay(self) -> None:
        self.var_inc /= _ACTIVITY_DECAY
        self.cla_inc /= _ACTIVITY_DECAY

    # -- conflict analysis -----------------------------------------------------

    def _analyze(self, conflict: _Clause) -> tuple[list[int], int]:
        """First-UIP learned clause and the level to backtrack to."""
        learned: list[int] = [0]  # slot 0 reserved for the asserting literal
        seen = [False] * (self.nvars + 1)
        counter = 0
        lit = None
        clause: Optional[_Clause] = conflict
        index = len(self.trail)
        current = len(self.trail_lim)
        while True:
            assert clause is not None
            if clause.learned:
                self._bump_clause(clause)
            for q in clause.lits:
                if q == lit:
                    continue
                var = abs(q)
                if not seen[var] and self.level[var] > 0:
                    seen[var] = True
                    self._bump_var(var)
                    if self.level[var] >= current:
                        counter += 1
                    else:
                        learned.append(q)
            while True:
                index -= 1
                if seen[abs(self.trail[index])]:
                    break
            p = self.trail[index]
            lit = p
            clause = self.reason[abs(p)]
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
        learned[0] = -lit
        if len(learned) == 1:
            back_level = 0
        else:
            # watch the literal from the second-highest level
            max_i = 1
            for i in range(2, len(learned)):
                if self.level[abs(learned[i])] > self.level[abs(learned[max_i])]:
                    max_i = i
            learned[1], learned[max_i] = learned[max_i], learned[1]
            back_level = self.level[abs(learned[1])]
        return learned, back_level

    def _backtrack(self, target_level: int) -> None:
        if len(self.trail_lim) <= target_level:
            return
        cut = self.trail_lim[target_level]
        for lit in reversed(self.trail[cut:]):
            var = abs(lit)
            self.saved_phase[var] = self.assign[var]
            self.assign[var] = None
            self.reason[var] = None
        del self.trail[cut:]
        del self.trail_lim[target_level:]
        self.qhead = min(self.qhead, len(self.trail))

    # -- learned clause deletion ------------------------------------------------

    def _reduce_db(self) -> None:
        locked = {id(self.reason[abs(l)]) for l in self.trail if self.reason[abs(l)] is not None}
        ordered = sorted(self.learnts, key=lambda c: c.activity)
        drop = set()
        for clause in ordered[: len(ordered) // 2]:
            if id(clause) not in locked and len(clause.lits) > 2:
                drop.add(id(clause))
        if not drop:
            return
        self.learnts = [c for c in self.learnts if id(c) not in drop]
        for lit, watchers in self.watches.items():
            self.watches[lit] = [c for c in watchers if id(c) not in drop]

    # -- branching ----------------------------------------------------------------

    def _pick_branch(self, pending_assumptions: Sequence[int]) -> Optional[int]:
        for lit in pending_assumptions:
            if self._value(lit) is None:
                return lit
        best = 0
        best_act = -1.0
        for var in range(1, self.nvars + 1):
            if self.assign[var] is None and self.activity[var] > best_act:
                best = var
                best_act = self.activity[var]
        if best == 0:
            return None
        return best if self.saved_phase[best] else -best

    # -- main loop -------------------------------------------------------------------

    def solve(self, assumptions: Sequence[int] = (), budget: int = DEFAULT_BUDGET) -> SolveResult:
        start = time.perf_counter()

        def finish(status: SolveStatus, assignment=None) -> SolveResult:
            self.stats.wall_millis = (time.perf_counter() - start) * 1000.0
            return SolveResult(status, assignment, self.stats)

        for a in assumptions:
            if a == 0 or abs(a) > self.nvars:
                raise ValueError(f"assumption literal {a} out of range")
        for u in self.root_units:
            if not self._enqueue(u, None):
                return finish(SolveStatus.UNSAT)
        if self._propagate() is not None:
            return finish(SolveStatus.UNSAT)

        restart_count = 0
        conflicts_until_restart = _LUBY_BASE * _luby(0)
        conflicts_in_run = 0
        max_learnts = max(1000.0, (len(self.clauses) + len(self.root_units)) * 2.0)

        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.stats.conflicts += 1
                conflicts_in_run += 1
                if len(self.trail_lim) == 0:
                    return finish(SolveStatus.UNSAT)
                if self.stats.conflicts >= budget:
                    return finish(SolveStatus.BUDGET_EXCEEDED)
                learned, back_level = self._analyze(conflict)
                self._backtrack(back_level)
                clause = self._add_learnt(learned)
                self._enqueue(learned[0], clause if len(learned) > 1 else None)
                self._decay()
                continue
            # check failed assumptions before deciding further
            failed = next((a for a in assumptions if self._value(a) is False), None)
            if failed is not None:
                return finish(SolveStatus.UNSAT)
            if len(self.learnts) > max_learnts:
                self._reduce_db()
                max_learnts *= _CAP_GROWTH
            if conflicts_in_run >= conflicts_until_restart:
                restart_count += 1
                self.stats.restarts += 1
                conflicts_in_run = 0
                conflicts_until_restart = _LUBY_BASE * _luby(restart_count)
                self._backtrack(0)
                continue
            lit = self._pick_branch(assumptions)
            if lit is None:
                assignment = [False] + [bool(self.assign[v]) for v in range(1, self.nvars + 1)]
                self._verify(assignment)
                return finish(SolveStatus.SAT, assignment)
            self.stats.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)

    def _verify(self, assignment: list[bool]) -> None:
        def sat(lit: int) -> bool:
            return assignment[abs(lit)] == (lit > 0)

        for u in self.root_units:
            assert sat(u), "model check failed on a unit clause"
        for clause in self.clauses:
            assert any(sat(l) for l in clause.lits), "model check failed on an input clause"


def solve(
    cnf: Cnf,
    assumptions: Sequence[int] = (),
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> SolveResult:
    """Decide a CNF under optional assumption literals within a conflict budget."""
    return Solver(cnf, seed=seed).solve(assumptions, budget)
