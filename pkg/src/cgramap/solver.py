"""Conflict-driven clause-learning SAT solver.

Two-watched-literal propagation, first-UIP learning with local clause
minimisation, VSIDS-style branching with phase saving, Luby restarts and
LBD-based learnt-clause reduction. Literals are DIMACS signed integers
throughout.

An external DIMACS solver can be used instead through :func:`solve_external`.
"""

from __future__ import annotations

import heapq
import os
import random
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from typing import Union

from .cnf import CnfFormula, check_model, write_dimacs

DEFAULT_TIME_BUDGET = 4000.0


@dataclass(frozen=True)
class Budget:
    time: float = DEFAULT_TIME_BUDGET
    conflicts: int | None = None


@dataclass(frozen=True)
class Sat:
    model: tuple[int, ...]
    conflicts: int = 0

    verdict = "sat"


@dataclass(frozen=True)
class Unsat:
    conflicts: int = 0

    verdict = "unsat"


@dataclass(frozen=True)
class BudgetExceeded:
    elapsed: float
    conflicts: int

    verdict = "timeout"


SolveResult = Union[Sat, Unsat, BudgetExceeded]


def _luby(i: int) -> int:
    """i-th element (1-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


class Solver:
    VAR_DECAY = 0.95
    RESTART_UNIT = 100

    def __init__(self, cnf: CnfFormula, seed: int = 0) -> None:
        n = cnf.num_vars
        self.num_vars = n
        self.assigns = [0] * (n + 1)  # 1 true, -1 false, 0 unassigned
        self.level = [0] * (n + 1)
        self.reason: list[list[int] | None] = [None] * (n + 1)
        self.phase = [False] * (n + 1)
        self.seen = [False] * (n + 1)
        rng = random.Random(seed)
        self.activity = [rng.random() * 1e-5 for _ in range(n + 1)]
        self.var_inc = 1.0
        self.heap = [(-self.activity[v], v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        # watches indexed by literal + n
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * n + 1)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.learnts: list[list[int]] = []
        self.lbd: dict[int, int] = {}
        self.conflicts = 0
        self.ok = True

        for raw in cnf.clauses:
            lits = sorted(set(raw), key=abs)
            if any(-l in lits for l in lits):
                continue  # tautology
            if not lits:
                self.ok = False
                return
            if len(lits) == 1:
                if not self._enqueue(lits[0], None):
                    self.ok = False
                    return
                continue
            self._attach(lits)
        if self._propagate() is not None:
            self.ok = False

    # -- basic operations ---------------------------------------------------

    def _attach(self, clause: list[int]) -> None:
        n = self.num_vars
        self.watches[clause[0] + n].append(clause)
        self.watches[clause[1] + n].append(clause)

    def _enqueue(self, lit: int, reason: list[int] | None) -> bool:
        v = abs(lit)
        cur = self.assigns[v]
        if cur:
            return (cur > 0) == (lit > 0)
        self.assigns[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)
        return True

    def _propagate(self) -> list[int] | None:
        n = self.num_vars
        assigns = self.assigns
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            ws = watches[false_lit + n]
            kept: list[list[int]] = []
            i = 0
            size = len(ws)
            while i < size:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                a = assigns[first if first > 0 else -first]
                fv = a if first > 0 else -a
                if fv == 1:
                    kept.append(c)
                    continue
                for k in range(2, len(c)):
                    lit = c[k]
                    a = assigns[lit if lit > 0 else -lit]
                    if (a if lit > 0 else -a) != -1:
                        c[1], c[k] = lit, false_lit
                        watches[lit + n].append(c)
                        break
                else:
                    kept.append(c)
                    if fv == -1:
                        kept.extend(ws[i:])
                        watches[false_lit + n] = kept
                        return c
                    self._enqueue(first, c)
            watches[false_lit + n] = kept
        return None

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[u], u) for u in range(1, self.num_vars + 1) if not self.assigns[u]]
            heapq.heapify(self.heap)
        elif not self.assigns[v]:
            heapq.heappush(self.heap, (-act[v], v))

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        act = self.activity
        for lit in reversed(self.trail[start:]):
            v = abs(lit)
            self.phase[v] = lit > 0
            self.assigns[v] = 0
            self.reason[v] = None
            heapq.heappush(self.heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        seen = self.seen
        level = self.level
        cur = len(self.trail_lim)
        learnt = [0]
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        clause: list[int] | None = confl
        while True:
            assert clause is not None
            for q in clause:
                if q == p:
                    continue
                v = abs(q)
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            clause = self.reason[abs(p)]
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
        learnt[0] = -p

        # drop literals implied by the rest of the clause
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = self.reason[abs(q)]
            if r is None or not all(
                seen[abs(x)] or level[abs(x)] == 0 for x in r if abs(x) != abs(q)
            ):
                kept.append(q)
        for q in learnt[1:]:
            seen[abs(q)] = False

        if len(kept) == 1:
            return kept, 0
        best = max(range(1, len(kept)), key=lambda i: level[abs(kept[i])])
        kept[1], kept[best] = kept[best], kept[1]
        return kept, level[abs(kept[1])]

    def _pick_branch(self) -> int:
        heap = self.heap
        while heap:
            _, v = heapq.heappop(heap)
            if not self.assigns[v]:
                return v if self.phase[v] else -v
        return 0

    def _reduce_db(self) -> None:
        locked = {id(self.reason[abs(l)]) for l in self.trail if self.reason[abs(l)] is not None}
        ranked = sorted(self.learnts, key=lambda c: (self.lbd[id(c)], len(c)))
        keep_n = len(ranked) // 2
        keep, dead = [], set()
        for i, c in enumerate(ranked):
            if i < keep_n or self.lbd[id(c)] <= 2 or id(c) in locked:
                keep.append(c)
            else:
                dead.add(id(c))
                del self.lbd[id(c)]
        self.learnts = keep
        self.watches = [[c for c in w if id(c) not in dead] for w in self.watches]

    # -- main loop ----------------------------------------------------------

    def solve(self, budget: Budget = Budget()) -> SolveResult:
        started = time.monotonic()
        if not self.ok:
            return Unsat(0)
        max_learnts = max(2000, sum(len(w) for w in self.watches) // 4)
        restart_no = 1
        next_restart = self.RESTART_UNIT * _luby(restart_no)
        since_restart = 0
        decisions = 0

        def out_of_budget() -> bool:
            if budget.conflicts is not None and self.conflicts >= budget.conflicts:
                return True
            return time.monotonic() - started > budget.time

        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    return Unsat(self.conflicts)
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self._attach(learnt)
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = len({self.level[abs(l)] for l in learnt})
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.VAR_DECAY
                if out_of_budget():
                    return BudgetExceeded(time.monotonic() - started, self.conflicts)
                continue

            if since_restart >= next_restart:
                since_restart = 0
                restart_no += 1
                next_restart = self.RESTART_UNIT * _luby(restart_no)
                self._cancel_until(0)
            if len(self.learnts) >= max_learnts:
                self._reduce_db()
                max_learnts = int(max_learnts * 1.1)

            lit = self._pick_branch()
            if lit == 0:
                model = tuple(v if self.assigns[v] > 0 else -v for v in range(1, self.num_vars + 1))
                return Sat(model, self.conflicts)
            decisions += 1
            if decisions % 512 == 0 and out_of_budget():
                return BudgetExceeded(time.monotonic() - started, self.conflicts)
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def solve(cnf: CnfFormula, budget: Budget = Budget(), seed: int = 0) -> SolveResult:
    result = Solver(cnf, seed).solve(budget)
    if isinstance(result, Sat) and not check_model(cnf, result.model):
        raise AssertionError("solver produced a model that violates the formula")
    return result


def refuted_by_propagation(cnf: CnfFormula) -> bool:
    """True when unit propagation alone derives a conflict."""
    return not Solver(cnf).ok


def solve_external(cnf: CnfFormula, command: str, budget: Budget = Budget()) -> SolveResult:
    """Run a DIMACS solver: ``command <file.cnf>``, reading ``s``/``v`` output lines."""
    fd, path = tempfile.mkstemp(suffix=".cnf")
    started = time.monotonic()
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(write_dimacs(cnf))
        try:
            proc = subprocess.run(
                shlex.split(command) + [path],
                capture_output=True,
                text=True,
                timeout=budget.time,
            )
        except subprocess.TimeoutExpired:
            return BudgetExceeded(time.monotonic() - started, 0)
    finally:
        os.unlink(path)

    status = None
    true_lits: set[int] = set()
    for line in proc.stdout.splitlines():
        if line.startswith("s "):
            status = line[2:].strip()
        elif line.startswith("v "):
            true_lits.update(int(t) for t in line[2:].split() if t != "0")
    if status == "UNSATISFIABLE":
        return Unsat()
    if status == "SATISFIABLE":
        model = tuple(v if v in true_lits else -v for v in range(1, cnf.num_vars + 1))
        if not check_model(cnf, model):
            raise RuntimeError(f"external solver {command!r} returned an invalid model")
        return Sat(model)
    if status == "UNKNOWN":
        return BudgetExceeded(time.monotonic() - started, 0)
    raise RuntimeError(
        f"external solver {command!r} gave no verdict (exit {proc.returncode}): {proc.stderr.strip()[:200]}"
    )
