"""Iterative mapping loop: raise II until a formula is satisfiable and its
model register-allocates, or a cap / timeout is hit."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .encoder import TriviallyUnsat, build_formula, decode_model
from .mapping import Mapping
from .model import CgraArch, Dfg
from .regalloc import ColoringFailure, allocate
from .schedule import compute_mii, kms_for_ii
from .solver import DEFAULT_TIME_BUDGET, Budget, BudgetExceeded, Sat, solve, solve_external
from .validator import validate_mapping

log = logging.getLogger(__name__)

DEFAULT_II_MAX = 50

MAPPED = "mapped"
NO_MAPPING = "no_mapping_up_to_cap"
TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class MapperOptions:
    ii_start: int | None = None
    ii_max: int = DEFAULT_II_MAX
    time_budget_per_ii: float = DEFAULT_TIME_BUDGET
    total_budget: float | None = None
    seed: int = 0
    # "internal", or a shell command for an external DIMACS solver
    solver: str = "internal"

    def __post_init__(self) -> None:
        if self.ii_max < 1 or (self.ii_start is not None and not 1 <= self.ii_start <= self.ii_max):
            raise ValueError(f"need 1 <= ii_start <= ii_max, got {self.ii_start}..{self.ii_max}")
        if self.time_budget_per_ii <= 0 or (self.total_budget is not None and self.total_budget <= 0):
            raise ValueError("time budgets must be positive")


@dataclass(frozen=True)
class Attempt:
    ii: int
    # "sat", "unsat", "trivially_unsat", "coloring_failed" or "timeout"
    verdict: str
    solve_time: float
    num_vars: int
    num_clauses: int
    detail: str = ""


@dataclass
class MappingReport:
    status: str
    ii: int | None = None
    mapping: Mapping | None = None
    attempts: list[Attempt] = field(default_factory=list)


def map_loop(dfg: Dfg, arch: CgraArch, opts: MapperOptions = MapperOptions()) -> MappingReport:
    start = compute_mii(dfg, arch) if opts.ii_start is None else opts.ii_start
    report = MappingReport(NO_MAPPING)
    began = time.monotonic()
    for ii in range(start, opts.ii_max + 1):
        budget = opts.time_budget_per_ii
        if opts.total_budget is not None:
            budget = min(budget, opts.total_budget - (time.monotonic() - began))
            if budget <= 0:
                report.status = TIMED_OUT
                return report
        kms = kms_for_ii(dfg, ii)
        try:
            cnf, table = build_formula(dfg, kms, arch)
        except TriviallyUnsat as exc:
            report.attempts.append(Attempt(ii, "trivially_unsat", 0.0, 0, 0, exc.reason))
            log.info("II=%d trivially unsat: %s", ii, exc.reason)
            continue

        t0 = time.monotonic()
        if opts.solver == "internal":
            result = solve(cnf, Budget(time=budget), seed=opts.seed)
        else:
            result = solve_external(cnf, opts.solver, Budget(time=budget))
        elapsed = time.monotonic() - t0
        size = (cnf.num_vars, len(cnf.clauses))
        log.info("II=%d: %s in %.3fs (%d vars, %d clauses)", ii, result.verdict, elapsed, *size)

        if isinstance(result, BudgetExceeded):
            report.attempts.append(Attempt(ii, "timeout", elapsed, *size))
            report.status = TIMED_OUT
            return report
        if not isinstance(result, Sat):
            report.attempts.append(Attempt(ii, "unsat", elapsed, *size))
            continue

        mapping = decode_model(result.model, table, dfg)
        regs = allocate(mapping, arch.regs_per_pe)
        if isinstance(regs, ColoringFailure):
            report.attempts.append(Attempt(ii, "coloring_failed", elapsed, *size, str(regs)))
            continue
        mapping.registers = regs
        problems = validate_mapping(mapping, dfg, arch, ii)
        if problems:
            raise AssertionError(
                f"II={ii}: decoded mapping is illegal: " + "; ".join(map(str, problems))
            )
        report.attempts.append(Attempt(ii, "sat", elapsed, *size))
        report.status, report.ii, report.mapping = MAPPED, ii, mapping
        return report
    return report
