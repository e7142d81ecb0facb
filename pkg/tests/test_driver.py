import pytest

import cgramap.driver as driver
from cgramap.driver import (
    DEFAULT_II_MAX,
    MAPPED,
    NO_MAPPING,
    TIMED_OUT,
    MapperOptions,
    map_loop,
)
from cgramap.model import CgraArch, Dfg
from cgramap.regalloc import allocate
from cgramap.solver import DEFAULT_TIME_BUDGET
from cgramap.validator import validate_mapping

ONE = CgraArch(1, 1)


def _strip_times(report):
    return [(a.ii, a.verdict, a.num_vars, a.num_clauses, a.detail) for a in report.attempts]


def test_defaults():
    opts = MapperOptions()
    assert opts.time_budget_per_ii == DEFAULT_TIME_BUDGET == 4000
    assert opts.ii_max == DEFAULT_II_MAX == 50
    assert opts.ii_start is None


@pytest.mark.parametrize(
    "kwargs",
    [dict(ii_max=0), dict(ii_start=0), dict(ii_start=9, ii_max=8), dict(time_budget_per_ii=0)],
)
def test_bad_options(kwargs):
    with pytest.raises(ValueError):
        MapperOptions(**kwargs)


def test_running_example_maps_at_three(running, mesh2):
    report = map_loop(running, mesh2)
    assert report.status == MAPPED and report.ii == 3
    assert [a.ii for a in report.attempts] == [3]
    assert validate_mapping(report.mapping, running, mesh2) == []
    assert report.mapping.registers == allocate(report.mapping, 4)


def test_two_independent_nodes_from_one():
    dfg = Dfg.build([1, 2], [])
    report = map_loop(dfg, ONE, MapperOptions(ii_start=1))
    assert [(a.ii, a.verdict) for a in report.attempts] == [(1, "trivially_unsat"), (2, "sat")]
    assert report.status == MAPPED and report.ii == 2


def test_starts_at_mii_by_default():
    dfg = Dfg.build([1, 2, 3], [])
    report = map_loop(dfg, ONE)
    assert report.attempts[0].ii == 3


def test_log_is_monotonic_and_deterministic(running):
    arch = CgraArch(1, 2)
    a = map_loop(running, arch, MapperOptions(ii_start=1, seed=4))
    b = map_loop(running, arch, MapperOptions(ii_start=1, seed=4))
    iis = [x.ii for x in a.attempts]
    assert iis == list(range(1, a.ii + 1))
    assert _strip_times(a) == _strip_times(b)
    assert a.mapping == b.mapping


def test_coloring_failure_retries_next_ii(running, mesh2, monkeypatch):
    calls = []

    def flaky(mapping, k):
        calls.append(mapping.ii)
        if len(calls) == 1:
            return driver.ColoringFailure(None, (), k)  # type: ignore[arg-type]
        return allocate(mapping, k)

    monkeypatch.setattr(driver, "allocate", flaky)
    monkeypatch.setattr(driver.ColoringFailure, "__str__", lambda self: "forced")
    report = map_loop(running, mesh2)
    assert [(a.ii, a.verdict) for a in report.attempts] == [(3, "coloring_failed"), (4, "sat")]
    assert report.status == MAPPED and report.ii == 4


def test_infeasible_instance_exhausts_the_cap():
    # two recurrences held in registers of a single-register PE never fit
    dfg = Dfg.build([1, 2], [(1, 1, 1), (2, 2, 1)])
    arch = CgraArch(1, 1, regs_per_pe=1)
    report = map_loop(dfg, arch, MapperOptions(ii_start=1, time_budget_per_ii=5))
    assert report.status == NO_MAPPING
    assert report.mapping is None and report.ii is None
    assert [a.ii for a in report.attempts] == list(range(1, 51))
    assert {a.verdict for a in report.attempts[1:]} == {"coloring_failed"}


def test_timeout_stops_the_loop(running, mesh2, monkeypatch):
    from cgramap.solver import BudgetExceeded

    monkeypatch.setattr(driver, "solve", lambda cnf, budget, seed=0: BudgetExceeded(budget.time, 0))
    report = map_loop(running, mesh2, MapperOptions(time_budget_per_ii=0.5))
    assert report.status == TIMED_OUT
    assert [(a.ii, a.verdict) for a in report.attempts] == [(3, "timeout")]


def test_total_budget_exhausted_before_start(running, mesh2, monkeypatch):
    ticks = iter([0.0, 100.0, 100.0, 100.0])
    monkeypatch.setattr(driver.time, "monotonic", lambda: next(ticks))
    report = map_loop(running, mesh2, MapperOptions(total_budget=10))
    assert report.status == TIMED_OUT and report.attempts == []
