"""Command-line interface.

Exit codes: 0 success, 1 validation found violations, 2 no mapping up to the
II cap (or trivially unsatisfiable at the requested II), 3 timed out,
64 usage error, 65 bad input data.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import NoReturn, Sequence

from . import __version__
from .cnf import write_dimacs
from .driver import DEFAULT_II_MAX, MAPPED, NO_MAPPING, MapperOptions, map_loop
from .encoder import TriviallyUnsat, build_formula
from .model import CgraArch, Dfg, InputError, parse_arch, parse_dfg
from .render import kernel_table, kms_table, schedule_table
from .report import read_report, report_to_json
from .schedule import kms_for_ii, mobility_schedule
from .solver import DEFAULT_TIME_BUDGET
from .validator import validate_mapping

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_NO_MAPPING = 2
EXIT_TIMEOUT = 3
EXIT_USAGE = 64
EXIT_DATAERR = 65

SOLVER_ENV = "CGRAMAP_SOLVER"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _load_dfg(path: str) -> Dfg:
    try:
        return parse_dfg(_read(path))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_arch(path: str) -> CgraArch:
    try:
        return parse_arch(_read(path))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _solver_choice(value: str | None) -> str:
    value = value or os.environ.get(SOLVER_ENV) or "internal"
    if value == "internal":
        return value
    if value.startswith("cmd:") and value[4:].strip():
        return value[4:].strip()
    raise UsageError(f"--solver must be 'internal' or 'cmd:<executable>', got {value!r}")


def cmd_map(args: argparse.Namespace) -> int:
    dfg = _load_dfg(args.dfg)
    arch = _load_arch(args.arch)
    try:
        opts = MapperOptions(
            ii_start=args.ii_start,
            ii_max=args.ii_max,
            time_budget_per_ii=args.timeout,
            total_budget=args.total_timeout,
            seed=args.seed,
            solver=_solver_choice(args.solver),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = map_loop(dfg, arch, opts)
    text = report_to_json(report, dfg, arch)
    if args.out:
        Path(args.out).write_text(text)
    for a in report.attempts:
        extra = f"  {a.detail}" if a.detail else ""
        print(f"II={a.ii:<3} {a.verdict:<16} {a.solve_time:8.3f}s  {a.num_vars} vars  {a.num_clauses} clauses{extra}")
    if report.status == MAPPED:
        assert report.mapping is not None
        print(kernel_table(report.mapping, arch.num_pes))
        return EXIT_OK
    if report.status == NO_MAPPING:
        print(f"no mapping found up to II={opts.ii_max}", file=sys.stderr)
        return EXIT_NO_MAPPING
    print("time budget exhausted", file=sys.stderr)
    return EXIT_TIMEOUT


def cmd_schedule(args: argparse.Namespace) -> int:
    dfg = _load_dfg(args.dfg)
    ms = mobility_schedule(dfg)
    print(schedule_table(ms))
    if args.ii is not None:
        if args.ii < 1:
            raise UsageError("--ii must be positive")
        print()
        print(kms_table(kms_for_ii(dfg, args.ii)))
    return EXIT_OK


def cmd_encode(args: argparse.Namespace) -> int:
    dfg = _load_dfg(args.dfg)
    arch = _load_arch(args.arch)
    if args.ii < 1:
        raise UsageError("--ii must be positive")
    try:
        cnf, table = build_formula(dfg, kms_for_ii(dfg, args.ii), arch)
    except TriviallyUnsat as exc:
        print(f"trivially unsatisfiable at II={exc.ii}: {exc.reason}", file=sys.stderr)
        return EXIT_NO_MAPPING
    Path(args.out).write_text(write_dimacs(cnf, table))
    print(f"{cnf.num_vars} vars, {len(cnf.clauses)} clauses -> {args.out}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    report, dfg, arch = read_report(_read(args.report))
    if args.dfg:
        dfg = _load_dfg(args.dfg)
    if args.arch:
        arch = _load_arch(args.arch)
    if report.mapping is None:
        raise InputError(f"{args.report}: report has status {report.status!r} and no mapping")
    problems = validate_mapping(report.mapping, dfg, arch)
    for v in problems:
        print(v)
    if problems:
        return EXIT_VIOLATIONS
    print(f"OK: legal mapping at II={report.mapping.ii}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cgramap", description="SAT-based modulo scheduling for CGRA meshes")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-II progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("map", help="find a minimal-II mapping")
    p.add_argument("--dfg", required=True)
    p.add_argument("--arch", required=True)
    p.add_argument("--ii-start", type=int)
    p.add_argument("--ii-max", type=int, default=DEFAULT_II_MAX)
    p.add_argument("--timeout", type=float, default=DEFAULT_TIME_BUDGET, help="seconds per II")
    p.add_argument("--total-timeout", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver", help=f"internal | cmd:<exe> (default ${SOLVER_ENV} or internal)")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("schedule", help="print ASAP/ALAP/mobility schedules")
    p.add_argument("--dfg", required=True)
    p.add_argument("--ii", type=int, help="also print the KMS folded at this II")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("encode", help="write the CNF for one II as DIMACS")
    p.add_argument("--dfg", required=True)
    p.add_argument("--arch", required=True)
    p.add_argument("--ii", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("validate", help="check the mapping stored in a report")
    p.add_argument("report")
    p.add_argument("--dfg", help="override the DFG embedded in the report")
    p.add_argument("--arch", help="override the architecture embedded in the report")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cgramap: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"cgramap: input error: {exc}", file=sys.stderr)
        return EXIT_DATAERR


if __name__ == "__main__":
    sys.exit(main())
