"""Versioned JSON schema for mapping reports."""

from __future__ import annotations

import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .driver import Attempt, MappingReport
from .mapping import Mapping
from .model import ArchDoc, CgraArch, Dfg, DfgDoc, InputError, arch_to_dict, dfg_to_dict, parse_arch, parse_dfg

SCHEMA_VERSION = 1


class _Closed(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PlacementDoc(_Closed):
    node: int
    pe: int = Field(ge=0)
    slot: int = Field(ge=0)
    iter: int = Field(ge=0)


class RouteDoc(_Closed):
    src: int
    dst: int
    distance: int = Field(ge=0)
    kind: Literal["register_file", "output_register"]
    src_placement: tuple[int, int, int]
    dst_placement: tuple[int, int, int]


class RegisterDoc(_Closed):
    node: int
    pe: int
    reg: int = Field(ge=0)


class MappingDoc(_Closed):
    ii: int = Field(ge=1)
    placement: list[PlacementDoc]
    routes: list[RouteDoc]
    registers: list[RegisterDoc] = []


class AttemptDoc(_Closed):
    ii: int
    verdict: Literal["sat", "unsat", "trivially_unsat", "coloring_failed", "timeout"]
    solve_time: float
    num_vars: int
    num_clauses: int
    detail: str = ""


class ReportDoc(_Closed):
    schema_version: Literal[1]
    status: Literal["mapped", "no_mapping_up_to_cap", "timed_out"]
    ii: Optional[int]
    arch: ArchDoc
    dfg: DfgDoc
    mapping: Optional[MappingDoc]
    attempts: list[AttemptDoc]


def report_to_json(report: MappingReport, dfg: Dfg, arch: CgraArch) -> str:
    doc = ReportDoc(
        schema_version=SCHEMA_VERSION,
        status=report.status,
        ii=report.ii,
        arch=ArchDoc.model_validate(arch_to_dict(arch)),
        dfg=DfgDoc.model_validate(dfg_to_dict(dfg)),
        mapping=MappingDoc.model_validate(report.mapping.to_dict()) if report.mapping else None,
        attempts=[AttemptDoc(**a.__dict__) for a in report.attempts],
    )
    return doc.model_dump_json(indent=2) + "\n"


def read_report(text: str) -> tuple[MappingReport, Dfg, CgraArch]:
    """Parse a report; unknown fields and unknown schema versions are rejected."""
    try:
        doc = ReportDoc.model_validate(json.loads(text))
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise InputError(f"report {loc}: {first['msg']}") from exc
    dfg = parse_dfg(doc.dfg.model_dump())
    arch = parse_arch(doc.arch.model_dump())
    mapping = Mapping.from_dict(doc.mapping.model_dump()) if doc.mapping else None
    attempts = [Attempt(**a.model_dump()) for a in doc.attempts]
    return MappingReport(doc.status, doc.ii, mapping, attempts), dfg, arch
