"""Decoded mappings: node placements, routed dependencies, register assignment."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple

from .model import DfgEdge, PeId

REGISTER_FILE = "register_file"
OUTPUT_REGISTER = "output_register"
ROUTE_KINDS = (REGISTER_FILE, OUTPUT_REGISTER)


class Placement(NamedTuple):
    pe: PeId
    slot: int
    iter: int

    def time(self, ii: int) -> int:
        """Absolute cycle within the iteration-0 schedule."""
        return self.slot + self.iter * ii


@dataclass(frozen=True)
class Route:
    edge: DfgEdge
    kind: str
    src: Placement
    dst: Placement


@dataclass
class Mapping:
    ii: int
    placement: dict[int, Placement]
    routes: list[Route] = field(default_factory=list)
    # producer node -> register index on its PE (register-file values only)
    registers: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ii": self.ii,
            "placement": [
                {"node": n, "pe": p.pe, "slot": p.slot, "iter": p.iter}
                for n, p in sorted(self.placement.items())
            ],
            "routes": [
                {
                    "src": r.edge.src,
                    "dst": r.edge.dst,
                    "distance": r.edge.distance,
                    "kind": r.kind,
                    "src_placement": list(r.src),
                    "dst_placement": list(r.dst),
                }
                for r in self.routes
            ],
            "registers": [
                {"node": n, "pe": self.placement[n].pe, "reg": reg}
                for n, reg in sorted(self.registers.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Mapping:
        return cls(
            ii=data["ii"],
            placement={
                p["node"]: Placement(p["pe"], p["slot"], p["iter"]) for p in data["placement"]
            },
            routes=[
                Route(
                    DfgEdge(r["src"], r["dst"], r["distance"]),
                    r["kind"],
                    Placement(*r["src_placement"]),
                    Placement(*r["dst_placement"]),
                )
                for r in data["routes"]
            ],
            registers={r["node"]: r["reg"] for r in data.get("registers", [])},
        )

    def kernel_rows(self, num_pes: int) -> list[list[tuple[int, int] | None]]:
        """``rows[slot][pe]`` = (node, iteration) or None."""
        rows: list[list[tuple[int, int] | None]] = [[None] * num_pes for _ in range(self.ii)]
        for n, p in self.placement.items():
            rows[p.slot][p.pe] = (n, p.iter)
        return rows
