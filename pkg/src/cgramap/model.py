"""CGRA architecture and data-flow graph model.

Both input documents are JSON. Parsing validates every structural invariant
and raises :class:`InputError` on the first violation; nothing is repaired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from pydantic import BaseModel, ConfigDict, ValidationError

PeId = int

DEFAULT_REGS_PER_PE = 4


class InputError(ValueError):
    """An architecture or DFG document violates its invariants."""


@dataclass(frozen=True)
class CgraArch:
    rows: int
    cols: int
    torus: bool = False
    regs_per_pe: int = DEFAULT_REGS_PER_PE
    memory_pes: frozenset[PeId] = frozenset()

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise InputError(f"mesh must be at least 1x1, got {self.rows}x{self.cols}")
        if self.regs_per_pe < 1:
            raise InputError(f"regs_per_pe must be >= 1, got {self.regs_per_pe}")
        bad = sorted(p for p in self.memory_pes if not 0 <= p < self.num_pes)
        if bad:
            raise InputError(f"memory_pes out of range for {self.rows}x{self.cols}: {bad}")

    @property
    def num_pes(self) -> int:
        return self.rows * self.cols

    @property
    def pes(self) -> range:
        return range(self.num_pes)

    def coords(self, pe: PeId) -> tuple[int, int]:
        return divmod(pe, self.cols)

    def admissible_pes(self, node: DfgNode) -> list[PeId]:
        """PEs allowed to execute ``node`` (memory ops restricted when memory_pes is set)."""
        if node.needs_memory and self.memory_pes:
            return sorted(self.memory_pes)
        return list(self.pes)


def neighbors(arch: CgraArch, pe: PeId) -> frozenset[PeId]:
    """The PE itself plus its up/down/left/right neighbours."""
    if not 0 <= pe < arch.num_pes:
        raise InputError(f"PE {pe} outside {arch.rows}x{arch.cols} mesh")
    r, c = arch.coords(pe)
    out = {pe}
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        rr, cc = r + dr, c + dc
        if arch.torus:
            rr %= arch.rows
            cc %= arch.cols
        elif not (0 <= rr < arch.rows and 0 <= cc < arch.cols):
            continue
        out.add(rr * arch.cols + cc)
    return frozenset(out)


@dataclass(frozen=True)
class DfgNode:
    id: int
    opcode: str = "op"
    needs_memory: bool = False


@dataclass(frozen=True)
class DfgEdge:
    src: int
    dst: int
    distance: int = 0

    def __str__(self) -> str:
        suffix = f" (d{self.distance})" if self.distance else ""
        return f"{self.src}->{self.dst}{suffix}"


@dataclass(frozen=True)
class Dfg:
    nodes: tuple[DfgNode, ...]
    edges: tuple[DfgEdge, ...]
    _by_id: dict[int, DfgNode] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.nodes:
            raise InputError("DFG has no nodes")
        by_id: dict[int, DfgNode] = {}
        for n in self.nodes:
            if n.id < 0:
                raise InputError(f"node id must be non-negative, got {n.id}")
            if n.id in by_id:
                raise InputError(f"duplicate node id {n.id}")
            by_id[n.id] = n
        seen: set[tuple[int, int, int]] = set()
        for e in self.edges:
            for end in (e.src, e.dst):
                if end not in by_id:
                    raise InputError(f"edge {e} references unknown node {end}")
            if e.distance < 0:
                raise InputError(f"edge {e} has negative distance")
            if e.distance > 1:
                raise InputError(f"edge {e}: loop-carried distance > 1 is not supported")
            key = (e.src, e.dst, e.distance)
            if key in seen:
                raise InputError(f"duplicate edge {e}")
            seen.add(key)
        object.__setattr__(self, "_by_id", by_id)
        cycle = _zero_distance_cycle(self)
        if cycle:
            path = " -> ".join(str(n) for n in cycle + [cycle[0]])
            raise InputError(f"zero-distance cycle: {path}")

    @classmethod
    def build(cls, node_ids: Iterable[int], edges: Iterable[tuple[int, ...]]) -> Dfg:
        """Shorthand constructor: plain ids and (src, dst[, distance]) tuples."""
        return cls(
            tuple(DfgNode(i) for i in node_ids),
            tuple(DfgEdge(*e) for e in edges),
        )

    @property
    def node_ids(self) -> list[int]:
        return sorted(self._by_id)

    def node(self, nid: int) -> DfgNode:
        return self._by_id[nid]

    def preds(self, nid: int, distance: int | None = 0) -> list[int]:
        return [e.src for e in self.edges if e.dst == nid and (distance is None or e.distance == distance)]

    def succs(self, nid: int, distance: int | None = 0) -> list[int]:
        return [e.dst for e in self.edges if e.src == nid and (distance is None or e.distance == distance)]


def _zero_distance_cycle(dfg: Dfg) -> list[int]:
    """Return one cycle of the distance-0 subgraph, or [] when it is a DAG."""
    adj: dict[int, list[int]] = {n.id: [] for n in dfg.nodes}
    for e in dfg.edges:
        if e.distance == 0:
            adj[e.src].append(e.dst)
    state: dict[int, int] = {}  # 1 = on stack, 2 = done
    stack: list[int] = []

    def visit(u: int) -> list[int]:
        state[u] = 1
        stack.append(u)
        for v in adj[u]:
            if state.get(v) == 1:
                return stack[stack.index(v):]
            if v not in state:
                found = visit(v)
                if found:
                    return found
        stack.pop()
        state[u] = 2
        return []

    for n in sorted(adj):
        if n not in state:
            found = visit(n)
            if found:
                return found
    return []


# --- documents ---------------------------------------------------------------

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


class ArchDoc(_Strict):
    rows: int
    cols: int
    torus: bool = False
    regs_per_pe: int = DEFAULT_REGS_PER_PE
    memory_pes: list[int] | None = None


class NodeDoc(_Strict):
    id: int
    opcode: str = "op"
    needs_memory: bool = False


class EdgeDoc(_Strict):
    src: int
    dst: int
    distance: int = 0


class DfgDoc(_Strict):
    nodes: list[NodeDoc]
    edges: list[EdgeDoc] = []


def _load(text: str | dict[str, Any], doc_type: type[_Strict]) -> Any:
    try:
        data = json.loads(text) if isinstance(text, str) else text
        return doc_type.model_validate(data)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise InputError(f"{loc}: {first['msg']}") from exc


def parse_arch(text: str | dict[str, Any]) -> CgraArch:
    doc = _load(text, ArchDoc)
    return CgraArch(
        rows=doc.rows,
        cols=doc.cols,
        torus=doc.torus,
        regs_per_pe=doc.regs_per_pe,
        memory_pes=frozenset(doc.memory_pes or ()),
    )


def parse_dfg(text: str | dict[str, Any]) -> Dfg:
    doc = _load(text, DfgDoc)
    return Dfg(
        tuple(DfgNode(n.id, n.opcode, n.needs_memory) for n in doc.nodes),
        tuple(DfgEdge(e.src, e.dst, e.distance) for e in doc.edges),
    )


def arch_to_dict(arch: CgraArch) -> dict[str, Any]:
    return {
        "rows": arch.rows,
        "cols": arch.cols,
        "torus": arch.torus,
        "regs_per_pe": arch.regs_per_pe,
        "memory_pes": sorted(arch.memory_pes),
    }


def dfg_to_dict(dfg: Dfg) -> dict[str, Any]:
    return {
        "nodes": [
            {"id": n.id, "opcode": n.opcode, "needs_memory": n.needs_memory}
            for n in sorted(dfg.nodes, key=lambda n: n.id)
        ],
        "edges": [
            {"src": e.src, "dst": e.dst, "distance": e.distance}
            for e in sorted(dfg.edges, key=lambda e: (e.src, e.dst, e.distance))
        ],
    }
