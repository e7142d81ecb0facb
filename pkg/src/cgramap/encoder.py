"""CNF encoding of the placement / timing / routing problem at a fixed II.

Placement variables are ``x[n, p, c, it]``: node ``n`` runs on PE ``p`` at
kernel slot ``c`` on behalf of iteration label ``it``. Three clause families:

* exactly one placement per node (at-least-one plus pairwise at-most-one);
* no two nodes on the same PE in the same kernel slot;
* every dependency is routed by one selected option, either through the
  producer's register file (same PE) or through its output register
  (neighbour or same PE, not overwritten before it is consumed).

Dependency options are OR-ed via selector variables, one per option.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, NamedTuple, Sequence

from .cnf import CnfFormula
from .mapping import OUTPUT_REGISTER, REGISTER_FILE, Mapping, Placement, Route
from .model import CgraArch, Dfg, DfgEdge, neighbors
from .schedule import Kms
from .solver import refuted_by_propagation


class TriviallyUnsat(Exception):
    """No mapping can exist at this II; raised before any solving."""

    def __init__(self, ii: int, reason: str) -> None:
        super().__init__(f"II={ii}: {reason}")
        self.ii = ii
        self.reason = reason


class EncodingError(RuntimeError):
    """A model does not decode to a mapping; indicates an encoder bug."""


class VarKey(NamedTuple):
    node: int
    pe: int
    slot: int
    iter: int

    @property
    def placement(self) -> Placement:
        return Placement(self.pe, self.slot, self.iter)


@dataclass(frozen=True)
class Candidate:
    edge_index: int
    edge: DfgEdge
    src: VarKey
    dst: VarKey
    kind: str


class VarTable:
    """Bijection between SAT variables and placement keys / route selectors.

    Placement variables come first (1..P); selectors are numbered after them.
    """

    def __init__(self, ii: int, keys: Sequence[VarKey]) -> None:
        self.ii = ii
        self.keys: list[VarKey] = list(keys)
        self.index = {k: i + 1 for i, k in enumerate(self.keys)}
        self.by_node: dict[int, list[int]] = defaultdict(list)
        self.by_cell: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
        for k, v in self.index.items():
            self.by_node[k.node].append(v)
            self.by_cell[k.pe, k.slot].append((k.node, v))
        self.selectors: list[Candidate] = []

    @property
    def num_placement_vars(self) -> int:
        return len(self.keys)

    @property
    def num_vars(self) -> int:
        return len(self.keys) + len(self.selectors)

    def var(self, key: VarKey) -> int:
        return self.index[key]

    def key(self, var: int) -> VarKey:
        return self.keys[var - 1]

    def literals(self, node: int) -> list[int]:
        return self.by_node.get(node, [])

    def node_keys(self, node: int) -> list[VarKey]:
        return [self.key(v) for v in self.literals(node)]

    def add_selector(self, cand: Candidate) -> int:
        self.selectors.append(cand)
        return self.num_vars

    def selector(self, var: int) -> Candidate:
        return self.selectors[var - self.num_placement_vars - 1]

    def comments(self) -> Iterator[str]:
        for k, v in self.index.items():
            yield f"var {v} = node {k.node} pe {k.pe} slot {k.slot} iter {k.iter}"
        per_edge: dict[int, int] = defaultdict(int)
        for i, cand in enumerate(self.selectors):
            k = per_edge[cand.edge_index]
            per_edge[cand.edge_index] += 1
            e = cand.edge
            yield (
                f"sel {self.num_placement_vars + i + 1} = edge {e.src}->{e.dst} cand {k}"
                f" kind {cand.kind}"
            )


def enumerate_vars(kms: Kms, arch: CgraArch, dfg: Dfg) -> VarTable:
    keys = []
    for n in dfg.node_ids:
        pes = arch.admissible_pes(dfg.node(n))
        if not pes:
            raise TriviallyUnsat(kms.ii, f"node {n} has no admissible PE")
        for slot, it in sorted(kms.occ[n]):
            keys.extend(VarKey(n, p, slot, it) for p in pes)
    return VarTable(kms.ii, keys)


def encode_c1(n: int, table: VarTable) -> list[tuple[int, ...]]:
    lits = table.literals(n)
    clauses = [tuple(lits)]
    clauses.extend((-a, -b) for a, b in combinations(lits, 2))
    return clauses


def encode_c2(table: VarTable) -> list[tuple[int, ...]]:
    clauses = []
    for cell in sorted(table.by_cell):
        for (n, a), (m, b) in combinations(table.by_cell[cell], 2):
            if n != m:
                clauses.append((-a, -b))
    return clauses


def _timing_ok(edge: DfgEdge, v: VarKey, w: VarKey) -> bool:
    # the consumer of a loop-carried edge belongs to the next iteration
    it_gap = w.iter + edge.distance - v.iter
    if it_gap == 0:
        return w.slot > v.slot
    if it_gap == 1:
        return w.slot <= v.slot
    return False


def candidate_pairs(edge: DfgEdge, table: VarTable, arch: CgraArch) -> list[tuple[VarKey, VarKey]]:
    """Source/destination placement pairs that satisfy adjacency and timing."""
    pairs = []
    for v in table.node_keys(edge.src):
        if edge.src == edge.dst:
            # a self-dependency can only pair a placement with itself
            if _timing_ok(edge, v, v):
                pairs.append((v, v))
            continue
        near = neighbors(arch, v.pe)
        for w in table.node_keys(edge.dst):
            if w.pe in near and _timing_ok(edge, v, w):
                pairs.append((v, w))
    return pairs


def blocking_slots(v: VarKey, w: VarKey, edge: DfgEdge, ii: int) -> list[int]:
    """Kernel slots strictly between production by ``v`` and consumption by ``w``."""
    produced = v.slot + v.iter * ii
    consumed = w.slot + (w.iter + edge.distance) * ii
    return [t % ii for t in range(produced + 1, consumed)]


def route_options(edge_index: int, edge: DfgEdge, pairs: Sequence[tuple[VarKey, VarKey]]) -> list[Candidate]:
    out = []
    for v, w in pairs:
        out.append(Candidate(edge_index, edge, v, w, OUTPUT_REGISTER))
        if v.pe == w.pe:
            out.append(Candidate(edge_index, edge, v, w, REGISTER_FILE))
    return out


def encode_c3_dep(options: Sequence[Candidate], table: VarTable) -> list[tuple[int, ...]]:
    """Selector-based OR over the routing options of one dependency."""
    selectors = [table.add_selector(c) for c in options]
    clauses: list[tuple[int, ...]] = [tuple(selectors)]
    for s, cand in zip(selectors, options):
        clauses.append((-s, table.var(cand.src)))
        clauses.append((-s, table.var(cand.dst)))
        if cand.kind != OUTPUT_REGISTER:
            continue
        for slot in blocking_slots(cand.src, cand.dst, cand.edge, table.ii):
            for node, z in table.by_cell.get((cand.src.pe, slot), ()):
                if node != cand.edge.dst:
                    clauses.append((-s, -z))
    return clauses


def build_formula(dfg: Dfg, kms: Kms, arch: CgraArch) -> tuple[CnfFormula, VarTable]:
    table = enumerate_vars(kms, arch, dfg)
    clauses: list[tuple[int, ...]] = []
    for n in dfg.node_ids:
        clauses.extend(encode_c1(n, table))
    clauses.extend(encode_c2(table))
    for i, edge in enumerate(dfg.edges):
        pairs = candidate_pairs(edge, table, arch)
        if not pairs:
            raise TriviallyUnsat(kms.ii, f"no candidate placements for dependency {edge}")
        clauses.extend(encode_c3_dep(route_options(i, edge, pairs), table))
    cnf = CnfFormula(table.num_vars, clauses)
    if refuted_by_propagation(cnf):
        raise TriviallyUnsat(kms.ii, "no candidate placements: unit propagation refutes the formula")
    return cnf, table


def decode_model(model: Sequence[int], table: VarTable, dfg: Dfg) -> Mapping:
    true = {lit for lit in model if lit > 0}
    placement: dict[int, Placement] = {}
    for n in dfg.node_ids:
        chosen = [v for v in table.literals(n) if v in true]
        if len(chosen) != 1:
            raise EncodingError(f"node {n} has {len(chosen)} true placement variables")
        placement[n] = table.key(chosen[0]).placement

    routes = []
    first = table.num_placement_vars + 1
    picked: dict[int, Candidate] = {}
    for s in range(first, table.num_vars + 1):
        if s in true:
            cand = table.selector(s)
            picked.setdefault(cand.edge_index, cand)
    for i, edge in enumerate(dfg.edges):
        cand = picked.get(i)
        if cand is None:
            raise EncodingError(f"dependency {edge} has no true selector")
        if cand.src.placement != placement[edge.src] or cand.dst.placement != placement[edge.dst]:
            raise EncodingError(f"selector for {edge} disagrees with placements")
        routes.append(Route(edge, cand.kind, cand.src.placement, cand.dst.placement))
    return Mapping(table.ii, placement, routes)
