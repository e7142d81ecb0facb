"""Per-PE register allocation for values delivered through the register file.

Each producer (SSA value) routed through its PE's register file lives from its
production cycle up to its last same-PE consumption. Lifetimes are at most one
II long, so a value occupies a set of kernel slots; two values interfere when
those sets intersect. Interference graphs are coloured greedily along a
maximum-cardinality-search order, which is optimal on chordal graphs.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .mapping import REGISTER_FILE, Mapping


@dataclass(frozen=True)
class LiveInterval:
    value: int  # producer node
    pe: int
    start: int  # absolute production cycle
    ends: tuple[int, ...]  # absolute consumption cycles
    ii: int

    @property
    def end(self) -> int:
        return max(self.ends)

    @property
    def wraps(self) -> bool:
        """True when the value is still live as the kernel restarts."""
        return self.start % self.ii + (self.end - self.start) >= self.ii

    def occupied_slots(self) -> frozenset[int]:
        """Kernel slots of the half-open lifetime [start, end)."""
        return frozenset(t % self.ii for t in range(self.start, self.end))

    def span_slots(self) -> list[int]:
        """Kernel slots from production through last use, in time order."""
        return [t % self.ii for t in range(self.start, self.end + 1)]


@dataclass
class InterferenceGraph:
    vertices: list[LiveInterval]
    adj: dict[int, set[int]] = field(default_factory=dict)  # vertex index -> neighbours

    @classmethod
    def build(cls, intervals: list[LiveInterval]) -> InterferenceGraph:
        g = cls(list(intervals), {i: set() for i in range(len(intervals))})
        slots = [iv.occupied_slots() for iv in intervals]
        for i in range(len(intervals)):
            for j in range(i + 1, len(intervals)):
                if slots[i] & slots[j]:
                    g.adj[i].add(j)
                    g.adj[j].add(i)
        return g


@dataclass(frozen=True)
class ColoringFailure:
    vertex: LiveInterval
    clique: tuple[LiveInterval, ...]
    k: int

    def __str__(self) -> str:
        vals = ", ".join(str(iv.value) for iv in self.clique)
        return (
            f"PE {self.vertex.pe}: value {self.vertex.value} needs a register beyond {self.k};"
            f" live together: {vals}"
        )


def build_live_intervals(mapping: Mapping, ii: int | None = None) -> dict[int, list[LiveInterval]]:
    ii = mapping.ii if ii is None else ii
    ends: dict[int, list[int]] = defaultdict(list)
    for r in mapping.routes:
        if r.kind != REGISTER_FILE:
            continue
        ends[r.edge.src].append(r.dst.time(ii) + r.edge.distance * ii)
    out: dict[int, list[LiveInterval]] = defaultdict(list)
    for node in sorted(ends):
        p = mapping.placement[node]
        out[p.pe].append(LiveInterval(node, p.pe, p.time(ii), tuple(sorted(ends[node])), ii))
    return dict(out)


def mcs_order(graph: InterferenceGraph) -> list[int]:
    weight = {v: 0 for v in graph.adj}
    order: list[int] = []
    while weight:
        v = max(weight, key=lambda u: (weight[u], -u))
        order.append(v)
        del weight[v]
        for u in graph.adj[v]:
            if u in weight:
                weight[u] += 1
    return order


def _max_point_clique(graph: InterferenceGraph) -> list[int]:
    best: list[int] = []
    if not graph.vertices:
        return best
    ii = graph.vertices[0].ii
    for slot in range(ii):
        here = [i for i, iv in enumerate(graph.vertices) if slot in iv.occupied_slots()]
        if len(here) > len(best):
            best = here
    return best


def color(graph: InterferenceGraph, k: int) -> dict[int, int] | ColoringFailure:
    """Map vertex index -> register in [0, k), or describe why k registers do not suffice."""
    if k < 1:
        raise ValueError("register count must be positive")
    colors: dict[int, int] = {}
    for v in mcs_order(graph):
        used = {colors[u] for u in graph.adj[v] if u in colors}
        free = next((c for c in range(k) if c not in used), None)
        if free is None:
            clique = _max_point_clique(graph)
            if len(clique) <= k:
                clique = [v] + sorted(u for u in graph.adj[v] if u in colors)
            return ColoringFailure(graph.vertices[v], tuple(graph.vertices[i] for i in clique), k)
        colors[v] = free
    return colors


def check_unrolled(intervals: list[LiveInterval], regs: dict[int, int], periods: int = 3) -> bool:
    """Re-check an assignment on ``periods`` linear copies of the kernel.

    Each value instance occupies ``[start + k*ii, end + k*ii)`` (start taken modulo
    ii); instances sharing a register must not overlap.
    """
    by_reg: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for iv in intervals:
        base = iv.start % iv.ii
        length = iv.end - iv.start
        for k in range(periods):
            by_reg[regs[iv.value]].append((base + k * iv.ii, base + length + k * iv.ii))
    for spans in by_reg.values():
        spans.sort()
        reach = spans[0][1]
        for lo, hi in spans[1:]:
            if lo < reach:
                return False
            reach = max(reach, hi)
    return True


def allocate(mapping: Mapping, k: int) -> dict[int, int] | ColoringFailure:
    """Assign registers for every register-file value; per-PE graphs are independent."""
    assignment: dict[int, int] = {}
    for pe, intervals in sorted(build_live_intervals(mapping).items()):
        graph = InterferenceGraph.build(intervals)
        result = color(graph, k)
        if isinstance(result, ColoringFailure):
            return result
        regs = {graph.vertices[i].value: c for i, c in result.items()}
        if not check_unrolled(intervals, regs):
            raise AssertionError(f"register assignment on PE {pe} fails the unrolled check")
        assignment.update(regs)
    return assignment
