"""ASAP/ALAP/mobility schedules, II lower bounds and the kernel mobility schedule.

All nodes have unit latency. Only distance-0 edges constrain ASAP/ALAP;
loop-carried edges matter for the recurrence bound and at encode time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import CgraArch, Dfg


class ScheduleError(ValueError):
    pass


def _topo_order(dfg: Dfg) -> list[int]:
    indeg = {n: 0 for n in dfg.node_ids}
    for e in dfg.edges:
        if e.distance == 0:
            indeg[e.dst] += 1
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for s in dfg.succs(n):
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
        ready.sort()
    return order


def compute_asap(dfg: Dfg) -> dict[int, int]:
    asap: dict[int, int] = {}
    for n in _topo_order(dfg):
        preds = dfg.preds(n)
        asap[n] = 1 + max(asap[p] for p in preds) if preds else 0
    return asap


def critical_path_length(dfg: Dfg) -> int:
    """Number of time steps needed by the distance-0 DAG (1 + max ASAP)."""
    asap = compute_asap(dfg)
    return 1 + max(asap.values()) if asap else 0


def compute_alap(dfg: Dfg, length: int) -> dict[int, int]:
    if length < critical_path_length(dfg):
        raise ScheduleError(
            f"schedule length {length} below critical path {critical_path_length(dfg)}"
        )
    alap: dict[int, int] = {}
    for n in reversed(_topo_order(dfg)):
        succs = dfg.succs(n)
        alap[n] = min(alap[s] for s in succs) - 1 if succs else length - 1
    return alap


@dataclass(frozen=True)
class MobilitySchedule:
    asap: dict[int, int]
    alap: dict[int, int]
    length: int

    def mobility(self, n: int) -> int:
        return self.alap[n] - self.asap[n]

    def rows(self) -> list[list[int]]:
        """Row t lists every node whose [asap, alap] window covers t."""
        return [
            sorted(n for n in self.asap if self.asap[n] <= t <= self.alap[n])
            for t in range(self.length)
        ]


def mobility_schedule(dfg: Dfg, length: int | None = None) -> MobilitySchedule:
    """Mobility schedule at ``length`` (default: the critical-path length).

    A longer length gives every node extra slack at the tail; the mapper uses
    ``max(critical path, II)`` so that nodes on the same level can be spread
    over the kernel.
    """
    if length is None:
        length = critical_path_length(dfg)
    asap = compute_asap(dfg)
    alap = compute_alap(dfg, length)
    return MobilitySchedule(asap, alap, length)


def res_mii(dfg: Dfg, arch: CgraArch) -> int:
    return max(1, math.ceil(len(dfg.nodes) / arch.num_pes))


def rec_mii(dfg: Dfg) -> int:
    """Smallest II admitting no positive cycle under weights ``1 - II * distance``.

    Equivalent to the max over elementary cycles of ceil(#nodes / total distance);
    1 for graphs without loop-carried cycles.
    """
    nodes = dfg.node_ids
    idx = {n: i for i, n in enumerate(nodes)}
    edges = [(idx[e.src], idx[e.dst], e.distance) for e in dfg.edges]
    for ii in range(1, len(nodes) + 1):
        if not _has_positive_cycle(len(nodes), edges, ii):
            return ii
    # every elementary cycle has at most |V| nodes and distance >= 1
    raise AssertionError("unreachable: zero-distance cycle slipped through validation")


def _has_positive_cycle(n: int, edges: list[tuple[int, int, int]], ii: int) -> bool:
    dist = [0] * n
    for _ in range(n):
        changed = False
        for u, v, d in edges:
            w = dist[u] + 1 - ii * d
            if w > dist[v]:
                dist[v] = w
                changed = True
        if not changed:
            return False
    return True


def compute_mii(dfg: Dfg, arch: CgraArch) -> int:
    return max(res_mii(dfg, arch), rec_mii(dfg))


@dataclass(frozen=True)
class Kms:
    """The mobility schedule folded modulo ``ii``.

    ``occ[n]`` holds every (slot, iteration) at which node ``n`` may execute;
    absolute time ``slot + iteration * ii`` stays inside its mobility window.
    """

    ii: int
    folds: int
    occ: dict[int, tuple[tuple[int, int], ...]]
    ms: MobilitySchedule

    def rows(self) -> list[list[tuple[int, int]]]:
        """Per kernel slot, the sorted (node, iteration) occurrences."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.ii)]
        for n, cells in self.occ.items():
            for slot, it in cells:
                out[slot].append((n, it))
        return [sorted(r, key=lambda x: (x[1], x[0])) for r in out]


def build_kms(ms: MobilitySchedule, ii: int) -> Kms:
    if ii < 1:
        raise ScheduleError(f"II must be positive, got {ii}")
    folds = math.ceil(ms.length / ii)
    occ = {
        n: tuple((c % ii, c // ii) for c in range(ms.asap[n], ms.alap[n] + 1))
        for n in sorted(ms.asap)
    }
    return Kms(ii, folds, occ, ms)


def kms_for_ii(dfg: Dfg, ii: int) -> Kms:
    """KMS the mapper searches at ``ii``: fold of the schedule stretched to ``max(L, ii)``."""
    length = max(critical_path_length(dfg), ii)
    return build_kms(mobility_schedule(dfg, length), ii)
