"""Independent legality checker and exhaustive mapping oracle.

Nothing here imports the encoder: legality is restated in terms of absolute
cycles. A dependency ``s -> d`` with loop distance ``k`` produced at cycle
``T_s`` and consumed at ``T_d + k*II`` must have a lag in ``[1, II]``: the
consumer reads strictly after production and before the producer's next
instance overwrites it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from bisect import bisect_left
from itertools import product
from typing import Iterator

from .mapping import OUTPUT_REGISTER, REGISTER_FILE, ROUTE_KINDS, Mapping, Placement, Route
from .model import CgraArch, Dfg, DfgEdge, neighbors
from .regalloc import ColoringFailure, allocate
from .schedule import critical_path_length, mobility_schedule

# violation codes, in check order
PLACEMENT = "E_PLACEMENT"
COLLISION = "E_COLLISION"
ROUTE = "E_ROUTE"
ADJACENCY = "E_ADJACENCY"
TIMING = "E_TIMING"
OVERWRITE = "E_OVERWRITE"
REGISTERS = "E_REGISTERS"
SIMULATION = "E_SIMULATION"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def time_windows(dfg: Dfg, ii: int) -> dict[int, tuple[int, int]]:
    ms = mobility_schedule(dfg, max(critical_path_length(dfg), ii))
    return {n: (ms.asap[n], ms.alap[n]) for n in dfg.node_ids}


def lag(edge: DfgEdge, src: Placement, dst: Placement, ii: int) -> int:
    return dst.time(ii) + edge.distance * ii - src.time(ii)


def overwriters(
    edge: DfgEdge, src: Placement, dst: Placement, placement: dict[int, Placement], ii: int
) -> list[int]:
    """Nodes other than the endpoints that execute on the producer PE while the value waits."""
    gap = lag(edge, src, dst, ii)
    slots = {(src.slot + k) % ii for k in range(1, gap)}
    return sorted(
        n
        for n, p in placement.items()
        if n not in (edge.src, edge.dst) and p.pe == src.pe and p.slot in slots
    )


def _check_placements(mapping: Mapping, dfg: Dfg, arch: CgraArch) -> Iterator[Violation]:
    ii = mapping.ii
    windows = time_windows(dfg, ii)
    folds = math.ceil(max(critical_path_length(dfg), ii) / ii)
    for n in dfg.node_ids:
        p = mapping.placement.get(n)
        if p is None:
            yield Violation(PLACEMENT, f"node {n} is not placed")
            continue
        if not 0 <= p.pe < arch.num_pes:
            yield Violation(PLACEMENT, f"node {n} on PE {p.pe} outside the {arch.rows}x{arch.cols} mesh")
        elif p.pe not in arch.admissible_pes(dfg.node(n)):
            yield Violation(PLACEMENT, f"node {n} on inadmissible PE {p.pe}")
        if not (0 <= p.slot < ii and 0 <= p.iter < folds):
            yield Violation(PLACEMENT, f"node {n} at slot {p.slot} iter {p.iter} outside kernel")
        lo, hi = windows[n]
        if not lo <= p.time(ii) <= hi:
            yield Violation(
                PLACEMENT, f"node {n} at time {p.time(ii)} outside mobility window [{lo}, {hi}]"
            )
    for n in mapping.placement:
        if n not in windows:
            yield Violation(PLACEMENT, f"unknown node {n} placed")


def _check_collisions(mapping: Mapping) -> Iterator[Violation]:
    cells: dict[tuple[int, int], int] = {}
    for n, p in sorted(mapping.placement.items()):
        other = cells.setdefault((p.pe, p.slot), n)
        if other != n:
            yield Violation(COLLISION, f"nodes {other} and {n} share PE {p.pe} slot {p.slot}")


def _routes_by_edge(mapping: Mapping, dfg: Dfg) -> tuple[dict[DfgEdge, Route], list[Violation]]:
    found: dict[DfgEdge, Route] = {}
    problems = []
    for r in mapping.routes:
        if r.edge not in dfg.edges:
            problems.append(Violation(ROUTE, f"route for unknown dependency {r.edge}"))
        elif r.edge in found:
            problems.append(Violation(ROUTE, f"dependency {r.edge} routed twice"))
        else:
            found[r.edge] = r
    for e in dfg.edges:
        r = found.get(e)
        if r is None:
            problems.append(Violation(ROUTE, f"dependency {e} is not routed"))
            continue
        if r.kind not in ROUTE_KINDS:
            problems.append(Violation(ROUTE, f"dependency {e} has unknown route kind {r.kind!r}"))
        if r.src != mapping.placement.get(e.src) or r.dst != mapping.placement.get(e.dst):
            problems.append(Violation(ROUTE, f"route endpoints of {e} differ from placements"))
        elif r.kind == REGISTER_FILE and r.src.pe != r.dst.pe:
            problems.append(
                Violation(ROUTE, f"dependency {e} uses the register file across PEs {r.src.pe}->{r.dst.pe}")
            )
    return found, problems


def _check_routes(
    mapping: Mapping, dfg: Dfg, arch: CgraArch, routes: dict[DfgEdge, Route]
) -> Iterator[Violation]:
    ii = mapping.ii
    place = mapping.placement
    for e in dfg.edges:
        if e.src not in place or e.dst not in place:
            continue
        s, d = place[e.src], place[e.dst]
        if not (0 <= s.pe < arch.num_pes and 0 <= d.pe < arch.num_pes):
            continue
        if d.pe not in neighbors(arch, s.pe):
            yield Violation(ADJACENCY, f"dependency {e}: PE {d.pe} is not adjacent to PE {s.pe}")
        gap = lag(e, s, d, ii)
        if not 1 <= gap <= ii:
            yield Violation(TIMING, f"dependency {e}: lag {gap} outside [1, {ii}]")
        r = routes.get(e)
        if r is not None and r.kind == OUTPUT_REGISTER and 1 <= gap <= ii:
            clobber = overwriters(e, s, d, place, ii)
            if clobber:
                yield Violation(
                    OVERWRITE,
                    f"dependency {e}: output of PE {s.pe} overwritten by node(s) {clobber}",
                )


def _simulate(
    mapping: Mapping, dfg: Dfg, routes: dict[DfgEdge, Route], regs: dict[int, int], extra: int = 3
) -> Iterator[Violation]:
    """Execute several overlapped iterations and check every consumed value."""
    ii = mapping.ii
    place = mapping.placement
    iterations = 1 + max(p.iter for p in place.values()) + extra
    pe_events: dict[int, list[tuple[int, int, int]]] = {}
    reg_writes: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for k in range(iterations):
        for n, p in place.items():
            t = p.time(ii) + k * ii
            pe_events.setdefault(p.pe, []).append((t, n, k))
            if n in regs:
                reg_writes.setdefault((p.pe, regs[n]), []).append((t, n, k))
    for seq in (*pe_events.values(), *reg_writes.values()):
        seq.sort()

    def latest_before(seq: list[tuple[int, int, int]], t: int) -> tuple[int, int] | None:
        i = bisect_left(seq, (t, -1, -1))
        return seq[i - 1][1:] if i else None

    for e, r in routes.items():
        s, d = place[e.src], place[e.dst]
        for k in range(e.distance, iterations):
            t = d.time(ii) + k * ii
            want = (e.src, k - e.distance)
            if r.kind == OUTPUT_REGISTER:
                got = latest_before(pe_events[s.pe], t)
                where = f"output register of PE {s.pe}"
            else:
                if e.src not in regs:
                    yield Violation(SIMULATION, f"value {e.src} has no register assigned")
                    break
                got = latest_before(reg_writes[(s.pe, regs[e.src])], t)
                where = f"register r{regs[e.src]} of PE {s.pe}"
            if got != want:
                yield Violation(
                    SIMULATION,
                    f"dependency {e}: iteration {k} reads {where} at cycle {t}"
                    f" holding {got}, expected {want}",
                )
                break


def validate_mapping(mapping: Mapping, dfg: Dfg, arch: CgraArch, ii: int | None = None) -> list[Violation]:
    """All legality violations of ``mapping``; an empty list means the mapping is legal."""
    if ii is not None and ii != mapping.ii:
        return [Violation(PLACEMENT, f"mapping is for II={mapping.ii}, expected {ii}")]
    out = list(_check_placements(mapping, dfg, arch))
    out.extend(_check_collisions(mapping))
    routes, route_problems = _routes_by_edge(mapping, dfg)
    out.extend(route_problems)
    out.extend(_check_routes(mapping, dfg, arch, routes))
    if out:
        return out

    regs = allocate(mapping, arch.regs_per_pe)
    if isinstance(regs, ColoringFailure):
        return [Violation(REGISTERS, str(regs))]
    if mapping.registers:
        bad = [n for n, reg in mapping.registers.items() if not 0 <= reg < arch.regs_per_pe]
        if bad:
            return [Violation(REGISTERS, f"register index out of range for value(s) {bad}")]
        regs = mapping.registers
    return list(_simulate(mapping, dfg, routes, regs))


class OracleRefused(ValueError):
    pass


def brute_force_map(dfg: Dfg, arch: CgraArch, ii: int, limit: int = 5) -> Mapping | None:
    """Lexicographically first legal mapping at ``ii`` by exhaustive search, or None."""
    if len(dfg.nodes) > limit or arch.num_pes > 4 or ii > 4:
        raise OracleRefused(
            f"instance too large for exhaustive search ({len(dfg.nodes)} nodes,"
            f" {arch.num_pes} PEs, II={ii})"
        )
    windows = time_windows(dfg, ii)
    order = dfg.node_ids
    choices = {
        n: sorted(
            Placement(pe, t % ii, t // ii)
            for pe in arch.admissible_pes(dfg.node(n))
            for t in range(windows[n][0], windows[n][1] + 1)
        )
        for n in order
    }
    # dependencies checkable once both endpoints are placed
    ready: dict[int, list[DfgEdge]] = {n: [] for n in order}
    pos = {n: i for i, n in enumerate(order)}
    for e in dfg.edges:
        ready[max(e.src, e.dst, key=pos.__getitem__)].append(e)

    place: dict[int, Placement] = {}
    used: set[tuple[int, int]] = set()

    def routes_for(full: dict[int, Placement]) -> Iterator[list[Route]]:
        options = []
        for e in dfg.edges:
            s, d = full[e.src], full[e.dst]
            kinds = []
            for kind in ROUTE_KINDS:
                if kind == REGISTER_FILE and s.pe != d.pe:
                    continue
                if kind == OUTPUT_REGISTER and overwriters(e, s, d, full, ii):
                    continue
                kinds.append(Route(e, kind, s, d))
            options.append(kinds)
        for combo in product(*options):
            yield list(combo)

    def search(i: int) -> Mapping | None:
        if i == len(order):
            for routes in routes_for(place):
                cand = Mapping(ii, dict(place), routes)
                if not validate_mapping(cand, dfg, arch):
                    return cand
            return None
        n = order[i]
        for p in choices[n]:
            if (p.pe, p.slot) in used:
                continue
            place[n] = p
            if all(
                place[e.dst].pe in neighbors(arch, place[e.src].pe)
                and 1 <= lag(e, place[e.src], place[e.dst], ii) <= ii
                for e in ready[n]
            ):
                used.add((p.pe, p.slot))
                found = search(i + 1)
                used.discard((p.pe, p.slot))
                if found is not None:
                    return found
            del place[n]
        return None

    return search(0)
