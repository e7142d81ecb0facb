import random
from itertools import combinations, product

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgramap.model import Dfg
from cgramap.schedule import (
    ScheduleError,
    build_kms,
    compute_alap,
    compute_asap,
    compute_mii,
    critical_path_length,
    kms_for_ii,
    mobility_schedule,
    rec_mii,
    res_mii,
)

from oracles import longest_paths

RUNNING_ASAP = {1: 0, 2: 0, 3: 0, 4: 0, 5: 1, 7: 1, 10: 1, 6: 2, 11: 2, 8: 3, 9: 4}
RUNNING_ALAP = {3: 0, 4: 1, 5: 1, 1: 2, 6: 2, 7: 2, 2: 3, 8: 3, 10: 3, 9: 4, 11: 4}
RUNNING_MS = [[1, 2, 3, 4], [1, 2, 4, 5, 7, 10], [1, 2, 6, 7, 10, 11], [2, 8, 10, 11], [9, 11]]


def test_running_example_asap(running):
    assert compute_asap(running) == RUNNING_ASAP


def test_running_example_alap(running):
    assert compute_alap(running, 5) == RUNNING_ALAP


def test_running_example_mobility_rows(running):
    ms = mobility_schedule(running)
    assert ms.length == 5
    assert ms.rows() == RUNNING_MS


def test_single_node():
    dfg = Dfg.build([7], [])
    assert compute_asap(dfg) == {7: 0}
    assert compute_alap(dfg, 1) == {7: 0}
    assert mobility_schedule(dfg).rows() == [[7]]


def test_chain():
    dfg = Dfg.build([0, 1, 2], [(0, 1), (1, 2)])
    assert compute_asap(dfg) == {0: 0, 1: 1, 2: 2}
    two = Dfg.build([0, 1], [(0, 1)])
    assert compute_alap(two, 3) == {0: 1, 1: 2}


def test_alap_rejects_short_length(running):
    with pytest.raises(ScheduleError):
        compute_alap(running, 4)


def test_diamond_has_zero_mobility():
    dfg = Dfg.build([0, 1, 2, 3], [(0, 1), (0, 2), (1, 3), (2, 3)])
    ms = mobility_schedule(dfg)
    assert ms.rows() == [[0], [1, 2], [3]]
    assert ms.mobility(1) == ms.mobility(2) == 0


def test_back_edges_do_not_constrain_asap():
    fwd = Dfg.build([0, 1, 2], [(0, 1), (1, 2)])
    loop = Dfg.build([0, 1, 2], [(0, 1), (1, 2), (2, 0, 1)])
    assert compute_asap(fwd) == compute_asap(loop)
    assert compute_alap(fwd, 3) == compute_alap(loop, 3)


def _all_dags(n):
    pairs = list(combinations(range(n), 2))
    for mask in product((0, 1), repeat=len(pairs)):
        yield Dfg.build(range(n), [p for p, on in zip(pairs, mask) if on])


def _check_against_paths(dfg):
    into, out_of = longest_paths(dfg)
    length = critical_path_length(dfg)
    assert compute_asap(dfg) == into
    assert compute_alap(dfg, length) == {n: length - 1 - out_of[n] for n in dfg.node_ids}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_asap_alap_match_path_enumeration_exhaustively(n):
    for dfg in _all_dags(n):
        _check_against_paths(dfg)


@st.composite
def dags(draw, max_nodes=8):
    n = draw(st.integers(1, max_nodes))
    pairs = list(combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Dfg.build(range(n), [p for p, on in zip(pairs, mask) if on])


@given(dags())
@settings(max_examples=300)
def test_asap_alap_match_path_enumeration_up_to_eight_nodes(dfg):
    _check_against_paths(dfg)


@given(dags(), st.integers(0, 4))
def test_mobility_invariants(dfg, slack):
    ms = mobility_schedule(dfg, critical_path_length(dfg) + slack)
    rows = ms.rows()
    assert sum(len(r) for r in rows) == sum(ms.alap[n] - ms.asap[n] + 1 for n in dfg.node_ids)
    for e in dfg.edges:
        assert ms.asap[e.dst] >= ms.asap[e.src] + 1
        assert ms.alap[e.src] <= ms.alap[e.dst] - 1
    _, out_of = longest_paths(dfg)
    into, _ = longest_paths(dfg)
    for n in dfg.node_ids:
        assert ms.mobility(n) >= 0
        if slack == 0 and into[n] + out_of[n] + 1 == ms.length:
            assert ms.mobility(n) == 0


def test_res_mii_running_example(running, mesh2):
    # pigeonhole: 11 nodes cannot fit into 4 PEs x 2 slots
    assert 11 > 4 * 2
    assert res_mii(running, mesh2) == 3
    assert compute_mii(running, mesh2) == 3


def test_rec_mii_acyclic(running):
    assert rec_mii(running) == 1


def test_rec_mii_four_cycle():
    dfg = Dfg.build([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3), (3, 0, 1)])
    assert rec_mii(dfg) == 4


def _rec_mii_by_cycles(dfg):
    g = nx.MultiDiGraph()
    g.add_nodes_from(dfg.node_ids)
    for e in dfg.edges:
        g.add_edge(e.src, e.dst, distance=e.distance)
    best = 1
    for cycle in nx.simple_cycles(nx.DiGraph(g)):
        # with parallel edges, the largest distance between consecutive nodes gives the loosest bound
        hops = list(zip(cycle, cycle[1:] + cycle[:1]))
        dist = sum(max(d["distance"] for d in g.get_edge_data(u, v).values()) for u, v in hops)
        best = max(best, -(-len(cycle) // dist))
    return best


def test_rec_mii_matches_cycle_enumeration():
    rng = random.Random(11)
    for _ in range(300):
        n = rng.randint(1, 6)
        edges = {(a, b, 0) for a, b in combinations(range(n), 2) if rng.random() < 0.4}
        edges |= {(a, b, 1) for a in range(n) for b in range(n) if a >= b and rng.random() < 0.25}
        dfg = Dfg.build(range(n), sorted(edges))
        assert rec_mii(dfg) == _rec_mii_by_cycles(dfg), dfg


def test_kms_running_example_ii3(running):
    kms = build_kms(mobility_schedule(running), 3)
    assert kms.folds == 2
    assert kms.occ[9] == ((1, 1),)
    assert kms.occ[3] == ((0, 0),)


def test_kms_without_folding(running):
    ms = mobility_schedule(running)
    for ii in (5, 6, 9):
        kms = build_kms(ms, ii)
        assert kms.folds == 1
        for n in running.node_ids:
            assert kms.occ[n] == tuple((c, 0) for c in range(ms.asap[n], ms.alap[n] + 1))


@given(dags(), st.integers(1, 6), st.integers(0, 3))
def test_folding_preserves_occurrences(dfg, ii, slack):
    ms = mobility_schedule(dfg, critical_path_length(dfg) + slack)
    kms = build_kms(ms, ii)
    for n in dfg.node_ids:
        occ = kms.occ[n]
        assert len(set(occ)) == len(occ) == ms.alap[n] - ms.asap[n] + 1
        for slot, it in occ:
            assert 0 <= slot < ii and 0 <= it < kms.folds
            assert ms.asap[n] <= slot + it * ii <= ms.alap[n]


def test_kms_for_ii_stretches_short_schedules():
    pair = Dfg.build([0, 1], [])
    assert kms_for_ii(pair, 1).occ == {0: ((0, 0),), 1: ((0, 0),)}
    assert kms_for_ii(pair, 2).occ == {0: ((0, 0), (1, 0)), 1: ((0, 0), (1, 0))}


def test_kms_for_ii_keeps_twofold_running_example(running):
    assert kms_for_ii(running, 3) == build_kms(mobility_schedule(running), 3)
