import json
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cgramap.model import (
    CgraArch,
    Dfg,
    InputError,
    arch_to_dict,
    dfg_to_dict,
    neighbors,
    parse_arch,
    parse_dfg,
)


def test_parse_arch_defaults():
    arch = parse_arch('{"rows": 2, "cols": 2}')
    assert arch.num_pes == 4
    assert arch.regs_per_pe == 4
    assert arch.torus is False
    assert arch.memory_pes == frozenset()


def test_single_pe_mesh():
    arch = parse_arch({"rows": 1, "cols": 1})
    assert arch.num_pes == 1
    assert neighbors(arch, 0) == {0}


def test_three_by_three_grid():
    assert parse_arch({"rows": 3, "cols": 3}).num_pes == 9


@pytest.mark.parametrize(
    "doc",
    [
        "{not json",
        '{"rows": 0, "cols": 2}',
        '{"rows": 2, "cols": 2, "regs_per_pe": 0}',
        '{"rows": 2, "cols": 2, "memory_pes": [4]}',
        '{"rows": 2}',
        '{"rows": 2, "cols": 2, "colour": "red"}',
        '{"rows": "2", "cols": 2}',
    ],
)
def test_parse_arch_rejects(doc):
    with pytest.raises(InputError):
        parse_arch(doc)


def test_neighbors_center_of_3x3():
    assert neighbors(CgraArch(3, 3), 4) == {4, 1, 7, 3, 5}


def test_neighbors_corner_clipped():
    assert neighbors(CgraArch(2, 2), 0) == {0, 1, 2}


def test_neighbors_torus_2x2_matches_wrapped_enumeration():
    arch = CgraArch(2, 2, torus=True)
    r, c = 0, 0
    wrapped = {((r + dr) % 2) * 2 + (c + dc) % 2 for dr, dc in [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)]}
    assert wrapped == {0, 1, 2}
    assert neighbors(arch, 0) == wrapped


def test_neighbors_rejects_bad_pe():
    with pytest.raises(InputError):
        neighbors(CgraArch(2, 2), 4)


meshes = st.builds(
    CgraArch,
    rows=st.integers(1, 6),
    cols=st.integers(1, 6),
    torus=st.booleans(),
)


@given(meshes)
def test_neighbors_symmetric_and_bounded(arch):
    for p, q in product(arch.pes, repeat=2):
        assert (q in neighbors(arch, p)) == (p in neighbors(arch, q))
    for p in arch.pes:
        size = len(neighbors(arch, p))
        assert 1 <= size <= 5
        r, c = arch.coords(p)
        interior = 0 < r < arch.rows - 1 and 0 < c < arch.cols - 1
        if arch.torus and arch.rows >= 3 and arch.cols >= 3:
            assert size == 5
        elif not arch.torus and arch.rows >= 3 and arch.cols >= 3:
            assert (size == 5) == interior


def test_parse_running_example(running):
    assert len(running.nodes) == 11
    assert len(running.edges) == 9


def test_parse_single_node():
    dfg = parse_dfg('{"nodes": [{"id": 1, "opcode": "add"}], "edges": []}')
    assert dfg.node_ids == [1]
    assert dfg.node(1).opcode == "add"


def test_distance_defaults_to_zero():
    dfg = parse_dfg({"nodes": [{"id": 1, "opcode": "a"}, {"id": 2, "opcode": "b"}], "edges": [{"src": 1, "dst": 2}]})
    assert dfg.edges[0].distance == 0


@pytest.mark.parametrize(
    "nodes, edges, fragment",
    [
        ([1, 2], [(1, 2), (2, 1)], "zero-distance cycle"),
        ([1], [(1, 1)], "zero-distance cycle"),
        ([1, 1], [], "duplicate node"),
        ([1, 2], [(1, 3)], "unknown node"),
        ([1, 2], [(1, 2), (1, 2)], "duplicate edge"),
        ([1, 2], [(1, 2, 2)], "distance > 1"),
        ([], [], "no nodes"),
    ],
)
def test_parse_dfg_rejects(nodes, edges, fragment):
    doc = {
        "nodes": [{"id": n, "opcode": "op"} for n in nodes],
        "edges": [{"src": e[0], "dst": e[1], "distance": e[2] if len(e) > 2 else 0} for e in edges],
    }
    with pytest.raises(InputError, match=fragment):
        parse_dfg(json.dumps(doc))


def test_back_edge_cycle_is_accepted():
    dfg = Dfg.build([1, 2], [(1, 2, 0), (2, 1, 1)])
    assert len(dfg.edges) == 2


def test_zero_cycle_diagnostic_names_the_cycle():
    with pytest.raises(InputError, match="1 -> 2 -> 3 -> 1"):
        Dfg.build([1, 2, 3], [(1, 2), (2, 3), (3, 1)])


def test_round_trip_canonical_form(running):
    again = parse_dfg(json.dumps(dfg_to_dict(running)))
    assert dfg_to_dict(again) == dfg_to_dict(running)
    arch = CgraArch(3, 2, torus=True, regs_per_pe=2, memory_pes=frozenset({1, 4}))
    assert parse_arch(json.dumps(arch_to_dict(arch))) == arch


def test_memory_pes_restrict_admissible():
    arch = CgraArch(2, 2, memory_pes=frozenset({0, 3}))
    dfg = parse_dfg({"nodes": [{"id": 1, "opcode": "ld", "needs_memory": True}, {"id": 2, "opcode": "add"}]})
    assert arch.admissible_pes(dfg.node(1)) == [0, 3]
    assert arch.admissible_pes(dfg.node(2)) == [0, 1, 2, 3]
