"""Core graph model: edit operations, invariants, depth and ordering."""
import random

import pytest

from adflow import errors
from adflow.fixtures import build_spiral_graph
from adflow.graph import TYPE_GRAPH, TypedGraph, VertexKind, vtype

from helpers import graphs_isomorphic, random_definition


def test_type_graph_matches_fixed_example():
    assert TYPE_GRAPH.type_vertices == {
        "IOComponent", "InputPort", "OutputPort", "PComponent"}
    assert TYPE_GRAPH.type_edges == {
        ("InputPort", "IOComponent"), ("IOComponent", "OutputPort"),
        ("OutputPort", "PComponent"), ("PComponent", "InputPort"),
        ("OutputPort", "InputPort"), ("PComponent", "PComponent")}


def test_add_slider_has_no_ports():
    g = TypedGraph()
    cid = g.add_component("NumberSlider", "A", (0, 0))
    vertex = g.vertices[cid]
    assert vertex.kind is VertexKind.PRIMITIVE
    assert g.ports_of(cid) == []


def test_add_range_declares_ports():
    g = TypedGraph()
    cid = g.add_component("Range", "rng", (10, 0))
    assert [p.label for p in g.input_ports(cid)] == ["Domain", "Steps"]
    assert [p.label for p in g.output_ports(cid)] == ["Range"]
    assert g.vertices[cid].kind is VertexKind.IO_COMPONENT


def test_add_unknown_component_rejected():
    g = TypedGraph()
    with pytest.raises(errors.UnknownComponentType):
        g.add_component("Bogus", "x", (0, 0))


def test_add_link_output_to_input():
    g = TypedGraph()
    rng = g.add_component("Range", "r", (0, 0))
    ev = g.add_component("Evaluate", "e", (10, 0))
    g.add_link(g.port_by_name(rng, "Range").id, g.port_by_name(ev, "t").id)
    assert (g.port_by_name(rng, "Range").id, g.port_by_name(ev, "t").id) in g.edges


def test_add_link_structural_pair_rejected():
    g = TypedGraph()
    rng = g.add_component("Range", "r", (0, 0))
    port = g.port_by_name(rng, "Domain")
    with pytest.raises(errors.StructuralEdgeForbidden):
        g.add_link(port.id, rng)


def test_add_link_type_rule():
    g = TypedGraph()
    a = g.add_component("Range", "a", (0, 0))
    b = g.add_component("Range", "b", (10, 0))
    # input port of one component to input port of another: not in TE
    with pytest.raises(errors.TypeRuleViolation):
        g.add_link(g.port_by_name(a, "Domain").id, g.port_by_name(b, "Domain").id)


def test_add_link_cycle_rejected():
    g = TypedGraph()
    s = g.add_component("NumberSlider", "s", (0, 0))
    ev = g.add_component("Evaluate", "e", (10, 0))
    g.add_link(s, g.port_by_name(ev, "t").id)
    # closing a path back to an ancestor via the output port is a cycle
    with pytest.raises(errors.CycleWouldForm):
        g.add_link(g.port_by_name(ev, "Result").id, s)


def test_add_link_duplicate_rejected():
    g = TypedGraph()
    s = g.add_component("NumberSlider", "s", (0, 0))
    ev = g.add_component("Evaluate", "e", (10, 0))
    g.add_link(s, g.port_by_name(ev, "t").id)
    with pytest.raises(errors.DuplicateEdge):
        g.add_link(s, g.port_by_name(ev, "t").id)


def test_remove_link_roundtrip():
    g = TypedGraph()
    s = g.add_component("NumberSlider", "s", (0, 0))
    ev = g.add_component("Evaluate", "e", (10, 0))
    before = g.edges
    g.add_link(s, g.port_by_name(ev, "t").id)
    g.remove_link(s, g.port_by_name(ev, "t").id)
    assert g.edges == before


def test_remove_structural_link_rejected():
    g = TypedGraph()
    rng = g.add_component("Range", "r", (0, 0))
    out = g.port_by_name(rng, "Range")
    with pytest.raises(errors.StructuralEdgeForbidden):
        g.remove_link(rng, out.id)


def test_remove_absent_link():
    g = TypedGraph()
    a = g.add_component("NumberSlider", "a", (0, 0))
    b = g.add_component("Panel", "b", (0, 0))
    with pytest.raises(errors.NoSuchEdge):
        g.remove_link(a, b)


def test_remove_component_in_spiral_keeps_graph_valid():
    g = build_spiral_graph()
    rng = next(c.id for c in g.components() if c.type_name == "Range")
    g.remove_component(rng)
    assert g.validate() == []
    assert all(rng not in e for e in g.edges)


def test_remove_port_rejected():
    g = TypedGraph()
    rng = g.add_component("Range", "r", (0, 0))
    with pytest.raises(errors.PortNotRemovable):
        g.remove_component(g.port_by_name(rng, "Steps").id)


def test_remove_unknown_vertex():
    g = TypedGraph()
    with pytest.raises(errors.NoSuchVertex):
        g.remove_component("nope")


def test_remove_component_prunes_groups():
    g = TypedGraph()
    a = g.add_component("NumberSlider", "a", (0, 0))
    b = g.add_component("NumberSlider", "b", (0, 0))
    gid = g.create_group([a], "solo")
    g.create_group([a, b], "both")
    g.remove_component(a)
    assert [grp.member_ids for grp in g.groups] == [[b]]
    assert all(grp.id != gid for grp in g.groups)


def test_move_component():
    g = TypedGraph()
    cid = g.add_component("NumberSlider", "a", (0, 0))
    g.move_component(cid, (5, 5))
    assert g.vertices[cid].position == (5.0, 5.0)
    with pytest.raises(errors.PortNotRemovable):
        rng = g.add_component("Range", "r", (0, 0))
        g.move_component(g.port_by_name(rng, "Domain").id, (1, 1))


def test_topological_order_chain_and_diamond():
    g = TypedGraph()
    a = g.add_component("NumberSlider", "a", (0, 0))
    b = g.add_component("Panel", "b", (0, 0))
    c = g.add_component("Panel", "c", (0, 0))
    d = g.add_component("Panel", "d", (0, 0))
    g.add_link(a, b)
    g.add_link(a, c)
    g.add_link(b, d)
    g.add_link(c, d)
    order = g.topological_order()
    index = {vid: i for i, vid in enumerate(order)}
    for (u, v) in g.edges:
        assert index[u] < index[v]


def test_topological_order_detects_injected_cycle():
    g = TypedGraph()
    a = g.add_component("Panel", "a", (0, 0))
    b = g.add_component("Panel", "b", (0, 0))
    g.add_link(a, b)
    g._add_edge_unchecked(b, a)
    with pytest.raises(errors.CycleDetected):
        g.topological_order()


def test_depth_chain_and_shortcut():
    g = TypedGraph()
    a = g.add_component("NumberSlider", "a", (0, 0))
    b = g.add_component("Panel", "b", (0, 0))
    c = g.add_component("Panel", "c", (0, 0))
    d = g.add_component("Panel", "d", (0, 0))
    g.add_link(a, b)
    g.add_link(b, c)
    g.add_link(c, d)   # three-edge path a-b-c-d
    g.add_link(a, d)   # one-edge shortcut
    assert g.depth(a) == 0
    assert g.depth(c) == 2
    assert g.depth(d) == 1


def _bfs_depth_oracle(graph: TypedGraph, target: str) -> int:
    from collections import deque

    indeg = {v: 0 for v in graph.vertices}
    for (_, v) in graph.edges:
        indeg[v] += 1
    frontier = deque((v, 0) for v, d in sorted(indeg.items()) if d == 0)
    seen = set()
    while frontier:
        node, d = frontier.popleft()
        if node == target:
            return d
        if node in seen:
            continue
        seen.add(node)
        for (u, v) in graph.edges:
            if u == node and v not in seen:
                frontier.append((v, d + 1))
    raise AssertionError("unreachable vertex")


def test_depth_matches_bfs_oracle_on_random_graphs():
    rng = random.Random(7)
    for _ in range(15):
        g = random_definition(rng, components=8)
        for vid in g.vertices:
            assert g.depth(vid) == _bfs_depth_oracle(g, vid)


def test_validate_spots_corruption():
    g = build_spiral_graph()
    assert g.validate() == []
    bad = g.copy()
    # hand-corrupt: edge between two input ports
    ports = [v.id for v in bad.vertices.values()
             if v.kind is VertexKind.INPUT_PORT]
    bad._add_edge_unchecked(ports[0], ports[1])
    assert any(v.startswith("type-rule") for v in bad.validate())

    orphan = g.copy()
    from adflow.graph import Vertex

    orphan.vertices["orphan"] = Vertex(
        id="orphan", label="p", kind=VertexKind.INPUT_PORT,
        type_name="p", owner=None)
    findings = orphan.validate()
    assert any("ownership" in v or "structural" in v for v in findings)


def test_groups_visual_only():
    g = TypedGraph()
    a = g.add_component("NumberSlider", "a", (0, 0))
    b = g.add_component("NumberSlider", "b", (0, 0))
    gid = g.create_group([a, b], "pair", (1, 2, 3, 4))
    assert g.groups[0].member_ids == [a, b]
    with pytest.raises(errors.InvalidGroupMember):
        rng = g.add_component("Range", "r", (0, 0))
        g.create_group([g.port_by_name(rng, "Domain").id], "bad")
    g.dissolve_group(gid)
    assert a in g.vertices and b in g.vertices
    with pytest.raises(errors.NoSuchGroup):
        g.dissolve_group(gid)


def test_vtype_mapping():
    assert vtype(VertexKind.PRIMITIVE) == "PComponent"
    assert vtype(VertexKind.GENERIC_PRIMITIVE) == "PComponent"
    assert vtype(VertexKind.IO_COMPONENT) == "IOComponent"
    with pytest.raises(errors.TypeRuleViolation):
        vtype(VertexKind.GROUP)


def test_random_edit_sequences_stay_valid():
    rng = random.Random(99)
    g = random_definition(rng, components=12)
    assert g.validate() == []
    ids = [c.id for c in g.components()]
    for vid in rng.sample(ids, k=4):
        g.remove_component(vid)
        assert g.validate() == []


def test_copy_is_isomorphic_and_independent():
    g = build_spiral_graph()
    clone = g.copy()
    assert graphs_isomorphic(g, clone)
    victim = next(c.id for c in clone.components())
    clone.remove_component(victim)
    assert victim in g.vertices
