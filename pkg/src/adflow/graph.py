"""Typed-graph model of an algorithmic-design definition.

A definition is a vertex-labelled directed acyclic graph typed over a fixed
type graph: component vertices, their input/output ports, and edges whose
endpoint types must form an allowed pair. Port-to-owning-component edges are
created when a component is instantiated and are never user-editable
("structural" edges). Groups are a visual aid only and never affect
evaluation.
"""
from __future__ import annotations

import uuid
from collections import deque
from dataclasses import dataclass
from enum import Enum
from heapq import heappush, heappop

from .errors import (
    CycleDetected,
    CycleWouldForm,
    DuplicateEdge,
    GraphError,
    InvalidGroupMember,
    NoSuchEdge,
    NoSuchGroup,
    NoSuchVertex,
    PortNotRemovable,
    StructuralEdgeForbidden,
    TypeRuleViolation,
)

VertexId = str

IO_COMPONENT = "IOComponent"
INPUT_PORT = "InputPort"
OUTPUT_PORT = "OutputPort"
P_COMPONENT = "PComponent"


@dataclass(frozen=True)
class TypeGraph:
    """The digraph of vertex types that constrains every definition."""
    type_vertices: frozenset[str]
    type_edges: frozenset[tuple[str, str]]


TYPE_GRAPH = TypeGraph(
    type_vertices=frozenset({IO_COMPONENT, INPUT_PORT, OUTPUT_PORT, P_COMPONENT}),
    type_edges=frozenset({
        (INPUT_PORT, IO_COMPONENT),
        (IO_COMPONENT, OUTPUT_PORT),
        (OUTPUT_PORT, P_COMPONENT),
        (P_COMPONENT, INPUT_PORT),
        (OUTPUT_PORT, INPUT_PORT),
        (P_COMPONENT, P_COMPONENT),
    }),
)


class VertexKind(Enum):
    IO_COMPONENT = "IOComponent"
    INPUT_PORT = "InputPort"
    OUTPUT_PORT = "OutputPort"
    PRIMITIVE = "PrimitiveComponent"
    GENERIC_PRIMITIVE = "GenericPrimitive"
    GROUP = "Group"


_VTYPE = {
    VertexKind.IO_COMPONENT: IO_COMPONENT,
    VertexKind.INPUT_PORT: INPUT_PORT,
    VertexKind.OUTPUT_PORT: OUTPUT_PORT,
    VertexKind.PRIMITIVE: P_COMPONENT,
    VertexKind.GENERIC_PRIMITIVE: P_COMPONENT,
}


def vtype(kind: VertexKind) -> str:
    """Map a vertex kind onto its type-graph vertex."""
    try:
        return _VTYPE[kind]
    except KeyError:
        raise TypeRuleViolation(f"kind {kind.value} has no graph type")


@dataclass
class Vertex:
    id: VertexId
    label: str
    kind: VertexKind
    type_name: str
    position: tuple[float, float] = (0.0, 0.0)
    owner: VertexId | None = None  # set on ports only
    payload: object = None

    @property
    def is_port(self) -> bool:
        return self.kind in (VertexKind.INPUT_PORT, VertexKind.OUTPUT_PORT)


@dataclass
class Group:
    id: str
    name: str
    color: tuple[int, int, int, int]
    member_ids: list[VertexId]


@dataclass
class _EdgeRec:
    structural: bool
    seq: int


def new_id() -> VertexId:
    return str(uuid.uuid4())


class TypedGraph:
    """Mutable definition graph; edit operations keep every invariant."""

    def __init__(self):
        self.vertices: dict[VertexId, Vertex] = {}
        self.groups: list[Group] = []
        self.attachments: list[bytes] = []  # unrecognised document chunks
        self._edges: dict[tuple[VertexId, VertexId], _EdgeRec] = {}
        self._seq = 0

    # -- edge views ------------------------------------------------------

    @property
    def edges(self) -> set[tuple[VertexId, VertexId]]:
        return set(self._edges)

    @property
    def structural_edges(self) -> set[tuple[VertexId, VertexId]]:
        return {e for e, rec in self._edges.items() if rec.structural}

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        return (u, v) in self._edges

    def is_structural(self, u: VertexId, v: VertexId) -> bool:
        rec = self._edges.get((u, v))
        return rec is not None and rec.structural

    def in_edges(self, v: VertexId) -> list[tuple[VertexId, VertexId]]:
        """Incoming edges ordered by insertion; order feeds input merging."""
        found = [(rec.seq, e) for e, rec in self._edges.items() if e[1] == v]
        return [e for _, e in sorted(found)]

    def out_edges(self, u: VertexId) -> list[tuple[VertexId, VertexId]]:
        found = [(rec.seq, e) for e, rec in self._edges.items() if e[0] == u]
        return [e for _, e in sorted(found)]

    # -- construction helpers -------------------------------------------

    def _require(self, vid: VertexId) -> Vertex:
        try:
            return self.vertices[vid]
        except KeyError:
            raise NoSuchVertex(f"no vertex {vid}")

    def _insert_vertex(self, vertex: Vertex) -> None:
        if vertex.id in self.vertices:
            raise GraphError(f"vertex id {vertex.id} already present")
        self.vertices[vertex.id] = vertex

    def _insert_edge(self, u: VertexId, v: VertexId, structural: bool) -> None:
        self._edges[(u, v)] = _EdgeRec(structural, self._seq)
        self._seq += 1

    def add_component(self, type_name: str, label: str,
                      position: tuple[float, float],
                      vertex_id: VertexId | None = None) -> VertexId:
        """Instantiate a registry component plus its declared ports.

        Returns the new component's id. Raises UnknownComponentType for a
        registry miss.
        """
        from . import registry  # deferred: registry builds payloads

        spec = registry.lookup_component_kind(type_name)
        cid = vertex_id or new_id()
        component = Vertex(
            id=cid, label=label, kind=spec.kind, type_name=spec.type_name,
            position=(float(position[0]), float(position[1])),
            payload=spec.default_payload(cid, label),
        )
        self._insert_vertex(component)
        for port_name in spec.inputs:
            pid = new_id()
            self._insert_vertex(Vertex(
                id=pid, label=port_name, kind=VertexKind.INPUT_PORT,
                type_name=port_name, position=component.position, owner=cid))
            self._insert_edge(pid, cid, structural=True)
        for port_name in spec.outputs:
            pid = new_id()
            self._insert_vertex(Vertex(
                id=pid, label=port_name, kind=VertexKind.OUTPUT_PORT,
                type_name=port_name, position=component.position, owner=cid))
            self._insert_edge(cid, pid, structural=True)
        return cid

    # -- user edits ------------------------------------------------------

    def add_link(self, u: VertexId, v: VertexId) -> None:
        """Add a user edge u -> v if typed, non-structural and acyclic."""
        a, b = self._require(u), self._require(v)
        if (a.is_port and a.owner == v) or (b.is_port and b.owner == u):
            raise StructuralEdgeForbidden(
                "links between a port and its component are fixed")
        pair = (vtype(a.kind), vtype(b.kind))
        if pair not in TYPE_GRAPH.type_edges:
            raise TypeRuleViolation(f"edge type {pair[0]} -> {pair[1]} not allowed")
        if (u, v) in self._edges:
            raise DuplicateEdge(f"edge {u} -> {v} already present")
        if u == v or self._reachable(v, u):
            raise CycleWouldForm(f"edge {u} -> {v} would close a cycle")
        self._insert_edge(u, v, structural=False)

    def remove_link(self, u: VertexId, v: VertexId) -> None:
        rec = self._edges.get((u, v))
        if rec is None:
            raise NoSuchEdge(f"no edge {u} -> {v}")
        if rec.structural:
            raise StructuralEdgeForbidden(
                "port/component links cannot be removed")
        del self._edges[(u, v)]

    def remove_component(self, vid: VertexId) -> None:
        vertex = self._require(vid)
        if vertex.is_port:
            raise PortNotRemovable("ports are removed with their component")
        doomed = {vid} | {p.id for p in self.ports_of(vid)}
        for dead in doomed:
            del self.vertices[dead]
        self._edges = {
            e: rec for e, rec in self._edges.items()
            if e[0] not in doomed and e[1] not in doomed
        }
        survivors = []
        for group in self.groups:
            group.member_ids = [m for m in group.member_ids if m not in doomed]
            if group.member_ids:
                survivors.append(group)
        self.groups = survivors

    def move_component(self, vid: VertexId, position: tuple[float, float]) -> None:
        vertex = self._require(vid)
        if vertex.is_port:
            raise PortNotRemovable("ports move with their component")
        vertex.position = (float(position[0]), float(position[1]))
        for port in self.ports_of(vid):
            port.position = vertex.position

    # -- queries ---------------------------------------------------------

    def ports_of(self, cid: VertexId) -> list[Vertex]:
        """Ports owned by a component, in declaration order."""
        return [v for v in self.vertices.values() if v.owner == cid]

    def input_ports(self, cid: VertexId) -> list[Vertex]:
        return [p for p in self.ports_of(cid) if p.kind is VertexKind.INPUT_PORT]

    def output_ports(self, cid: VertexId) -> list[Vertex]:
        return [p for p in self.ports_of(cid) if p.kind is VertexKind.OUTPUT_PORT]

    def port_by_name(self, cid: VertexId, name: str) -> Vertex:
        for port in self.ports_of(cid):
            if port.label == name:
                return port
        raise NoSuchVertex(f"component {cid} has no port {name!r}")

    def components(self) -> list[Vertex]:
        return [v for v in self.vertices.values() if not v.is_port]

    def _reachable(self, start: VertexId, goal: VertexId) -> bool:
        """Depth-first reachability over all edges, structural included."""
        stack, seen = [start], set()
        succ: dict[VertexId, list[VertexId]] = {}
        for (u, v) in self._edges:
            succ.setdefault(u, []).append(v)
        while stack:
            node = stack.pop()
            if node == goal:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(succ.get(node, ()))
        return False

    def topological_order(self) -> list[VertexId]:
        """Kahn's algorithm with id-ordered tie-breaking (deterministic)."""
        indeg = {vid: 0 for vid in self.vertices}
        succ: dict[VertexId, list[VertexId]] = {vid: [] for vid in self.vertices}
        for (u, v) in self._edges:
            indeg[v] += 1
            succ[u].append(v)
        heap: list[VertexId] = []
        for vid, d in indeg.items():
            if d == 0:
                heappush(heap, vid)
        order = []
        while heap:
            vid = heappop(heap)
            order.append(vid)
            for nxt in succ[vid]:
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    heappush(heap, nxt)
        if len(order) != len(self.vertices):
            raise CycleDetected("graph contains a cycle")
        return order

    def depth(self, vid: VertexId) -> int:
        """Minimum edge count from any vertex without incoming edges."""
        self._require(vid)
        indeg = {v: 0 for v in self.vertices}
        succ: dict[VertexId, list[VertexId]] = {v: [] for v in self.vertices}
        for (u, v) in self._edges:
            indeg[v] += 1
            succ[u].append(v)
        frontier = deque((v, 0) for v, d in indeg.items() if d == 0)
        dist: dict[VertexId, int] = {}
        while frontier:
            node, d = frontier.popleft()
            if node in dist:
                continue
            dist[node] = d
            if node == vid:
                return d
            for nxt in succ[node]:
                if nxt not in dist:
                    frontier.append((nxt, d + 1))
        raise CycleDetected(f"vertex {vid} unreachable from any source")

    # -- groups ----------------------------------------------------------

    def create_group(self, member_ids, name: str,
                     color: tuple[int, int, int, int] = (200, 200, 200, 255),
                     group_id: str | None = None) -> str:
        members = list(member_ids)
        if not members:
            raise InvalidGroupMember("a group needs at least one member")
        for mid in members:
            vertex = self._require(mid)
            if vertex.is_port:
                raise InvalidGroupMember("ports cannot be grouped")
        gid = group_id or new_id()
        self.groups.append(Group(id=gid, name=name,
                                 color=tuple(int(c) & 0xFF for c in color),
                                 member_ids=members))
        return gid

    def dissolve_group(self, gid: str) -> None:
        for i, group in enumerate(self.groups):
            if group.id == gid:
                del self.groups[i]
                return
        raise NoSuchGroup(f"no group {gid}")

    # -- validation ------------------------------------------------------

    def validate(self) -> list[str]:
        """Re-check every structural invariant; empty list means valid."""
        issues = []
        for vid, vertex in self.vertices.items():
            if vertex.id != vid:
                issues.append(f"identity: vertex keyed {vid} carries id {vertex.id}")
            if not isinstance(vertex.label, str):
                issues.append(f"label: vertex {vid} has no label")
            if vertex.kind not in _VTYPE:
                issues.append(f"kind: vertex {vid} has non-graph kind {vertex.kind}")
                continue
            if vertex.is_port != (vertex.owner is not None):
                issues.append(f"ownership: vertex {vid} port/owner mismatch")
            if vertex.owner is not None and vertex.owner not in self.vertices:
                issues.append(f"ownership: vertex {vid} owned by missing {vertex.owner}")
        structural_touch: dict[VertexId, int] = {}
        for (u, v), rec in self._edges.items():
            if u not in self.vertices or v not in self.vertices:
                issues.append(f"edge: dangling endpoint on {u} -> {v}")
                continue
            pair = (vtype(self.vertices[u].kind), vtype(self.vertices[v].kind))
            if pair not in TYPE_GRAPH.type_edges:
                issues.append(f"type-rule: edge {u} -> {v} typed {pair}")
            if rec.structural:
                a, b = self.vertices[u], self.vertices[v]
                port_to_owner = a.is_port and a.owner == v
                owner_to_port = b.is_port and b.owner == u
                if not (port_to_owner or owner_to_port):
                    issues.append(f"structural: edge {u} -> {v} links no port/owner pair")
                for end in (u, v):
                    if self.vertices[end].is_port:
                        structural_touch[end] = structural_touch.get(end, 0) + 1
        for vid, vertex in self.vertices.items():
            if not vertex.is_port:
                continue
            if vertex.kind is VertexKind.INPUT_PORT:
                expected = (vid, vertex.owner)
            else:
                expected = (vertex.owner, vid)
            rec = self._edges.get(expected)
            if rec is None or not rec.structural:
                issues.append(f"structural: port {vid} misses its owner edge")
            elif structural_touch.get(vid, 0) != 1:
                issues.append(
                    f"structural: port {vid} has {structural_touch.get(vid, 0)}"
                    " structural edges")
        try:
            self.topological_order()
        except CycleDetected:
            issues.append("acyclicity: graph contains a cycle")
        for group in self.groups:
            if not group.member_ids:
                issues.append(f"group: {group.id} is empty")
            for mid in group.member_ids:
                member = self.vertices.get(mid)
                if member is None:
                    issues.append(f"group: {group.id} references missing {mid}")
                elif member.is_port:
                    issues.append(f"group: {group.id} contains port {mid}")
        return issues

    # -- misc --------------------------------------------------------------

    def copy(self) -> "TypedGraph":
        import copy as _copy

        clone = TypedGraph()
        clone.vertices = {vid: _copy.deepcopy(v) for vid, v in self.vertices.items()}
        clone.groups = _copy.deepcopy(self.groups)
        clone.attachments = list(self.attachments)
        clone._edges = {e: _EdgeRec(rec.structural, rec.seq)
                        for e, rec in self._edges.items()}
        clone._seq = self._seq
        return clone

    def _add_edge_unchecked(self, u: VertexId, v: VertexId,
                            structural: bool = False) -> None:
        # test/parser backdoor: no validity checks
        self._insert_edge(u, v, structural)
