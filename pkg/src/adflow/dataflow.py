"""Evaluation engine: turns a definition plus parameter values into geometry.

Values flow along user edges; each input port merges what arrives on its
incoming links (in link order), components transform their port values, and
mesh outputs with no outgoing user links are the geometry sinks. A solve
only recomputes vertices downstream of a change. Parameter updates may be
queued from any thread and are applied on the evaluating thread by
``drain``, which collapses bursts per parameter to the newest value.
"""
from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field

from .errors import EvaluationTypeMismatch
from .graph import TypedGraph, Vertex, VertexKind
from .params import ParameterDescriptor, ParameterKind
from .registry import EvaluatorError, lookup_component_kind
from .values import Value, ValueKind

log = logging.getLogger(__name__)


@dataclass
class ParameterUpdate:
    guid: str
    value: object  # bool | float | int
    timestamp: float = 0.0


@dataclass
class VertexIssue:
    vertex_id: str
    message: str


@dataclass
class EvaluationResult:
    values: dict[str, Value]
    meshes: list
    errors: list[VertexIssue] = field(default_factory=list)
    unevaluated: set[str] = field(default_factory=set)


def _merge_port_inputs(values: list[Value]) -> Value:
    """Combine multiple incoming values on one port into a single value."""
    if len(values) == 1:
        return values[0]
    kinds = {v.kind for v in values}
    if kinds <= {ValueKind.NUMBER, ValueKind.NUMBER_LIST}:
        merged: list[float] = []
        for v in values:
            merged.extend(v.as_numbers())
        return Value.number_list(merged)
    if kinds == {ValueKind.POINT_LIST}:
        points = []
        for v in values:
            points.extend(v.data)
        return Value.point_list(points)
    raise EvaluatorError(
        f"cannot merge values of kinds {sorted(k.value for k in kinds)}")


def _primitive_value(vertex: Vertex) -> Value | None:
    payload = vertex.payload
    if isinstance(payload, ParameterDescriptor):
        if payload.kind is ParameterKind.BOOLEAN_TOGGLE:
            return Value.boolean(payload.value)
        if payload.kind is ParameterKind.NUMBER_SLIDER:
            return Value.number(payload.value)
        index = int(payload.value)
        if not payload.items:
            raise EvaluatorError("list parameter has no items")
        item = payload.items[min(len(payload.items) - 1, max(0, index))]
        try:
            return Value.number(float(item))
        except ValueError:
            return Value.text(item)
    if vertex.type_name == "Panel":
        return Value.text(payload if isinstance(payload, str) else "")
    return None  # generic/opaque primitives produce nothing


class EvaluationEngine:
    """Owns a graph, a value cache, and a queue of pending updates.

    ``enqueue_update`` is safe from any thread; ``drain`` and ``solve`` must
    run on the single evaluating thread.
    """

    def __init__(self, graph: TypedGraph, coalesce_window_ms: float = 100.0,
                 clock=time.monotonic):
        self.graph = graph
        self.coalesce_window_ms = float(coalesce_window_ms)
        self.clock = clock
        self.cache: dict[str, Value] = {}
        self.errors: dict[str, str] = {}
        self.unevaluated: set[str] = set()
        self.dirty: set[str] = set(graph.vertices)
        self._component_outputs: dict[str, dict[str, Value]] = {}
        self._pending: list[ParameterUpdate] = []
        self._pending_lock = threading.Lock()
        self._descriptors: dict[str, tuple[str, ParameterDescriptor]] | None = None

    # -- parameters -------------------------------------------------------

    def _descriptor_index(self) -> dict[str, tuple[str, ParameterDescriptor]]:
        if self._descriptors is None:
            index = {}
            for vid in sorted(self.graph.vertices):
                vertex = self.graph.vertices[vid]
                if isinstance(vertex.payload, ParameterDescriptor):
                    index[vertex.payload.guid] = (vid, vertex.payload)
            self._descriptors = index
        return self._descriptors

    def parameters(self) -> list[ParameterDescriptor]:
        """All adjustable descriptors, ordered by vertex id."""
        return [desc for _, desc in self._descriptor_index().values()]

    def descriptor(self, guid: str) -> ParameterDescriptor | None:
        entry = self._descriptor_index().get(guid)
        return entry[1] if entry else None

    def set_parameter(self, guid: str, value: object) -> None:
        """Apply one update immediately (evaluating thread only)."""
        entry = self._descriptor_index().get(guid)
        if entry is None:
            raise EvaluationTypeMismatch(f"no parameter with guid {guid}")
        vid, descriptor = entry
        descriptor.apply(value)
        self.dirty.add(vid)

    # -- queued updates ----------------------------------------------------

    def enqueue_update(self, guid: str, value: object,
                       timestamp: float | None = None) -> None:
        update = ParameterUpdate(
            guid, value, self.clock() if timestamp is None else timestamp)
        with self._pending_lock:
            self._pending.append(update)

    def drain(self) -> list[ParameterUpdate]:
        """Apply queued updates; bursts per guid collapse to the newest.

        Two updates for the same parameter closer than the coalesce window
        merge (newest value wins); unknown guids drop with a warning and a
        type mismatch drops that update only.
        """
        with self._pending_lock:
            queued, self._pending = self._pending, []
        if not queued:
            return []
        window = self.coalesce_window_ms / 1000.0
        survivors: list[ParameterUpdate] = []
        last_for_guid: dict[str, int] = {}
        for update in queued:
            slot = last_for_guid.get(update.guid)
            if slot is not None and \
                    update.timestamp - survivors[slot].timestamp <= window:
                survivors[slot] = update
            else:
                last_for_guid[update.guid] = len(survivors)
                survivors.append(update)
        applied = []
        for update in survivors:
            entry = self._descriptor_index().get(update.guid)
            if entry is None:
                log.warning("drain: unknown parameter guid %s dropped", update.guid)
                continue
            vid, descriptor = entry
            try:
                descriptor.apply(update.value)
            except EvaluationTypeMismatch as exc:
                log.warning("drain: %s", exc)
                continue
            self.dirty.add(vid)
            applied.append(ParameterUpdate(update.guid, descriptor.value,
                                           update.timestamp))
        return applied

    # -- solving -----------------------------------------------------------

    def invalidate(self) -> None:
        """Mark everything dirty (call after editing the graph)."""
        self.dirty = set(self.graph.vertices)
        self._descriptors = None

    def _descendants_of(self, seeds: set[str]) -> set[str]:
        succ: dict[str, list[str]] = {}
        for (u, v) in self.graph.edges:
            succ.setdefault(u, []).append(v)
        out = set(seeds)
        stack = list(seeds)
        while stack:
            node = stack.pop()
            for nxt in succ.get(node, ()):
                if nxt not in out:
                    out.add(nxt)
                    stack.append(nxt)
        return out

    def solve(self) -> EvaluationResult:
        """Evaluate dirty vertices and everything downstream of them."""
        order = self.graph.topological_order()
        need = self._descendants_of(self.dirty) if self.dirty else set()
        for vid in order:
            if vid not in need:
                continue
            self.cache.pop(vid, None)
            self.errors.pop(vid, None)
            self.unevaluated.discard(vid)
            self._component_outputs.pop(vid, None)
            self._evaluate_vertex(vid)
        self.dirty.clear()

        meshes = []
        for vid in order:
            value = self.cache.get(vid)
            if value is None or value.kind is not ValueKind.MESH:
                continue
            if self.graph.vertices[vid].kind is not VertexKind.OUTPUT_PORT:
                continue  # the owning component mirrors its first output
            user_out = [e for e in self.graph.out_edges(vid)
                        if not self.graph.is_structural(*e)]
            if not user_out:
                meshes.append(value.data)
        issues = [VertexIssue(vid, msg) for vid, msg in sorted(self.errors.items())]
        return EvaluationResult(values=dict(self.cache), meshes=meshes,
                                errors=issues, unevaluated=set(self.unevaluated))

    def _upstream_failed(self, vid: str) -> bool:
        for (u, _) in self.graph.in_edges(vid):
            if u in self.errors or u in self.unevaluated:
                return True
        vertex = self.graph.vertices[vid]
        if vertex.kind is VertexKind.OUTPUT_PORT and (
                vertex.owner in self.errors or vertex.owner in self.unevaluated):
            return True
        return False

    def _evaluate_vertex(self, vid: str) -> None:
        vertex = self.graph.vertices[vid]
        if self._upstream_failed(vid):
            self.unevaluated.add(vid)
            return
        try:
            value = self._value_for(vertex)
        except EvaluatorError as exc:
            self.errors[vid] = str(exc)
            return
        if value is not None:
            self.cache[vid] = value

    def _value_for(self, vertex: Vertex) -> Value | None:
        kind = vertex.kind
        if kind in (VertexKind.PRIMITIVE, VertexKind.GENERIC_PRIMITIVE):
            return _primitive_value(vertex)
        if kind is VertexKind.INPUT_PORT:
            incoming = []
            for (u, _) in self.graph.in_edges(vertex.id):
                value = self.cache.get(u)
                if value is not None:
                    incoming.append(value)
            if not incoming:
                return None  # unconnected: component may default it
            return _merge_port_inputs(incoming)
        if kind is VertexKind.IO_COMPONENT:
            spec = lookup_component_kind(vertex.type_name)
            if spec.evaluate is None:
                return None
            inputs = {}
            for port in self.graph.input_ports(vertex.id):
                value = self.cache.get(port.id)
                if value is not None:
                    inputs[port.label] = value
            outputs = spec.evaluate(inputs, vertex)
            self._component_outputs[vertex.id] = outputs
            return next(iter(outputs.values()), None)
        if kind is VertexKind.OUTPUT_PORT:
            outputs = self._component_outputs.get(vertex.owner, {})
            if vertex.label not in outputs:
                raise EvaluatorError(
                    f"component produced no output {vertex.label!r}")
            return outputs[vertex.label]
        return None
