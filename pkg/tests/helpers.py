"""Shared test utilities: guid-keyed graph comparison and random builders."""
from __future__ import annotations

import random
import string

from adflow.graph import TypedGraph, VertexKind
from adflow.params import Accuracy, ParameterDescriptor
from adflow.registry import GenericPayload

PRINTABLE = string.ascii_letters + string.digits + " _-.,;|\\'\"<>&#()[]{}"


def payloads_equal(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, ParameterDescriptor):
        return (a.guid == b.guid and a.name == b.name and a.kind == b.kind
                and a.value == b.value and a.accuracy == b.accuracy
                and a.min == b.min and a.max == b.max
                and a.epsilon == b.epsilon
                and a.decimal_places == b.decimal_places
                and list(a.items) == list(b.items))
    if isinstance(a, GenericPayload):
        return a.attrs == b.attrs and a.data == b.data
    return a == b


def graphs_isomorphic(a: TypedGraph, b: TypedGraph) -> bool:
    """Guid-keyed isomorphism over vertices, edges, groups and payloads."""
    if set(a.vertices) != set(b.vertices):
        return False
    for vid, va in a.vertices.items():
        vb = b.vertices[vid]
        if (va.kind, va.type_name, va.label, va.position, va.owner) != \
                (vb.kind, vb.type_name, vb.label, vb.position, vb.owner):
            return False
        if not payloads_equal(va.payload, vb.payload):
            return False
    if a.edges != b.edges or a.structural_edges != b.structural_edges:
        return False
    ga = {g.id: (g.name, g.color, frozenset(g.member_ids)) for g in a.groups}
    gb = {g.id: (g.name, g.color, frozenset(g.member_ids)) for g in b.groups}
    return ga == gb


def random_text(rng: random.Random, max_len: int = 12) -> str:
    return "".join(rng.choice(PRINTABLE) for _ in range(rng.randint(0, max_len)))


def random_descriptor_state(rng: random.Random, descriptor: ParameterDescriptor):
    from adflow.params import ParameterKind

    if descriptor.kind is ParameterKind.NUMBER_SLIDER:
        lo = rng.uniform(-50, 40)
        hi = lo + rng.uniform(1, 60)
        descriptor.min = lo
        descriptor.max = hi
        descriptor.accuracy = rng.choice(list(Accuracy))
        descriptor.value = descriptor.min  # keep invariant regardless of accuracy
        descriptor.epsilon = rng.choice([0.0, 0.01, 0.5])
        descriptor.decimal_places = rng.randint(0, 6)
        if descriptor.accuracy is Accuracy.FLOAT:
            descriptor.value = rng.uniform(lo, hi)
        else:
            descriptor.apply(rng.uniform(lo, hi))
    elif descriptor.kind is ParameterKind.BOOLEAN_TOGGLE:
        descriptor.value = rng.random() < 0.5
    else:
        descriptor.items = [random_text(rng) for _ in range(rng.randint(1, 5))]
        descriptor.value = rng.randrange(len(descriptor.items))


_PRIMITIVES = ("NumberSlider", "BooleanToggle", "Panel", "ListParameter")
_PROCESSORS = ("Range", "Evaluate", "ConstructPoint", "Polyline", "Box", "Pipe")


def random_definition(rng: random.Random, components: int = 10) -> TypedGraph:
    """A random valid definition exercising every serializable feature."""
    from adflow.errors import GraphError

    g = TypedGraph()
    for index in range(components):
        roll = rng.random()
        position = (rng.uniform(-500, 500), rng.uniform(-500, 500))
        if roll < 0.45:
            type_name = rng.choice(_PRIMITIVES)
            cid = g.add_component(type_name, random_text(rng) or "p", position)
            vertex = g.vertices[cid]
            if isinstance(vertex.payload, ParameterDescriptor):
                random_descriptor_state(rng, vertex.payload)
            elif type_name == "Panel":
                vertex.payload = random_text(rng, 30)
        elif roll < 0.85:
            cid = g.add_component(rng.choice(_PROCESSORS),
                                  random_text(rng) or "c", position)
            vertex = g.vertices[cid]
            if vertex.type_name == "Evaluate" and rng.random() < 0.7:
                vertex.payload = "t*2"
        else:
            cid = g.add_component("GenericPrimitive", random_text(rng) or "x",
                                  position)
            g.vertices[cid].payload = GenericPayload(
                attrs={"alpha": random_text(rng), "beta": random_text(rng)},
                data=bytes(rng.randrange(256) for _ in range(rng.randint(0, 40))))

    # wire random edges through the public API (validity enforced there)
    sources, sinks = [], []
    for vertex in list(g.vertices.values()):
        if vertex.kind is VertexKind.OUTPUT_PORT:
            sources.append(vertex.id)
        elif vertex.kind is VertexKind.INPUT_PORT:
            sinks.append(vertex.id)
        elif vertex.kind in (VertexKind.PRIMITIVE, VertexKind.GENERIC_PRIMITIVE):
            sources.append(vertex.id)
            sinks.append(vertex.id)
    attempts = components * 3
    for _ in range(attempts):
        if not sources or not sinks:
            break
        u = rng.choice(sources)
        v = rng.choice(sinks)
        try:
            g.add_link(u, v)
        except GraphError:
            pass

    groupable = [c.id for c in g.components()]
    for _ in range(rng.randint(0, 3)):
        if not groupable:
            break
        members = rng.sample(groupable, k=min(len(groupable),
                                              rng.randint(1, 4)))
        g.create_group(members, random_text(rng),
                       tuple(rng.randrange(256) for _ in range(4)))
    return g
