"""Read and write definitions as an XML document dialect.

A document lists object chunks (components with their ports and state) plus
group chunks. Links are stored backwards: each port or port-less component
carries ``source`` items naming the entities that feed it, so the graph is
reconstructed against edge direction. A source may reference an entity
defined later in the file; a placeholder vertex stands in until the real
definition arrives, and placeholders still unresolved at the end stay in the
graph as opaque generic primitives (with a warning).

Cluster-like chunks with unknown type names are preserved opaquely: their
state attributes and payload bytes round-trip verbatim, but nothing inside
them is interpreted.
"""
from __future__ import annotations

import base64
import math
import xml.etree.ElementTree as ET

from .errors import DuplicateInstanceGuid, MalformedDocument
from .graph import Group, TypedGraph, Vertex, VertexKind
from .params import Accuracy, ParameterDescriptor, ParameterKind, snap_slider_value
from .registry import GenericPayload, lookup_component_kind
from .errors import UnknownComponentType

DIALECT_VERSION = 1


# -- list item escaping ------------------------------------------------------

def _join_items(items: list[str]) -> str:
    return "|".join(s.replace("\\", "\\\\").replace("|", "\\|") for s in items)


def _split_items(text: str) -> list[str]:
    items, buf, i = [], [], 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            buf.append(text[i + 1])
            i += 2
        elif c == "|":
            items.append("".join(buf))
            buf = []
            i += 1
        else:
            buf.append(c)
            i += 1
    items.append("".join(buf))
    return items


# -- state <-> payload -------------------------------------------------------

def _parse_float(attrs: dict, key: str, default: float) -> float:
    try:
        return float(attrs.get(key, default))
    except ValueError:
        raise MalformedDocument(f"bad float for {key!r}: {attrs.get(key)!r}")


def _payload_from_state(type_name: str, guid: str, label: str,
                        attrs: dict[str, str],
                        warnings: list[str] | None = None):
    if type_name == "NumberSlider":
        accuracy_name = attrs.get("accuracy", "Float")
        try:
            accuracy = Accuracy[accuracy_name.upper()]
        except KeyError:
            raise MalformedDocument(f"unknown accuracy {accuracy_name!r}")
        try:
            decimals = int(attrs.get("decimals", 2))
        except ValueError:
            raise MalformedDocument("bad decimals value")
        descriptor = ParameterDescriptor(
            guid=guid, name=label, kind=ParameterKind.NUMBER_SLIDER,
            value=_parse_float(attrs, "value", 0.0), accuracy=accuracy,
            min=_parse_float(attrs, "min", 0.0),
            max=_parse_float(attrs, "max", 10.0),
            epsilon=_parse_float(attrs, "epsilon", 0.0),
            decimal_places=decimals)
        for field in (descriptor.value, descriptor.min, descriptor.max):
            if not math.isfinite(field):
                raise MalformedDocument(
                    f"non-finite slider state on {guid}")
        stored = descriptor.value
        snapped = snap_slider_value(stored, descriptor.accuracy,
                                    descriptor.min, descriptor.max)
        if snapped != stored:
            descriptor.value = snapped
            if warnings is not None:
                warnings.append(
                    f"slider {guid} value {stored!r} outside its "
                    f"range/accuracy; snapped to {snapped!r}")
        return descriptor
    if type_name == "BooleanToggle":
        raw = attrs.get("value", "false").lower()
        if raw not in ("true", "false"):
            raise MalformedDocument(f"bad toggle value {raw!r}")
        return ParameterDescriptor(
            guid=guid, name=label, kind=ParameterKind.BOOLEAN_TOGGLE,
            value=(raw == "true"))
    if type_name == "ListParameter":
        items = _split_items(attrs["items"]) if "items" in attrs else []
        try:
            selected = int(attrs.get("selected-index", 0))
        except ValueError:
            raise MalformedDocument("bad selected-index value")
        return ParameterDescriptor(
            guid=guid, name=label, kind=ParameterKind.LIST_PARAMETER,
            value=selected, items=items)
    if type_name == "Panel":
        return attrs.get("text", "")
    if type_name == "Evaluate":
        return attrs.get("expression", "")
    return None


def _state_attrs(vertex: Vertex) -> dict[str, str]:
    payload = vertex.payload
    if isinstance(payload, ParameterDescriptor):
        if payload.kind is ParameterKind.NUMBER_SLIDER:
            return {
                "value": repr(float(payload.value)),
                "min": repr(float(payload.min)),
                "max": repr(float(payload.max)),
                "accuracy": payload.accuracy.name.capitalize(),
                "epsilon": repr(float(payload.epsilon)),
                "decimals": str(payload.decimal_places),
            }
        if payload.kind is ParameterKind.BOOLEAN_TOGGLE:
            return {"value": "true" if payload.value else "false"}
        attrs = {"selected-index": str(int(payload.value))}
        if payload.items:
            attrs["items"] = _join_items(payload.items)
        return attrs
    if vertex.type_name == "Panel" and isinstance(payload, str):
        return {"text": payload}
    if vertex.type_name == "Evaluate" and isinstance(payload, str) and payload:
        return {"expression": payload}
    if isinstance(payload, GenericPayload):
        return dict(payload.attrs)
    return {}


# -- parsing -----------------------------------------------------------------

class _Builder:
    def __init__(self):
        self.graph = TypedGraph()
        self.defined: set[str] = set()
        self.pending: set[str] = set()
        self.warnings: list[str] = []

    def claim(self, guid: str) -> Vertex | None:
        """Register a real definition for ``guid``; returns a placeholder
        vertex to morph when one exists."""
        if guid in self.defined:
            raise DuplicateInstanceGuid(f"instance guid {guid} defined twice")
        self.defined.add(guid)
        if guid in self.pending:
            self.pending.discard(guid)
            return self.graph.vertices[guid]
        return None

    def source_vertex(self, guid: str) -> str:
        if guid not in self.graph.vertices:
            self.graph.vertices[guid] = Vertex(
                id=guid, label="", kind=VertexKind.GENERIC_PRIMITIVE,
                type_name="GenericPrimitive", payload=GenericPayload())
            self.pending.add(guid)
        return guid

    def link(self, source_guid: str, target_guid: str) -> None:
        src = self.source_vertex(source_guid)
        if self.graph.has_edge(src, target_guid):
            self.warnings.append(
                f"duplicate source {source_guid} on {target_guid} ignored")
            return
        self.graph._add_edge_unchecked(src, target_guid)


def _morph(vertex: Vertex, *, label: str, kind: VertexKind, type_name: str,
           position=(0.0, 0.0), owner=None, payload=None) -> None:
    vertex.label = label
    vertex.kind = kind
    vertex.type_name = type_name
    vertex.position = position
    vertex.owner = owner
    vertex.payload = payload


def _object_guid(element: ET.Element) -> str:
    guid = element.get("instanceguid")
    if not guid:
        raise MalformedDocument("object without instanceguid")
    return guid


def _parse_ports(builder: _Builder, cid: str, container: ET.Element | None,
                 kind: VertexKind, position) -> int:
    count = 0
    if container is None:
        return count
    for port_el in container.findall("port"):
        name = port_el.get("name", "")
        pid = port_el.get("instanceguid")
        if not pid:
            raise MalformedDocument(f"port without instanceguid on {cid}")
        placeholder = builder.claim(pid)
        if placeholder is not None:
            _morph(placeholder, label=name, kind=kind, type_name=name,
                   position=position, owner=cid)
        else:
            builder.graph.vertices[pid] = Vertex(
                id=pid, label=name, kind=kind, type_name=name,
                position=position, owner=cid)
        if kind is VertexKind.INPUT_PORT:
            builder.graph._add_edge_unchecked(pid, cid, structural=True)
        else:
            builder.graph._add_edge_unchecked(cid, pid, structural=True)
        for source_el in port_el.findall("source"):
            ref = source_el.get("idref")
            if not ref:
                raise MalformedDocument(f"source without idref on port {pid}")
            builder.link(ref, pid)
        count += 1
    return count


def _synthesize_ports(builder: _Builder, cid: str, spec, position) -> None:
    from .graph import new_id

    for name in spec.inputs:
        pid = new_id()
        builder.graph.vertices[pid] = Vertex(
            id=pid, label=name, kind=VertexKind.INPUT_PORT, type_name=name,
            position=position, owner=cid)
        builder.graph._add_edge_unchecked(pid, cid, structural=True)
    for name in spec.outputs:
        pid = new_id()
        builder.graph.vertices[pid] = Vertex(
            id=pid, label=name, kind=VertexKind.OUTPUT_PORT, type_name=name,
            position=position, owner=cid)
        builder.graph._add_edge_unchecked(cid, pid, structural=True)


def _parse_object(builder: _Builder, element: ET.Element) -> None:
    guid = _object_guid(element)
    type_name = element.get("typename", "")
    label = element.get("name", "")
    try:
        position = (float(element.get("x", 0.0)), float(element.get("y", 0.0)))
    except ValueError:
        raise MalformedDocument(f"bad position on object {guid}")
    state_el = element.find("state")
    state = dict(state_el.attrib) if state_el is not None else {}

    try:
        spec = lookup_component_kind(type_name)
        if spec.kind is VertexKind.GENERIC_PRIMITIVE:
            spec = None  # opaque payload handling below
    except UnknownComponentType:
        spec = None

    if spec is not None:
        payload = _payload_from_state(spec.type_name, guid, label, state,
                                      builder.warnings)
        kind = spec.kind
        canonical = spec.type_name
    else:
        data_el = element.find("data")
        data = base64.b64decode(data_el.text or "") if data_el is not None else b""
        payload = GenericPayload(attrs=state, data=data)
        kind = VertexKind.GENERIC_PRIMITIVE
        canonical = type_name or "GenericPrimitive"

    placeholder = builder.claim(guid)
    if placeholder is not None:
        _morph(placeholder, label=label, kind=kind, type_name=canonical,
               position=position, payload=payload)
    else:
        builder.graph.vertices[guid] = Vertex(
            id=guid, label=label, kind=kind, type_name=canonical,
            position=position, payload=payload)

    if spec is not None:
        declared = _parse_ports(builder, guid, element.find("inputs"),
                                VertexKind.INPUT_PORT, position)
        declared += _parse_ports(builder, guid, element.find("outputs"),
                                 VertexKind.OUTPUT_PORT, position)
        if declared == 0 and (spec.inputs or spec.outputs):
            _synthesize_ports(builder, guid, spec, position)

    for source_el in element.findall("source"):
        ref = source_el.get("idref")
        if not ref:
            raise MalformedDocument(f"source without idref on object {guid}")
        builder.link(ref, guid)


def _parse_color(text: str) -> tuple[int, int, int, int]:
    if len(text) != 8:
        raise MalformedDocument(f"bad group color {text!r}")
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise MalformedDocument(f"bad group color {text!r}")
    return (raw[0], raw[1], raw[2], raw[3])


def _parse_group(builder: _Builder, element: ET.Element) -> None:
    guid = element.get("instanceguid")
    if not guid:
        raise MalformedDocument("group without instanceguid")
    if guid in builder.defined:
        raise DuplicateInstanceGuid(f"instance guid {guid} defined twice")
    builder.defined.add(guid)
    members = []
    for id_el in element.findall("id"):
        ref = id_el.get("ref")
        if not ref:
            raise MalformedDocument(f"group {guid} has an id without ref")
        member = builder.graph.vertices.get(ref)
        if member is None:
            raise MalformedDocument(f"group {guid} references unknown {ref}")
        if member.is_port:
            raise MalformedDocument(f"group {guid} references port {ref}")
        members.append(ref)
    if not members:
        raise MalformedDocument(f"group {guid} has no members")
    builder.graph.groups.append(Group(
        id=guid, name=element.get("name", ""),
        color=_parse_color(element.get("color", "c8c8c8ff")),
        member_ids=members))


def parse_document(text: str) -> tuple[TypedGraph, list[str]]:
    """Parse dialect XML into a graph; returns (graph, warnings).

    Raises MalformedDocument (or DuplicateInstanceGuid) when the document
    cannot produce a valid graph.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedDocument(f"not well-formed XML: {exc}")
    if root.tag != "definition":
        raise MalformedDocument(f"unexpected root element {root.tag!r}")
    if root.get("version") != str(DIALECT_VERSION):
        raise MalformedDocument(f"unsupported version {root.get('version')!r}")

    builder = _Builder()
    objects_el = root.find("objects")
    if objects_el is not None:
        for element in objects_el.findall("object"):
            _parse_object(builder, element)
    groups_el = root.find("groups")
    if groups_el is not None:
        for element in groups_el.findall("group"):
            _parse_group(builder, element)
    for child in root:
        if child.tag not in ("objects", "groups"):
            builder.graph.attachments.append(ET.tostring(child))

    for guid in sorted(builder.pending):
        builder.warnings.append(
            f"source reference {guid} was never defined; kept as placeholder")

    violations = builder.graph.validate()
    if violations:
        raise MalformedDocument(
            "document yields an invalid graph: " + "; ".join(violations))
    return builder.graph, builder.warnings


# -- serialisation -------------------------------------------------------------

def _emit_sources(parent: ET.Element, graph: TypedGraph, vid: str) -> None:
    for (u, _) in graph.in_edges(vid):
        if not graph.is_structural(u, vid):
            ET.SubElement(parent, "source", idref=u)


def serialize_document(graph: TypedGraph) -> str:
    """Write a graph as dialect XML; objects are ordered by instance guid."""
    root = ET.Element("definition", version=str(DIALECT_VERSION))
    objects_el = ET.SubElement(root, "objects")
    for vid in sorted(graph.vertices):
        vertex = graph.vertices[vid]
        if vertex.is_port:
            continue
        obj = ET.SubElement(
            objects_el, "object",
            typename=vertex.type_name,
            typeguid=_type_guid(vertex),
            instanceguid=vertex.id,
            name=vertex.label,
            x=repr(vertex.position[0]),
            y=repr(vertex.position[1]),
        )
        attrs = _state_attrs(vertex)
        if attrs:
            ET.SubElement(obj, "state", attrs)
        if isinstance(vertex.payload, GenericPayload) and vertex.payload.data:
            data_el = ET.SubElement(obj, "data")
            data_el.text = base64.b64encode(vertex.payload.data).decode("ascii")
        _emit_sources(obj, graph, vid)
        inputs = graph.input_ports(vid)
        outputs = graph.output_ports(vid)
        if inputs:
            inputs_el = ET.SubElement(obj, "inputs")
            for port in inputs:
                port_el = ET.SubElement(inputs_el, "port", name=port.label,
                                        instanceguid=port.id)
                _emit_sources(port_el, graph, port.id)
        if outputs:
            outputs_el = ET.SubElement(obj, "outputs")
            for port in outputs:
                ET.SubElement(outputs_el, "port", name=port.label,
                              instanceguid=port.id)
    if graph.groups:
        groups_el = ET.SubElement(root, "groups")
        for group in sorted(graph.groups, key=lambda g: g.id):
            group_el = ET.SubElement(
                groups_el, "group", instanceguid=group.id, name=group.name,
                color="".join(f"{c:02x}" for c in group.color))
            for mid in sorted(group.member_ids):
                ET.SubElement(group_el, "id", ref=mid)
    for blob in graph.attachments:
        try:
            root.append(ET.fromstring(blob))
        except ET.ParseError:
            pass  # attachments come from parsed XML; skip anything else
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=False) + "\n"


def _type_guid(vertex: Vertex) -> str:
    try:
        return lookup_component_kind(vertex.type_name).type_guid
    except UnknownComponentType:
        return lookup_component_kind("GenericPrimitive").type_guid
