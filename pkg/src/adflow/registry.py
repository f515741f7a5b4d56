"""Catalog of component kinds a definition may instantiate.

Each entry declares the vertex kind, the fixed input/output port names, a
payload factory for fresh instances, and (for processing components) an
evaluator mapping input values to output values.
"""
from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Callable

from . import geometry
from .errors import UnknownComponentType
from .expr import parse_expression
from .graph import VertexKind
from .params import Accuracy, ParameterDescriptor, ParameterKind
from .values import Value, ValueKind

# namespace for stable per-type guids in serialized documents
_TYPE_NS = uuid.UUID("7b12a1f6-5a84-4c5b-9f57-2f90f3a1d100")


class EvaluatorError(Exception):
    """Raised by evaluators; recorded per vertex, never aborts a solve."""


@dataclass(frozen=True)
class ComponentSpec:
    type_name: str
    kind: VertexKind
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    evaluate: Callable[[dict, object], dict] | None = None
    payload_factory: Callable[[str, str], object] | None = None
    aliases: tuple[str, ...] = ()

    @property
    def type_guid(self) -> str:
        return str(uuid.uuid5(_TYPE_NS, self.type_name))

    def default_payload(self, guid: str, label: str):
        if self.payload_factory is None:
            return None
        return self.payload_factory(guid, label)


def _require_numbers(inputs: dict, name: str) -> tuple[float, ...]:
    value = inputs.get(name)
    if value is None:
        raise EvaluatorError(f"input {name!r} is not connected")
    try:
        return value.as_numbers()
    except ValueError as exc:
        raise EvaluatorError(f"input {name!r}: {exc}")


def _single_number(inputs: dict, name: str, default: float | None = None) -> float:
    value = inputs.get(name)
    if value is None:
        if default is not None:
            return default
        raise EvaluatorError(f"input {name!r} is not connected")
    numbers = _require_numbers(inputs, name)
    if len(numbers) != 1:
        raise EvaluatorError(f"input {name!r} expects a single number")
    return numbers[0]


def _eval_range(inputs: dict, vertex) -> dict:
    domain = _require_numbers(inputs, "Domain")
    if len(domain) != 2:
        raise EvaluatorError("Domain expects exactly two numbers")
    steps_f = _single_number(inputs, "Steps")
    steps = int(round(steps_f))
    if steps < 1:
        raise EvaluatorError("Steps must be at least 1")
    a, b = domain
    values = [a + (b - a) * i / steps for i in range(steps + 1)]
    values[0], values[-1] = a, b  # endpoints exact
    return {"Range": Value.number_list(values)}


def _eval_evaluate(inputs: dict, vertex) -> dict:
    source = inputs.get("Expression")
    if source is not None:
        if source.kind is not ValueKind.TEXT:
            raise EvaluatorError("Expression expects text")
        text = source.data
    elif isinstance(vertex.payload, str) and vertex.payload:
        text = vertex.payload
    else:
        raise EvaluatorError("no expression connected or stored")
    try:
        expr = parse_expression(text)
    except Exception as exc:
        raise EvaluatorError(f"bad expression: {exc}")
    arg = inputs.get("t")
    if arg is None:
        raise EvaluatorError("input 't' is not connected")
    try:
        if arg.kind is ValueKind.NUMBER:
            return {"Result": Value.number(expr.evaluate(arg.data))}
        numbers = arg.as_numbers()
        return {"Result": Value.number_list(expr.evaluate(t) for t in numbers)}
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvaluatorError(f"expression failed: {exc}")


def _broadcast(columns: list[tuple[float, ...]]) -> int:
    lengths = {len(col) for col in columns if len(col) != 1}
    if len(lengths) > 1:
        raise EvaluatorError(f"mismatched list lengths {sorted(lengths)}")
    return lengths.pop() if lengths else 1


def _eval_construct_point(inputs: dict, vertex) -> dict:
    cols = []
    for name in ("X", "Y", "Z"):
        value = inputs.get(name)
        cols.append((0.0,) if value is None else _require_numbers(inputs, name))
    n = _broadcast(cols)
    xs, ys, zs = (col if len(col) == n else col * n for col in cols)
    points = list(zip(xs, ys, zs))
    return {"Point": Value.point_list(points)}


def _eval_polyline(inputs: dict, vertex) -> dict:
    value = inputs.get("Vertices")
    if value is None or value.kind is not ValueKind.POINT_LIST:
        raise EvaluatorError("Vertices expects a point list")
    try:
        return {"Polyline": Value.curve(value.data)}
    except ValueError as exc:
        raise EvaluatorError(str(exc))


def _eval_box(inputs: dict, vertex) -> dict:
    center_value = inputs.get("Center")
    if center_value is None:
        center = (0.0, 0.0, 0.0)
    elif center_value.kind is ValueKind.POINT_LIST and len(center_value.data) == 1:
        center = center_value.data[0]
    else:
        raise EvaluatorError("Center expects a single point")
    size = _single_number(inputs, "Size")
    try:
        return {"Box": Value.mesh(geometry.box_mesh(center, size))}
    except geometry.GeometryError as exc:
        raise EvaluatorError(str(exc))


def _eval_pipe(inputs: dict, vertex) -> dict:
    curve = inputs.get("Curve")
    if curve is None or curve.kind is not ValueKind.CURVE:
        raise EvaluatorError("Curve expects a curve")
    radius = _single_number(inputs, "Radius")
    sides = int(round(_single_number(inputs, "Sides")))
    try:
        mesh = geometry.pipe_mesh(curve.data, radius, sides)
    except geometry.GeometryError as exc:
        raise EvaluatorError(str(exc))
    return {"Pipe": Value.mesh(mesh)}


def _slider_payload(guid: str, label: str) -> ParameterDescriptor:
    return ParameterDescriptor(
        guid=guid, name=label, kind=ParameterKind.NUMBER_SLIDER, value=0.0,
        accuracy=Accuracy.FLOAT, min=0.0, max=10.0, epsilon=0.0,
        decimal_places=2)


def _toggle_payload(guid: str, label: str) -> ParameterDescriptor:
    return ParameterDescriptor(
        guid=guid, name=label, kind=ParameterKind.BOOLEAN_TOGGLE, value=False)


def _list_payload(guid: str, label: str) -> ParameterDescriptor:
    return ParameterDescriptor(
        guid=guid, name=label, kind=ParameterKind.LIST_PARAMETER, value=0,
        items=["Item 1"])


@dataclass
class GenericPayload:
    """Opaque state carried through for unknown/cluster chunks."""
    attrs: dict[str, str] = field(default_factory=dict)
    data: bytes = b""


_SPECS = [
    ComponentSpec("NumberSlider", VertexKind.PRIMITIVE,
                  payload_factory=_slider_payload, aliases=("slider",)),
    ComponentSpec("BooleanToggle", VertexKind.PRIMITIVE,
                  payload_factory=_toggle_payload, aliases=("toggle",)),
    ComponentSpec("Panel", VertexKind.PRIMITIVE,
                  payload_factory=lambda guid, label: ""),
    ComponentSpec("ListParameter", VertexKind.PRIMITIVE,
                  payload_factory=_list_payload, aliases=("list",)),
    ComponentSpec("Range", VertexKind.IO_COMPONENT,
                  inputs=("Domain", "Steps"), outputs=("Range",),
                  evaluate=_eval_range),
    ComponentSpec("Evaluate", VertexKind.IO_COMPONENT,
                  inputs=("Expression", "t"), outputs=("Result",),
                  evaluate=_eval_evaluate, aliases=("eval",),
                  payload_factory=lambda guid, label: ""),
    ComponentSpec("ConstructPoint", VertexKind.IO_COMPONENT,
                  inputs=("X", "Y", "Z"), outputs=("Point",),
                  evaluate=_eval_construct_point, aliases=("pt", "point")),
    ComponentSpec("Polyline", VertexKind.IO_COMPONENT,
                  inputs=("Vertices",), outputs=("Polyline",),
                  evaluate=_eval_polyline, aliases=("pline",)),
    ComponentSpec("Box", VertexKind.IO_COMPONENT,
                  inputs=("Center", "Size"), outputs=("Box",),
                  evaluate=_eval_box),
    ComponentSpec("Pipe", VertexKind.IO_COMPONENT,
                  inputs=("Curve", "Radius", "Sides"), outputs=("Pipe",),
                  evaluate=_eval_pipe),
    ComponentSpec("GenericPrimitive", VertexKind.GENERIC_PRIMITIVE,
                  payload_factory=lambda guid, label: GenericPayload()),
]

REGISTRY: dict[str, ComponentSpec] = {spec.type_name: spec for spec in _SPECS}

_LOOKUP: dict[str, ComponentSpec] = {}
for _spec in _SPECS:
    _LOOKUP[_spec.type_name.lower()] = _spec
    for _alias in _spec.aliases:
        _LOOKUP[_alias.lower()] = _spec


def lookup_component_kind(type_name: str) -> ComponentSpec:
    """Resolve a type name or alias, case-insensitively, spaces ignored."""
    key = type_name.replace(" ", "").replace("-", "").replace("_", "").lower()
    spec = _LOOKUP.get(key)
    if spec is None:
        raise UnknownComponentType(f"unknown component type {type_name!r}")
    return spec


def known_type_names() -> list[str]:
    return sorted(REGISTRY)
