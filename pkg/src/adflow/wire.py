"""Binary and text codecs for every protocol message.

Layout (little-endian): magic ``PARA`` | version u8 | kind u8 | payload.
Strings are u32 length + UTF-8; lists are u32 count + elements. Parameter
descriptors travel as a tagged union in the schema field order; slider
numerics are 32-bit floats, mesh vertices 32-bit, the geo anchor 64-bit.
Stream transports frame each message with a u32 length prefix.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum

from .errors import BadMagic, Truncated, UnknownUnionTag, UnsupportedVersion, WireError
from .geometry import GeoAnchor, Mesh, f32
from .params import Accuracy, ParameterDescriptor, ParameterKind

MAGIC = b"PARA"
VERSION = 1

_KIND_COMPONENTS = 1
_KIND_MESH_DATA = 2
_KIND_PARAMETER_UPDATE = 3
_KIND_CONTROL = 4

_TAG_FOR_PARAM = {
    ParameterKind.BOOLEAN_TOGGLE: 1,
    ParameterKind.NUMBER_SLIDER: 2,
    ParameterKind.LIST_PARAMETER: 3,
}
_PARAM_FOR_TAG = {v: k for k, v in _TAG_FOR_PARAM.items()}


class Role(Enum):
    DESIGNER = 1
    VIEWER = 2


# -- message bodies ----------------------------------------------------------

@dataclass
class ComponentsBody:
    items: list[ParameterDescriptor] = field(default_factory=list)


@dataclass
class MeshDataBody:
    guid: str = ""
    meshes: list[Mesh] = field(default_factory=list)
    geo: GeoAnchor | None = None


@dataclass
class ParameterUpdateBody:
    guid: str
    kind: ParameterKind
    value: object  # bool | float | int


@dataclass
class Hello:
    role: Role


@dataclass
class HostAssign:
    you: bool
    address: str


@dataclass
class HostChanged:
    address: str


@dataclass
class LockRequest:
    guid: str


@dataclass
class LockGrant:
    guid: str


@dataclass
class LockDeny:
    guid: str
    holder: str


@dataclass
class LockRelease:
    guid: str


@dataclass
class Reject:
    guid: str
    reason: str


@dataclass
class Presence:
    data: bytes


_CONTROL_TYPES = (Hello, HostAssign, HostChanged, LockRequest, LockGrant,
                  LockDeny, LockRelease, Reject, Presence)
_CONTROL_TAG = {cls: i + 1 for i, cls in enumerate(_CONTROL_TYPES)}

WireMessage = (ComponentsBody | MeshDataBody | ParameterUpdateBody | Hello
               | HostAssign | HostChanged | LockRequest | LockGrant
               | LockDeny | LockRelease | Reject | Presence)


# -- primitive writers ---------------------------------------------------------

class _Writer:
    def __init__(self):
        self.buf = bytearray()

    def u8(self, v: int):
        self.buf.append(v & 0xFF)

    def u32(self, v: int):
        self.buf += struct.pack("<I", v)

    def i16(self, v: int):
        self.buf += struct.pack("<h", v)

    def f4(self, v: float):
        self.buf += struct.pack("<f", v)

    def f8(self, v: float):
        self.buf += struct.pack("<d", v)

    def string(self, s: str):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.buf += raw

    def blob(self, b: bytes):
        self.u32(len(b))
        self.buf += b


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise Truncated(
                f"needed {n} bytes at offset {self.pos}, "
                f"have {len(self.data) - self.pos}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def i16(self) -> int:
        return struct.unpack("<h", self.take(2))[0]

    def f4(self) -> float:
        return struct.unpack("<f", self.take(4))[0]

    def f8(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def string(self) -> str:
        n = self.u32()
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WireError(f"bad UTF-8 in string: {exc}")

    def blob(self) -> bytes:
        return self.take(self.u32())

    def done(self) -> None:
        if self.pos != len(self.data):
            raise WireError(f"{len(self.data) - self.pos} trailing bytes")


# -- descriptors ---------------------------------------------------------------

def _write_descriptor(w: _Writer, d: ParameterDescriptor) -> None:
    w.u8(_TAG_FOR_PARAM[d.kind])
    w.string(d.name)
    w.string(d.guid)
    if d.kind is ParameterKind.BOOLEAN_TOGGLE:
        w.u8(1 if d.value else 0)
    elif d.kind is ParameterKind.NUMBER_SLIDER:
        w.f4(d.value)
        w.u8(d.accuracy.value)
        w.f4(d.min)
        w.f4(d.max)
        w.f4(d.epsilon)
        w.i16(d.decimal_places)
    else:
        w.u32(len(d.items))
        for item in d.items:
            w.string(item)
        w.u32(int(d.value))


def _read_descriptor(r: _Reader) -> ParameterDescriptor:
    tag = r.u8()
    kind = _PARAM_FOR_TAG.get(tag)
    if kind is None:
        raise UnknownUnionTag(f"unknown component union tag {tag}")
    name = r.string()
    guid = r.string()
    if kind is ParameterKind.BOOLEAN_TOGGLE:
        return ParameterDescriptor(guid=guid, name=name, kind=kind,
                                   value=bool(r.u8()))
    if kind is ParameterKind.NUMBER_SLIDER:
        value = r.f4()
        acc_byte = r.u8()
        try:
            accuracy = Accuracy(acc_byte)
        except ValueError:
            raise UnknownUnionTag(f"unknown accuracy byte {acc_byte}")
        return ParameterDescriptor(
            guid=guid, name=name, kind=kind, value=value, accuracy=accuracy,
            min=r.f4(), max=r.f4(), epsilon=r.f4(), decimal_places=r.i16())
    items = [r.string() for _ in range(r.u32())]
    return ParameterDescriptor(guid=guid, name=name, kind=kind,
                               value=r.u32(), items=items)


def _write_update_value(w: _Writer, body: ParameterUpdateBody) -> None:
    w.u8(_TAG_FOR_PARAM[body.kind])
    if body.kind is ParameterKind.BOOLEAN_TOGGLE:
        w.u8(1 if body.value else 0)
    elif body.kind is ParameterKind.NUMBER_SLIDER:
        w.f4(body.value)
    else:
        w.u32(int(body.value))


def _read_update_value(r: _Reader) -> tuple[ParameterKind, object]:
    tag = r.u8()
    kind = _PARAM_FOR_TAG.get(tag)
    if kind is None:
        raise UnknownUnionTag(f"unknown update union tag {tag}")
    if kind is ParameterKind.BOOLEAN_TOGGLE:
        return kind, bool(r.u8())
    if kind is ParameterKind.NUMBER_SLIDER:
        return kind, r.f4()
    return kind, r.u32()


# -- top-level codec -------------------------------------------------------------

def encode(message: WireMessage) -> bytes:
    """Serialize one message to bytes (no stream framing)."""
    w = _Writer()
    w.buf += MAGIC
    w.u8(VERSION)
    if isinstance(message, ComponentsBody):
        w.u8(_KIND_COMPONENTS)
        w.u32(len(message.items))
        for item in message.items:
            _write_descriptor(w, item)
    elif isinstance(message, MeshDataBody):
        w.u8(_KIND_MESH_DATA)
        w.string(message.guid)
        w.u32(len(message.meshes))
        for mesh in message.meshes:
            w.u32(len(mesh.vertices))
            for (x, y, z) in mesh.vertices:
                w.f4(x)
                w.f4(y)
                w.f4(z)
            w.u32(len(mesh.triangles))
            for (a, b, c) in mesh.triangles:
                w.u32(a)
                w.u32(b)
                w.u32(c)
        if message.geo is not None:
            w.u8(1)
            w.f8(message.geo.lat)
            w.f8(message.geo.lon)
            w.f8(message.geo.heading)
        else:
            w.u8(0)
    elif isinstance(message, ParameterUpdateBody):
        w.u8(_KIND_PARAMETER_UPDATE)
        w.string(message.guid)
        _write_update_value(w, message)
    elif isinstance(message, _CONTROL_TYPES):
        w.u8(_KIND_CONTROL)
        w.u8(_CONTROL_TAG[type(message)])
        if isinstance(message, Hello):
            w.u8(message.role.value)
        elif isinstance(message, HostAssign):
            w.u8(1 if message.you else 0)
            w.string(message.address)
        elif isinstance(message, HostChanged):
            w.string(message.address)
        elif isinstance(message, (LockRequest, LockGrant, LockRelease)):
            w.string(message.guid)
        elif isinstance(message, LockDeny):
            w.string(message.guid)
            w.string(message.holder)
        elif isinstance(message, Reject):
            w.string(message.guid)
            w.string(message.reason)
        else:
            w.blob(message.data)
    else:
        raise WireError(f"cannot encode {type(message).__name__}")
    return bytes(w.buf)


def decode(data: bytes) -> WireMessage:
    """Parse one message; rejects bad magic/version and truncation."""
    r = _Reader(data)
    magic = r.take(4)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    version = r.u8()
    if version != VERSION:
        raise UnsupportedVersion(f"unsupported version {version}")
    kind = r.u8()
    if kind == _KIND_COMPONENTS:
        items = [_read_descriptor(r) for _ in range(r.u32())]
        message: WireMessage = ComponentsBody(items)
    elif kind == _KIND_MESH_DATA:
        guid = r.string()
        meshes = []
        for _ in range(r.u32()):
            vertices = [(r.f4(), r.f4(), r.f4()) for _ in range(r.u32())]
            triangles = [(r.u32(), r.u32(), r.u32()) for _ in range(r.u32())]
            meshes.append(Mesh(vertices=vertices, triangles=triangles))
        geo = None
        if r.u8():
            geo = GeoAnchor(lat=r.f8(), lon=r.f8(), heading=r.f8())
        message = MeshDataBody(guid=guid, meshes=meshes, geo=geo)
    elif kind == _KIND_PARAMETER_UPDATE:
        guid = r.string()
        pkind, value = _read_update_value(r)
        message = ParameterUpdateBody(guid=guid, kind=pkind, value=value)
    elif kind == _KIND_CONTROL:
        message = _decode_control(r)
    else:
        raise UnknownUnionTag(f"unknown message kind {kind}")
    r.done()
    return message


def _decode_control(r: _Reader) -> WireMessage:
    sub = r.u8()
    if sub < 1 or sub > len(_CONTROL_TYPES):
        raise UnknownUnionTag(f"unknown control sub-kind {sub}")
    cls = _CONTROL_TYPES[sub - 1]
    if cls is Hello:
        role_byte = r.u8()
        try:
            return Hello(Role(role_byte))
        except ValueError:
            raise UnknownUnionTag(f"unknown role byte {role_byte}")
    if cls is HostAssign:
        return HostAssign(bool(r.u8()), r.string())
    if cls is HostChanged:
        return HostChanged(r.string())
    if cls in (LockRequest, LockGrant, LockRelease):
        return cls(r.string())
    if cls is LockDeny:
        return LockDeny(r.string(), r.string())
    if cls is Reject:
        return Reject(r.string(), r.string())
    return Presence(r.blob())


# -- stream framing ---------------------------------------------------------------

def frame(payload: bytes) -> bytes:
    """Prefix one encoded message with its u32 length."""
    return struct.pack("<I", len(payload)) + payload


class FrameReader:
    """Incremental length-prefixed frame splitter for byte streams."""

    MAX_FRAME = 64 * 1024 * 1024

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[bytes]:
        self._buf += data
        frames = []
        while True:
            if len(self._buf) < 4:
                return frames
            (length,) = struct.unpack("<I", self._buf[:4])
            if length > self.MAX_FRAME:
                raise WireError(f"frame of {length} bytes exceeds limit")
            if len(self._buf) < 4 + length:
                return frames
            frames.append(bytes(self._buf[4:4 + length]))
            del self._buf[:4 + length]


# -- text codec ---------------------------------------------------------------------

def _descriptor_to_json(d: ParameterDescriptor) -> dict:
    out = {"type": d.kind.value, "name": d.name, "guid": d.guid}
    if d.kind is ParameterKind.BOOLEAN_TOGGLE:
        out["value"] = bool(d.value)
    elif d.kind is ParameterKind.NUMBER_SLIDER:
        out.update(value=d.value, accuracy=d.accuracy.name.capitalize(),
                   min=d.min, max=d.max, epsilon=d.epsilon,
                   decimal_places=d.decimal_places)
    else:
        out.update(items=list(d.items), selected=int(d.value))
    return out


def _descriptor_from_json(obj: dict) -> ParameterDescriptor:
    try:
        kind = ParameterKind(obj["type"])
        name, guid = obj["name"], obj["guid"]
        if kind is ParameterKind.BOOLEAN_TOGGLE:
            return ParameterDescriptor(guid=guid, name=name, kind=kind,
                                       value=bool(obj["value"]))
        if kind is ParameterKind.NUMBER_SLIDER:
            return ParameterDescriptor(
                guid=guid, name=name, kind=kind, value=float(obj["value"]),
                accuracy=Accuracy[obj["accuracy"].upper()],
                min=float(obj["min"]), max=float(obj["max"]),
                epsilon=float(obj["epsilon"]),
                decimal_places=int(obj["decimal_places"]))
        return ParameterDescriptor(
            guid=guid, name=name, kind=kind, value=int(obj["selected"]),
            items=[str(s) for s in obj["items"]])
    except (KeyError, ValueError, TypeError) as exc:
        raise WireError(f"bad descriptor JSON: {exc}")


def encode_text(message: WireMessage) -> str:
    """JSON mirror of the binary layout (local-network mode)."""
    import base64

    if isinstance(message, ComponentsBody):
        doc = {"kind": "Components",
               "items": [_descriptor_to_json(d) for d in message.items]}
    elif isinstance(message, MeshDataBody):
        doc = {
            "kind": "MeshData",
            "guid": message.guid,
            "meshes": [{
                "vertices": [list(v) for v in mesh.vertices],
                "triangles": [list(t) for t in mesh.triangles],
            } for mesh in message.meshes],
            "geo": None if message.geo is None else {
                "lat": message.geo.lat, "lon": message.geo.lon,
                "heading": message.geo.heading},
        }
    elif isinstance(message, ParameterUpdateBody):
        value: dict = {"type": message.kind.value}
        if message.kind is ParameterKind.LIST_PARAMETER:
            value["selected"] = int(message.value)
        else:
            value["value"] = message.value
        doc = {"kind": "ParameterUpdate", "guid": message.guid, "value": value}
    elif isinstance(message, _CONTROL_TYPES):
        doc = {"kind": "Control", "control": type(message).__name__}
        if isinstance(message, Hello):
            doc["role"] = message.role.name.lower()
        elif isinstance(message, HostAssign):
            doc.update(you=message.you, address=message.address)
        elif isinstance(message, HostChanged):
            doc["address"] = message.address
        elif isinstance(message, (LockRequest, LockGrant, LockRelease)):
            doc["guid"] = message.guid
        elif isinstance(message, LockDeny):
            doc.update(guid=message.guid, holder=message.holder)
        elif isinstance(message, Reject):
            doc.update(guid=message.guid, reason=message.reason)
        else:
            doc["data"] = base64.b64encode(message.data).decode("ascii")
    else:
        raise WireError(f"cannot encode {type(message).__name__}")
    return json.dumps(doc, separators=(",", ":"))


def decode_text(text: str) -> WireMessage:
    import base64

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WireError(f"bad JSON: {exc}")
    if not isinstance(doc, dict) or "kind" not in doc:
        raise WireError("message JSON needs a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "Components":
            return ComponentsBody([_descriptor_from_json(o)
                                   for o in doc["items"]])
        if kind == "MeshData":
            meshes = [Mesh(vertices=[tuple(float(c) for c in v)
                                     for v in m["vertices"]],
                           triangles=[tuple(int(i) for i in t)
                                      for t in m["triangles"]])
                      for m in doc["meshes"]]
            geo = doc.get("geo")
            anchor = None if geo is None else GeoAnchor(
                lat=float(geo["lat"]), lon=float(geo["lon"]),
                heading=float(geo["heading"]))
            return MeshDataBody(guid=doc["guid"], meshes=meshes, geo=anchor)
        if kind == "ParameterUpdate":
            value = doc["value"]
            pkind = ParameterKind(value["type"])
            if pkind is ParameterKind.LIST_PARAMETER:
                raw: object = int(value["selected"])
            elif pkind is ParameterKind.BOOLEAN_TOGGLE:
                raw = bool(value["value"])
            else:
                raw = float(value["value"])
            return ParameterUpdateBody(guid=doc["guid"], kind=pkind, value=raw)
        if kind == "Control":
            name = doc["control"]
            for cls in _CONTROL_TYPES:
                if cls.__name__ == name:
                    break
            else:
                raise WireError(f"unknown control {name!r}")
            if cls is Hello:
                return Hello(Role[doc["role"].upper()])
            if cls is HostAssign:
                return HostAssign(bool(doc["you"]), str(doc["address"]))
            if cls is HostChanged:
                return HostChanged(str(doc["address"]))
            if cls in (LockRequest, LockGrant, LockRelease):
                return cls(str(doc["guid"]))
            if cls is LockDeny:
                return LockDeny(str(doc["guid"]), str(doc["holder"]))
            if cls is Reject:
                return Reject(str(doc["guid"]), str(doc["reason"]))
            return Presence(base64.b64decode(doc["data"]))
        raise WireError(f"unknown message kind {kind!r}")
    except (KeyError, ValueError, TypeError) as exc:
        raise WireError(f"bad message JSON: {exc}")


def narrow_descriptor(d: ParameterDescriptor) -> ParameterDescriptor:
    """Copy a descriptor with numerics narrowed to wire (f32) precision."""
    out = d.copy()
    if d.kind is ParameterKind.NUMBER_SLIDER:
        out.value = f32(d.value)
        out.min = f32(d.min)
        out.max = f32(d.max)
        out.epsilon = f32(d.epsilon)
    return out
