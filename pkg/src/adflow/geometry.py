"""Triangle meshes: render-space conversion, normals, generators, OBJ I/O.

Mesh coordinates are kept at 32-bit float precision (the wire precision);
generators do their math in 64-bit and narrow on output.
"""
from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field

from .errors import GeometryError, MalformedFace

log = logging.getLogger(__name__)

Vec3 = tuple[float, float, float]


def f32(x: float) -> float:
    """Round-trip a float through 32-bit precision."""
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _narrow(p) -> Vec3:
    return (f32(p[0]), f32(p[1]), f32(p[2]))


@dataclass
class GeoAnchor:
    lat: float
    lon: float
    heading: float  # degrees clockwise from north


@dataclass
class Mesh:
    vertices: list[Vec3] = field(default_factory=list)
    triangles: list[tuple[int, int, int]] = field(default_factory=list)
    normals: list[Vec3] | None = None
    geo: GeoAnchor | None = None

    def check(self) -> None:
        n = len(self.vertices)
        for tri in self.triangles:
            if any(i < 0 or i >= n for i in tri):
                raise MalformedFace(f"triangle {tri} indexes outside {n} vertices")
        if self.normals is not None and len(self.normals) != n:
            raise GeometryError("normals must match vertex count")


def _sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def _cross(a: Vec3, b: Vec3) -> Vec3:
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _norm(a: Vec3) -> float:
    return math.sqrt(_dot(a, a))


def _normalize(a: Vec3) -> Vec3:
    n = _norm(a)
    if n == 0.0:
        raise ZeroDivisionError("zero-length vector")
    return (a[0] / n, a[1] / n, a[2] / n)


# -- render-space conversion ----------------------------------------------

def to_render_coords(mesh: Mesh) -> Mesh:
    """Model space (right-handed, z up) to render space (left-handed, y up).

    Each vertex maps (x, y, z) -> (-x, z, y); triangle winding is reversed so
    faces keep pointing outward under the flipped front-face convention.
    Applying the map twice restores the original coordinates.
    """
    verts = [(-x, z, y) for (x, y, z) in mesh.vertices]
    tris = [(a, c, b) for (a, b, c) in mesh.triangles]
    normals = None
    if mesh.normals is not None:
        normals = [(-x, z, y) for (x, y, z) in mesh.normals]
    return Mesh(vertices=verts, triangles=tris, normals=normals, geo=mesh.geo)


def from_render_coords(mesh: Mesh) -> Mesh:
    """Inverse of :func:`to_render_coords` (the map is an involution)."""
    return to_render_coords(mesh)


def signed_volume(mesh: Mesh, left_handed: bool = False) -> float:
    """Signed volume of a closed mesh via the divergence theorem.

    In a left-handed frame the orientation form flips sign, so outward-wound
    meshes keep a positive volume in either convention.
    """
    total = 0.0
    v = mesh.vertices
    for (a, b, c) in mesh.triangles:
        total += _dot(v[a], _cross(v[b], v[c]))
    total /= 6.0
    return -total if left_handed else total


# -- normals ---------------------------------------------------------------

def compute_normals(mesh: Mesh) -> Mesh:
    """Area-weighted per-vertex normals.

    Each triangle's raw cross product (twice its area times the unit face
    normal) accumulates onto its three corners; corners with a zero
    accumulation fall back to (0, 0, 1) with a warning.
    """
    acc = [(0.0, 0.0, 0.0) for _ in mesh.vertices]
    v = mesh.vertices
    for (a, b, c) in mesh.triangles:
        face = _cross(_sub(v[b], v[a]), _sub(v[c], v[a]))
        acc[a] = _add(acc[a], face)
        acc[b] = _add(acc[b], face)
        acc[c] = _add(acc[c], face)
    normals = []
    fallbacks = 0
    for vec in acc:
        n = _norm(vec)
        if n < 1e-30:
            normals.append((0.0, 0.0, 1.0))
            fallbacks += 1
        else:
            normals.append(_narrow((vec[0] / n, vec[1] / n, vec[2] / n)))
    if fallbacks:
        log.warning("compute_normals: %d vertices had no usable face normal, "
                    "defaulted to (0, 0, 1)", fallbacks)
    return Mesh(vertices=list(mesh.vertices), triangles=list(mesh.triangles),
                normals=normals, geo=mesh.geo)


# -- generators ------------------------------------------------------------

# Corner i has coordinate signs given by bits (x, y, z) = (i&1, i&2, i&4).
# Face diagonals all run through the even-parity corners {0, 3, 5, 6} so the
# accumulated corner normals are symmetric in all three axes.
_BOX_TRIANGLES = (
    (0, 3, 1), (0, 2, 3),   # z-
    (4, 5, 6), (5, 7, 6),   # z+
    (0, 1, 5), (0, 5, 4),   # y-
    (3, 2, 6), (3, 6, 7),   # y+
    (0, 6, 2), (0, 4, 6),   # x-
    (1, 3, 5), (3, 7, 5),   # x+
)


def box_mesh(center, size: float) -> Mesh:
    """Axis-aligned box: 8 corners at center +- size/2, 12 outward triangles."""
    cx, cy, cz = (float(c) for c in center)
    h = float(size) / 2.0
    if h <= 0:
        raise GeometryError("box size must be positive")
    verts = []
    for i in range(8):
        verts.append(_narrow((
            cx + (h if i & 1 else -h),
            cy + (h if i & 2 else -h),
            cz + (h if i & 4 else -h),
        )))
    return Mesh(vertices=verts, triangles=[tuple(t) for t in _BOX_TRIANGLES])


def _rotate_about(vec: Vec3, axis: Vec3, cos_a: float, sin_a: float) -> Vec3:
    # Rodrigues rotation with a unit axis
    term1 = _scale(vec, cos_a)
    term2 = _scale(_cross(axis, vec), sin_a)
    term3 = _scale(axis, _dot(axis, vec) * (1.0 - cos_a))
    return _add(_add(term1, term2), term3)


def pipe_mesh(points, radius: float, sides: int) -> Mesh:
    """Tube around a polyline: one ring of ``sides`` vertices per point.

    Ring frames are parallel-transported along the polyline so the tube does
    not twist at near-collinear joints. No end caps.
    """
    pts = [tuple(float(c) for c in p) for p in points]
    if len(pts) < 2:
        raise GeometryError("pipe needs at least two curve points")
    if int(sides) != sides or sides < 3:
        raise GeometryError("pipe needs at least three sides")
    sides = int(sides)
    radius = float(radius)
    if radius <= 0:
        raise GeometryError("pipe radius must be positive")

    tangents = []
    for i in range(len(pts)):
        if i == 0:
            d = _sub(pts[1], pts[0])
        elif i == len(pts) - 1:
            d = _sub(pts[-1], pts[-2])
        else:
            d = _add(_normalize(_sub(pts[i], pts[i - 1])),
                     _normalize(_sub(pts[i + 1], pts[i])))
        try:
            tangents.append(_normalize(d))
        except ZeroDivisionError:
            raise GeometryError("pipe curve has coincident points")

    # initial frame: pick the world axis least aligned with the tangent
    t0 = tangents[0]
    axes = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    seed = min(axes, key=lambda a: abs(_dot(a, t0)))
    normal = _normalize(_sub(seed, _scale(t0, _dot(seed, t0))))

    verts: list[Vec3] = []
    step = 2.0 * math.pi / sides
    for i, p in enumerate(pts):
        if i > 0:
            prev_t, cur_t = tangents[i - 1], tangents[i]
            axis = _cross(prev_t, cur_t)
            sin_a = _norm(axis)
            cos_a = _dot(prev_t, cur_t)
            if sin_a > 1e-12:
                normal = _rotate_about(normal, _scale(axis, 1.0 / sin_a),
                                       cos_a, sin_a)
            # re-orthogonalise against drift
            normal = _normalize(_sub(normal, _scale(cur_t, _dot(normal, cur_t))))
        binormal = _cross(tangents[i], normal)
        for k in range(sides):
            ang = k * step
            offset = _add(_scale(normal, math.cos(ang) * radius),
                          _scale(binormal, math.sin(ang) * radius))
            verts.append(_narrow(_add(p, offset)))

    tris = []
    for i in range(len(pts) - 1):
        base0, base1 = i * sides, (i + 1) * sides
        for k in range(sides):
            k1 = (k + 1) % sides
            tris.append((base0 + k, base1 + k1, base1 + k))
            tris.append((base0 + k, base0 + k1, base1 + k1))
    return Mesh(vertices=verts, triangles=tris)


# -- Wavefront OBJ subset ---------------------------------------------------

class ObjParseResult:
    def __init__(self, meshes: list[Mesh], skipped_lines: int):
        self.meshes = meshes
        self.skipped_lines = skipped_lines

    def __iter__(self):
        return iter(self.meshes)


def parse_obj(text: str) -> ObjParseResult:
    """Parse v/vn/f records; o and g start a new mesh, anything else skips.

    Polygonal faces triangulate as a fan. Face indices are 1-based and
    global across the file, as in the format itself.
    """
    global_vertices: list[Vec3] = []
    global_normals: list[Vec3] = []
    meshes: list[Mesh] = []
    skipped = 0

    current: Mesh | None = None
    local_index: dict[int, int] = {}
    normal_for_local: dict[int, Vec3] = {}

    def finish() -> None:
        nonlocal current
        if current is not None and (current.vertices or current.triangles):
            if normal_for_local and len(normal_for_local) == len(current.vertices):
                current.normals = [normal_for_local[i]
                                   for i in range(len(current.vertices))]
            meshes.append(current)
        current = None

    def begin() -> None:
        nonlocal current
        finish()
        current = Mesh()
        local_index.clear()
        normal_for_local.clear()

    def localize(vi: int) -> int:
        if vi not in local_index:
            local_index[vi] = len(current.vertices)
            current.vertices.append(global_vertices[vi])
        return local_index[vi]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "v" and len(fields) >= 4:
            global_vertices.append(_narrow((float(fields[1]),
                                            float(fields[2]),
                                            float(fields[3]))))
        elif tag == "vn" and len(fields) >= 4:
            global_normals.append(_narrow((float(fields[1]),
                                           float(fields[2]),
                                           float(fields[3]))))
        elif tag in ("o", "g"):
            begin()
        elif tag == "f":
            if current is None:
                begin()
            corners = []
            for ref in fields[1:]:
                parts = ref.split("/")
                try:
                    vi = int(parts[0])
                except ValueError:
                    raise MalformedFace(f"line {lineno}: bad vertex ref {ref!r}")
                if vi <= 0 or vi > len(global_vertices):
                    raise MalformedFace(
                        f"line {lineno}: vertex index {vi} out of range")
                ni = None
                if len(parts) >= 3 and parts[2]:
                    ni = int(parts[2])
                    if ni <= 0 or ni > len(global_normals):
                        raise MalformedFace(
                            f"line {lineno}: normal index {ni} out of range")
                local = localize(vi - 1)
                if ni is not None:
                    normal_for_local[local] = global_normals[ni - 1]
                corners.append(local)
            if len(corners) < 3:
                raise MalformedFace(f"line {lineno}: face with <3 vertices")
            for k in range(1, len(corners) - 1):
                current.triangles.append((corners[0], corners[k], corners[k + 1]))
        else:
            skipped += 1
    finish()
    return ObjParseResult(meshes, skipped)


def export_obj(meshes) -> str:
    """Serialize meshes to OBJ text (LF line endings); re-parseable."""
    lines = []
    v_offset = 1
    n_offset = 1
    for index, mesh in enumerate(meshes):
        lines.append(f"o mesh{index}")
        for (x, y, z) in mesh.vertices:
            lines.append(f"v {x!r} {y!r} {z!r}")
        has_normals = mesh.normals is not None
        if has_normals:
            for (x, y, z) in mesh.normals:
                lines.append(f"vn {x!r} {y!r} {z!r}")
        for (a, b, c) in mesh.triangles:
            if has_normals:
                lines.append("f {0}//{3} {1}//{4} {2}//{5}".format(
                    a + v_offset, b + v_offset, c + v_offset,
                    a + n_offset, b + n_offset, c + n_offset))
            else:
                lines.append(f"f {a + v_offset} {b + v_offset} {c + v_offset}")
        v_offset += len(mesh.vertices)
        if has_normals:
            n_offset += len(mesh.normals)
    return "\n".join(lines) + ("\n" if lines else "")
