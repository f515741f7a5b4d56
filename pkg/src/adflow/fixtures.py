"""Built-in demo definitions: a parametric cube and a conical spiral.

Component ids are stable (name-derived) so scripted sessions can target
parameters across regenerated files. ``python -m adflow.fixtures cube
out.xml`` writes one to disk.
"""
from __future__ import annotations

import math
import uuid

from .graph import TypedGraph
from .params import Accuracy

_FIXTURE_NS = uuid.UUID("e94a7a1c-41f1-4cf1-93c8-404d6c87ea61")


def _fid(name: str) -> str:
    return str(uuid.uuid5(_FIXTURE_NS, name))


def _slider(graph: TypedGraph, key: str, label: str, position, value: float,
            lo: float = 0.0, hi: float = 10.0,
            accuracy: Accuracy = Accuracy.FLOAT) -> str:
    cid = graph.add_component("NumberSlider", label, position, vertex_id=_fid(key))
    descriptor = graph.vertices[cid].payload
    descriptor.min = lo
    descriptor.max = hi
    descriptor.accuracy = accuracy
    descriptor.value = value
    return cid


def build_cube_graph() -> TypedGraph:
    """Sliders X/Y/Z position a box center; slider Size scales it."""
    g = TypedGraph()
    sx = _slider(g, "cube.x", "X", (0, 0), 1.0, -10.0, 10.0)
    sy = _slider(g, "cube.y", "Y", (0, 40), 1.0, -10.0, 10.0)
    sz = _slider(g, "cube.z", "Z", (0, 80), 1.0, -10.0, 10.0)
    size = _slider(g, "cube.size", "Size", (0, 120), 1.0, 0.1, 10.0)
    pt = g.add_component("ConstructPoint", "Center", (120, 40),
                         vertex_id=_fid("cube.pt"))
    box = g.add_component("Box", "Box", (240, 60), vertex_id=_fid("cube.box"))
    g.add_link(sx, g.port_by_name(pt, "X").id)
    g.add_link(sy, g.port_by_name(pt, "Y").id)
    g.add_link(sz, g.port_by_name(pt, "Z").id)
    g.add_link(g.port_by_name(pt, "Point").id, g.port_by_name(box, "Center").id)
    g.add_link(size, g.port_by_name(box, "Size").id)
    g.create_group([sx, sy, sz], "center", (90, 160, 220, 255),
                   group_id=_fid("cube.group"))
    return g


def build_spiral_graph() -> TypedGraph:
    """Range over [0, 6*pi] evaluated into a piped conical spiral."""
    g = TypedGraph()
    lo = _slider(g, "spiral.t0", "DomainStart", (0, 0), 0.0, 0.0, 1.0)
    hi = _slider(g, "spiral.t1", "DomainEnd", (0, 40), 6.0 * math.pi,
                 0.0, 8.0 * math.pi)
    steps = _slider(g, "spiral.steps", "Steps", (0, 80), 120.0, 1.0, 400.0,
                    Accuracy.INTEGER)
    rng = g.add_component("Range", "Range", (120, 40),
                          vertex_id=_fid("spiral.range"))
    panel = g.add_component("Panel", "XFormula", (120, 140),
                            vertex_id=_fid("spiral.panel"))
    g.vertices[panel].payload = "t*cos(t)"
    ex = g.add_component("Evaluate", "EvalX", (240, 0),
                         vertex_id=_fid("spiral.evalx"))
    ey = g.add_component("Evaluate", "EvalY", (240, 80),
                         vertex_id=_fid("spiral.evaly"))
    g.vertices[ey].payload = "t*sin(t)"  # literal, no panel
    pt = g.add_component("ConstructPoint", "Pt", (360, 40),
                         vertex_id=_fid("spiral.pt"))
    pline = g.add_component("Polyline", "PLine", (480, 40),
                            vertex_id=_fid("spiral.pline"))
    pipe = g.add_component("Pipe", "Pipe", (600, 40),
                           vertex_id=_fid("spiral.pipe"))
    radius = _slider(g, "spiral.radius", "Radius", (480, 140), 0.1, 0.01, 2.0)
    sides = _slider(g, "spiral.sides", "Sides", (480, 180), 8.0, 3.0, 32.0,
                    Accuracy.INTEGER)

    g.add_link(lo, g.port_by_name(rng, "Domain").id)
    g.add_link(hi, g.port_by_name(rng, "Domain").id)
    g.add_link(steps, g.port_by_name(rng, "Steps").id)
    range_out = g.port_by_name(rng, "Range").id
    g.add_link(panel, g.port_by_name(ex, "Expression").id)
    g.add_link(range_out, g.port_by_name(ex, "t").id)
    g.add_link(range_out, g.port_by_name(ey, "t").id)
    g.add_link(g.port_by_name(ex, "Result").id, g.port_by_name(pt, "X").id)
    g.add_link(g.port_by_name(ey, "Result").id, g.port_by_name(pt, "Y").id)
    g.add_link(range_out, g.port_by_name(pt, "Z").id)
    g.add_link(g.port_by_name(pt, "Point").id,
               g.port_by_name(pline, "Vertices").id)
    g.add_link(g.port_by_name(pline, "Polyline").id,
               g.port_by_name(pipe, "Curve").id)
    g.add_link(radius, g.port_by_name(pipe, "Radius").id)
    g.add_link(sides, g.port_by_name(pipe, "Sides").id)
    g.create_group([lo, hi, steps], "domain", (220, 150, 90, 255),
                   group_id=_fid("spiral.group"))
    return g


FIXTURES = {
    "cube": build_cube_graph,
    "spiral": build_spiral_graph,
}


def main(argv=None) -> int:
    import argparse

    from .ghx import serialize_document

    parser = argparse.ArgumentParser(
        description="write a built-in demo definition to a file")
    parser.add_argument("name", choices=sorted(FIXTURES))
    parser.add_argument("path")
    args = parser.parse_args(argv)
    with open(args.path, "w", encoding="utf-8") as fh:
        fh.write(serialize_document(FIXTURES[args.name]()))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
