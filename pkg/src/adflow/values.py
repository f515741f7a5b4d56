"""Runtime values flowing through an evaluated definition."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class ValueKind(Enum):
    BOOLEAN = "Boolean"
    NUMBER = "Number"
    TEXT = "Text"
    NUMBER_LIST = "NumberList"
    POINT_LIST = "PointList"
    CURVE = "Curve"
    MESH = "Mesh"


@dataclass(frozen=True)
class Value:
    kind: ValueKind
    data: object

    @staticmethod
    def boolean(flag: bool) -> "Value":
        return Value(ValueKind.BOOLEAN, bool(flag))

    @staticmethod
    def number(x: float) -> "Value":
        x = float(x)
        if not math.isfinite(x):
            raise ValueError("non-finite number value")
        return Value(ValueKind.NUMBER, x)

    @staticmethod
    def text(s: str) -> "Value":
        return Value(ValueKind.TEXT, str(s))

    @staticmethod
    def number_list(xs) -> "Value":
        xs = tuple(float(x) for x in xs)
        if any(not math.isfinite(x) for x in xs):
            raise ValueError("non-finite entry in number list")
        return Value(ValueKind.NUMBER_LIST, xs)

    @staticmethod
    def point_list(points) -> "Value":
        return Value(ValueKind.POINT_LIST, _clean_points(points))

    @staticmethod
    def curve(points) -> "Value":
        pts = _clean_points(points)
        if len(pts) < 2:
            raise ValueError("a curve needs at least two points")
        return Value(ValueKind.CURVE, pts)

    @staticmethod
    def mesh(mesh) -> "Value":
        return Value(ValueKind.MESH, mesh)

    def as_numbers(self) -> tuple[float, ...]:
        """View a Number or NumberList uniformly as a tuple of floats."""
        if self.kind is ValueKind.NUMBER:
            return (self.data,)
        if self.kind is ValueKind.NUMBER_LIST:
            return self.data
        raise ValueError(f"expected numbers, got {self.kind.value}")


def _clean_points(points) -> tuple[tuple[float, float, float], ...]:
    out = []
    for p in points:
        x, y, z = (float(c) for c in p)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise ValueError("non-finite point coordinate")
        out.append((x, y, z))
    return tuple(out)
