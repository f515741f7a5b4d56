"""Adjustable parameter descriptors: sliders, toggles and list choices.

The slider metadata (accuracy, bounds, epsilon, decimal places) mirrors what
travels over the wire in a Components message; ``epsilon`` is carried and
round-tripped but takes no part in snapping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import EvaluationTypeMismatch


class Accuracy(Enum):
    # declaration order fixes the on-wire byte (0..3)
    FLOAT = 0
    INTEGER = 1
    EVEN = 2
    ODD = 3


class ParameterKind(Enum):
    BOOLEAN_TOGGLE = "BooleanToggle"
    NUMBER_SLIDER = "NumberSlider"
    LIST_PARAMETER = "ListParameter"


def _nearest_with_parity(value: float, parity: int) -> int:
    """Nearest integer with the given parity (0 even, 1 odd); ties go up."""
    lower = int(math.floor((value - parity) / 2.0)) * 2 + parity
    upper = lower + 2
    # tie resolves toward the upper candidate
    if value - lower < upper - value:
        return lower
    return upper


def snap_slider_value(value: float, accuracy: Accuracy,
                      lo: float, hi: float) -> float:
    """Clamp ``value`` into [lo, hi] and snap it per the accuracy rule.

    Integer/Even/Odd snap to the nearest qualifying integer (ties upward),
    then clamp onto the qualifying grid inside the range. A range holding no
    qualifying integer falls back to a plain clamp.
    """
    value = min(hi, max(lo, float(value)))
    if accuracy is Accuracy.FLOAT:
        return value
    if accuracy is Accuracy.INTEGER:
        snapped = float(math.floor(value + 0.5))
        grid_lo, grid_hi = math.ceil(lo), math.floor(hi)
    else:
        parity = 0 if accuracy is Accuracy.EVEN else 1
        snapped = float(_nearest_with_parity(value, parity))
        grid_lo = _nearest_with_parity(lo, parity)
        if grid_lo < lo:
            grid_lo += 2
        grid_hi = _nearest_with_parity(hi, parity)
        if grid_hi > hi:
            grid_hi -= 2
    if grid_lo > grid_hi:
        return value
    return float(min(grid_hi, max(grid_lo, snapped)))


@dataclass
class ParameterDescriptor:
    """One shared adjustable input, identified globally by ``guid``."""

    guid: str
    name: str
    kind: ParameterKind
    value: object = 0.0  # bool | float | int (selected index for lists)
    accuracy: Accuracy = Accuracy.FLOAT
    min: float = 0.0
    max: float = 10.0
    epsilon: float = 0.0
    decimal_places: int = 2
    items: list[str] = field(default_factory=list)

    def apply(self, new_value: object) -> None:
        """Set ``value`` from an external update, clamping and snapping.

        Raises EvaluationTypeMismatch when the update's payload type does not
        fit this parameter kind.
        """
        if self.kind is ParameterKind.BOOLEAN_TOGGLE:
            if not isinstance(new_value, bool):
                raise EvaluationTypeMismatch(
                    f"parameter {self.name!r} expects a boolean")
            self.value = new_value
        elif self.kind is ParameterKind.NUMBER_SLIDER:
            if isinstance(new_value, bool) or not isinstance(new_value, (int, float)) \
                    or not math.isfinite(new_value):
                raise EvaluationTypeMismatch(
                    f"parameter {self.name!r} expects a finite number")
            self.value = snap_slider_value(
                float(new_value), self.accuracy, self.min, self.max)
        else:
            if isinstance(new_value, bool) or not isinstance(new_value, (int, float)):
                raise EvaluationTypeMismatch(
                    f"parameter {self.name!r} expects a list index")
            index = int(round(float(new_value)))
            top = max(0, len(self.items) - 1)
            self.value = min(top, max(0, index))

    def copy(self) -> "ParameterDescriptor":
        return ParameterDescriptor(
            guid=self.guid, name=self.name, kind=self.kind, value=self.value,
            accuracy=self.accuracy, min=self.min, max=self.max,
            epsilon=self.epsilon, decimal_places=self.decimal_places,
            items=list(self.items))
