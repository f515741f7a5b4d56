"""Text command grammar for adding components to a definition.

Accepted sentences (case-insensitive)::

    add component <name>
    add slider with value <number>
    add boolean toggle with value <true|false>
    add panel with text <free text>

``<number>`` accepts digits ("7", "-2.5") or spelled-out number words
("twenty seven", "three thousands"). ``<name>`` must name a known component
kind; the vocabulary is the component registry.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import NoParse, UnknownComponentType
from .graph import TypedGraph
from .params import ParameterDescriptor
from .registry import lookup_component_kind

_UNITS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9,
}
_TEENS = {
    "ten": 10, "eleven": 11, "twelve": 12, "thirteen": 13, "fourteen": 14,
    "fifteen": 15, "sixteen": 16, "seventeen": 17, "eighteen": 18,
    "nineteen": 19,
}
_TENS = {
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50, "sixty": 60,
    "seventy": 70, "eighty": 80, "ninety": 90,
}
_MULTIPLIERS = {
    "hundred": 100, "hundreds": 100,
    "thousand": 1000, "thousands": 1000,
    "million": 1_000_000, "millions": 1_000_000,
}


def parse_number_words(text: str) -> int:
    """Compose spelled-out numbers: units, teens, tens, and multipliers.

    A multiplier word scales the value spoken before it ("three thousands"
    -> 3000); bare multipliers count as one ("hundred" -> 100).
    """
    words = text.lower().split()
    if not words:
        raise ValueError("empty number phrase")
    total = 0
    current = 0
    for word in words:
        if word == "and":
            continue
        if word in _UNITS:
            current += _UNITS[word]
        elif word in _TEENS:
            current += _TEENS[word]
        elif word in _TENS:
            current += _TENS[word]
        elif word == "hundred" or word == "hundreds":
            current = max(current, 1) * 100
        elif word in _MULTIPLIERS:
            total += max(current, 1) * _MULTIPLIERS[word]
            current = 0
        else:
            raise ValueError(f"not a number word: {word!r}")
    return total + current


@dataclass
class AddComponent:
    type_name: str
    initial_value: object = None


@dataclass
class AddSlider:
    value: float


@dataclass
class AddToggle:
    value: bool


@dataclass
class AddPanel:
    text: str


Command = AddComponent | AddSlider | AddToggle | AddPanel

_NUMERIC = re.compile(r"-?\d+(\.\d+)?$")


def _parse_number_tokens(words: list[str], at: int) -> float:
    if not words:
        raise NoParse("expected a number", at)
    if len(words) == 1 and _NUMERIC.match(words[0]):
        return float(words[0])
    try:
        return float(parse_number_words(" ".join(words)))
    except ValueError:
        raise NoParse(f"not a number: {' '.join(words)!r}", at)


def parse_command(text: str) -> Command:
    """Parse one command sentence; raises NoParse with the failing word."""
    stripped = text.strip()
    words = stripped.lower().split()
    if not words:
        raise NoParse("empty command", 0)
    if words[0] != "add":
        raise NoParse(f"expected 'add', got {words[0]!r}", 0)
    if len(words) < 2:
        raise NoParse("expected a component class after 'add'", 1)
    head = words[1]

    if head == "component":
        if len(words) < 3:
            raise NoParse("expected a component name", 2)
        name = " ".join(words[2:])
        try:
            spec = lookup_component_kind(name)
        except UnknownComponentType:
            raise NoParse(f"unknown component name {name!r}", 2)
        return AddComponent(spec.type_name)

    if head == "slider":
        if words[2:4] != ["with", "value"]:
            raise NoParse("expected 'with value' after 'slider'", 2)
        return AddSlider(_parse_number_tokens(words[4:], 4))

    if head == "boolean":
        if len(words) < 3 or words[2] != "toggle":
            raise NoParse("expected 'toggle' after 'boolean'", 2)
        if words[3:5] != ["with", "value"]:
            raise NoParse("expected 'with value' after 'toggle'", 3)
        if len(words) != 6 or words[5] not in ("true", "false"):
            raise NoParse("expected 'true' or 'false'", 5)
        return AddToggle(words[5] == "true")

    if head == "panel":
        if words[2:4] != ["with", "text"]:
            raise NoParse("expected 'with text' after 'panel'", 2)
        marker = re.search(r"with\s+text\s+", stripped, flags=re.IGNORECASE)
        if marker is None or marker.end() >= len(stripped):
            raise NoParse("expected text after 'with text'", 4)
        return AddPanel(stripped[marker.end():])

    raise NoParse(f"unknown command class {head!r}", 1)


def apply_command(graph: TypedGraph, command: Command) -> str:
    """Create the commanded vertex; returns its id."""
    position = (40.0 * len(graph.components()), 0.0)
    if isinstance(command, AddSlider):
        cid = graph.add_component("NumberSlider", "slider", position)
        descriptor = graph.vertices[cid].payload
        descriptor.min = min(0.0, float(command.value))
        descriptor.max = max(10.0, float(command.value))
        descriptor.value = float(command.value)
        return cid
    if isinstance(command, AddToggle):
        cid = graph.add_component("BooleanToggle", "toggle", position)
        graph.vertices[cid].payload.value = bool(command.value)
        return cid
    if isinstance(command, AddPanel):
        cid = graph.add_component("Panel", "panel", position)
        graph.vertices[cid].payload = command.text
        return cid
    cid = graph.add_component(command.type_name,
                              command.type_name.lower(), position)
    if command.initial_value is not None:
        payload = graph.vertices[cid].payload
        if isinstance(payload, ParameterDescriptor):
            payload.apply(command.initial_value)
    return cid
