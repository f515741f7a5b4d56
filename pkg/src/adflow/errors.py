"""Exception hierarchy shared across the package.

``AdflowError`` is the common base; ``DataError`` groups everything the CLI
maps to exit code 2, ``NetworkError`` maps to exit code 3.
"""


class AdflowError(Exception):
    pass


class DataError(AdflowError):
    pass


class NetworkError(AdflowError):
    pass


# graph editing

class GraphError(DataError):
    pass


class UnknownComponentType(GraphError):
    pass


class TypeRuleViolation(GraphError):
    pass


class StructuralEdgeForbidden(GraphError):
    pass


class CycleWouldForm(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class NoSuchEdge(GraphError):
    pass


class NoSuchVertex(GraphError):
    pass


class NoSuchGroup(GraphError):
    pass


class PortNotRemovable(GraphError):
    """Raised when an operation targets a port directly (remove, move)."""


class InvalidGroupMember(GraphError):
    pass


class CycleDetected(GraphError):
    """An existing cycle was found where the graph should be acyclic."""


# document I/O

class MalformedDocument(DataError):
    pass


class DuplicateInstanceGuid(MalformedDocument):
    pass


# expressions

class ExpressionSyntaxError(DataError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


# evaluation

class EvaluationTypeMismatch(DataError):
    pass


class UnknownGuid(DataError):
    pass


# geometry

class GeometryError(DataError):
    pass


class MalformedFace(GeometryError):
    pass


# geodesy

class GeoError(DataError):
    pass


class LatitudeOutOfRange(GeoError):
    pass


class DegenerateBBox(GeoError):
    pass


# wire codec

class WireError(DataError):
    pass


class BadMagic(WireError):
    pass


class UnsupportedVersion(WireError):
    pass


class Truncated(WireError):
    pass


class UnknownUnionTag(WireError):
    pass


# command grammar

class NoParse(DataError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at word {position})")
        self.position = position
