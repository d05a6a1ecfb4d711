"""Exception hierarchy shared by every gradtac module."""


class GradtacError(Exception):
    """Base class for all errors raised by gradtac."""


class DataError(GradtacError):
    """Input data is malformed or violates a domain constraint."""


class ParseError(DataError):
    pass


class GeometryError(DataError):
    pass


class CountError(DataError):
    pass


class EmptyStream(DataError):
    pass


class SpecError(DataError):
    """Invalid filter specification (e.g. even Savitzky-Golay window)."""


class ShortSeries(DataError):
    pass


class DomainError(DataError):
    """Event generation called outside its domain (non-positive values, bad times)."""


class OutsideHull(GeometryError):
    pass


class DegeneratePolygon(GeometryError):
    pass


class UnknownKind(DataError):
    pass


class MissingSlip(DataError):
    pass


class InsufficientData(DataError):
    pass


class NonConvergence(GradtacError):
    pass


class LengthMismatch(DataError):
    pass


class LostEdge(GradtacError):
    """The edge-tracking servo lost contact for too many consecutive steps."""

    def __init__(self, message, positions=None):
        super().__init__(message)
        self.positions = positions


class HeaderMismatch(ParseError):
    pass


class RowError(ParseError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyArtifact(DataError):
    pass
