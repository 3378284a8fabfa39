"""Exception hierarchy.

Every error raised on purpose by the library derives from ``GeometryError``
so callers (and the CLI) can separate input problems from internal faults.
"""


class GeometryError(ValueError):
    """Base class for all library errors."""


class ParseError(GeometryError):
    """Input file could not be parsed."""


class DegenerateRing(GeometryError):
    """Ring with fewer than 3 corners, a zero-length edge or zero area."""


class SelfIntersectingRing(GeometryError):
    pass


class OverlappingRings(GeometryError):
    pass


class HoleOutsideOuter(GeometryError):
    pass


class DuplicateCorner(GeometryError):
    pass


class OutOfRange(GeometryError):
    """Boundary parameter outside [0, perimeter)."""


class NotOnBoundary(GeometryError):
    pass


class PointOutsideFreeSpace(GeometryError):
    pass


class DisconnectedFreeSpace(GeometryError):
    pass


class DisjointSubdomains(GeometryError):
    pass


class OutsideSubdomain(GeometryError):
    pass


class CoverageGap(GeometryError):
    """A block point that no region of the diagram claims."""


class SegmentOutsideFreeSpace(GeometryError):
    pass


class OffsetOutOfRange(GeometryError):
    pass


class IndexVersionMismatch(GeometryError):
    pass


class UnknownBlock(GeometryError):
    pass


class IoError(GeometryError):
    """Index or output file could not be read or written."""
