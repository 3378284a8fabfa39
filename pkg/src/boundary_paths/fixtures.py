"""Small reference domains used by tests, the CLI and the docs."""
from __future__ import annotations

from .domain import PolygonalDomain, validate_domain

TRIANGLE = {"outer": [[0, 0], [8, 0], [0, 6]], "holes": []}

SQUARE_HOLE = {
    "outer": [[0, 0], [10, 0], [10, 10], [0, 10]],
    "holes": [[[4, 4], [4, 6], [6, 6], [6, 4]]],
}


def triangle() -> PolygonalDomain:
    return validate_domain(TRIANGLE["outer"], TRIANGLE["holes"])


def square_hole() -> PolygonalDomain:
    return validate_domain(SQUARE_HOLE["outer"], SQUARE_HOLE["holes"])
