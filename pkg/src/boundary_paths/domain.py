"""Polygonal domain with holes: validation, boundary parametrization, visibility."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import geometry as geo
from .errors import (
    DegenerateRing,
    DuplicateCorner,
    HoleOutsideOuter,
    IoError,
    NotOnBoundary,
    OutOfRange,
    OverlappingRings,
    ParseError,
    PointOutsideFreeSpace,
    SelfIntersectingRing,
)

EPS_GEOM_REL = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class VisibilityProfileView:
    point: Point2
    corners: frozenset


class BoundaryParam:
    """Arc-length parametrization of the boundary.

    Rings are traversed outer first, then holes in input order; corner k
    starts edge k, so corner ids and edge ids coincide.
    """

    def __init__(self, E0: np.ndarray, E1: np.ndarray, ring_of: np.ndarray, eps: float):
        self.E0 = E0
        self.E1 = E1
        self.ring_of = ring_of
        self.eps = eps
        d = E1 - E0
        self.lengths = np.hypot(d[:, 0], d[:, 1])
        self.unit = d / self.lengths[:, None]
        # fixed-order accumulation so the total is reproducible
        starts = [0.0]
        for L in self.lengths[:-1]:
            starts.append(starts[-1] + float(L))
        self.starts = np.array(starts)
        self.total = starts[-1] + float(self.lengths[-1])

    def edge_of(self, s: float) -> int:
        if not (0.0 <= s < self.total):
            raise OutOfRange(f"parameter {s} outside [0, {self.total})")
        return int(np.searchsorted(self.starts, s, side="right") - 1)

    def param_to_point(self, s: float) -> Point2:
        k = self.edge_of(s)
        p = self.E0[k] + (s - self.starts[k]) * self.unit[k]
        return Point2(float(p[0]), float(p[1]))

    def params_to_points(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, float)
        k = np.clip(np.searchsorted(self.starts, s, side="right") - 1, 0, len(self.starts) - 1)
        return self.E0[k] + (s - self.starts[k])[..., None] * self.unit[k]

    def point_to_param(self, q) -> float:
        q = np.asarray(q, float)
        dc = np.hypot(self.E0[:, 0] - q[0], self.E0[:, 1] - q[1])
        c = int(np.argmin(dc))
        if dc[c] <= self.eps:
            return float(self.starts[c])
        dist = geo.point_segment_distance(q, self.E0, self.E1)[0]
        k = int(np.argmin(dist))
        if dist[k] > self.eps:
            raise NotOnBoundary(f"point {tuple(q)} is {dist[k]:.3g} away from the boundary")
        along = float(np.dot(q - self.E0[k], self.unit[k]))
        along = min(max(along, 0.0), float(self.lengths[k]))
        s = float(self.starts[k]) + along
        return s if s < self.total else 0.0


class PolygonalDomain:
    """Validated domain; build with :func:`validate_domain`.

    ``outer`` is counter-clockwise and every hole clockwise, so the free
    space lies to the left of each directed edge.
    """

    def __init__(self, outer: np.ndarray, holes: Sequence[np.ndarray], eps: float | None = None):
        self.outer = np.asarray(outer, float)
        self.holes = tuple(np.asarray(h, float) for h in holes)
        rings = (self.outer,) + self.holes
        self.rings = rings
        self.h = len(self.holes)
        self.corners = np.concatenate(rings)
        self.n = len(self.corners)
        ring_of, nxt, prv = [], [], []
        base = 0
        for r, ring in enumerate(rings):
            k = len(ring)
            for i in range(k):
                ring_of.append(r)
                nxt.append(base + (i + 1) % k)
                prv.append(base + (i - 1) % k)
            base += k
        self.ring_of = np.array(ring_of)
        self.next_id = np.array(nxt)
        self.prev_id = np.array(prv)
        lo = self.corners.min(axis=0)
        hi = self.corners.max(axis=0)
        self.diameter = float(np.hypot(*(hi - lo)))
        self.eps = float(eps) if eps is not None else EPS_GEOM_REL * self.diameter
        self.E0 = self.corners
        self.E1 = self.corners[self.next_id]
        self.param = BoundaryParam(self.E0, self.E1, self.ring_of, self.eps)
        self.perimeter = self.param.total

    # parametrization shortcuts
    def param_to_point(self, s: float) -> Point2:
        return self.param.param_to_point(s)

    def point_to_param(self, q) -> float:
        return self.param.point_to_param(q)

    def corner(self, k: int) -> Point2:
        return Point2(float(self.corners[k, 0]), float(self.corners[k, 1]))

    def corner_id(self, q) -> int | None:
        q = np.asarray(q, float)
        d = np.hypot(self.corners[:, 0] - q[0], self.corners[:, 1] - q[1])
        k = int(np.argmin(d))
        return k if d[k] <= self.eps else None

    # containment and visibility
    def contains(self, P) -> np.ndarray:
        return geo.points_in_closed(P, self.E0, self.E1, self.eps)

    def _require_inside(self, *pts):
        P = np.array(pts, float).reshape(-1, 2)
        inside = self.contains(P)
        if not inside.all():
            bad = P[np.nonzero(~inside)[0][0]]
            raise PointOutsideFreeSpace(f"point {tuple(bad)} is not in the free space")

    def visible_pairs(self, A, B) -> np.ndarray:
        """Vectorized visibility for pairs (A_i, B_i); no containment check."""
        return geo.segments_in_closed(A, B, self.E0, self.E1, self.corners, self.eps)

    def is_visible(self, x, y) -> bool:
        self._require_inside(x, y)
        return bool(self.visible_pairs(np.asarray(x, float), np.asarray(y, float))[0])

    def visible_mask(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        A = np.broadcast_to(x, self.corners.shape)
        return self.visible_pairs(A, self.corners)

    def visible_corners(self, x) -> VisibilityProfileView:
        self._require_inside(x)
        ids = np.nonzero(self.visible_mask(x))[0]
        return VisibilityProfileView(Point2(float(x[0]), float(x[1])), frozenset(int(i) for i in ids))

    def to_json(self) -> dict:
        return {
            "outer": self.outer.tolist(),
            "holes": [h.tolist() for h in self.holes],
        }


def is_visible(domain: PolygonalDomain, x, y) -> bool:
    return domain.is_visible(x, y)


def visible_corners(domain: PolygonalDomain, x) -> VisibilityProfileView:
    return domain.visible_corners(x)


def _check_ring_shape(ring: np.ndarray, eps: float, name: str):
    if ring.ndim != 2 or ring.shape[1] != 2 or len(ring) < 3:
        raise DegenerateRing(f"{name} needs at least 3 corners")
    if not np.isfinite(ring).all():
        raise DegenerateRing(f"{name} has non-finite coordinates")
    nxt = np.roll(ring, -1, axis=0)
    L = np.hypot(*(nxt - ring).T)
    if (L <= eps).any():
        raise DegenerateRing(f"{name} has a zero-length edge at corner {int(np.argmin(L))}")


def _check_simple(ring: np.ndarray, eps: float, name: str):
    k = len(ring)
    A = ring
    B = np.roll(ring, -1, axis=0)
    for i in range(k):
        others = [j for j in range(k) if j not in (i, (i + 1) % k, (i - 1) % k)]
        if others:
            d = geo.segment_segment_distance(A[i], B[i], A[others], B[others])
            if (d <= eps).any():
                raise SelfIntersectingRing(f"{name}: edges {i} and {others[int(np.argmin(d))]} meet")
        # adjacent edge folding back onto edge i
        j = (i + 1) % k
        if geo.point_segment_distance(B[j], A[i:i + 1], B[i:i + 1])[0, 0] <= eps or \
                geo.point_segment_distance(A[i], A[j:j + 1], B[j:j + 1])[0, 0] <= eps:
            raise SelfIntersectingRing(f"{name}: edges {i} and {j} overlap")


def validate_domain(outer: Iterable, holes: Iterable = (), eps: float | None = None) -> PolygonalDomain:
    """Check all invariants and normalize orientation (outer CCW, holes CW).

    A reversed ring keeps its first input vertex first.
    """
    try:
        rings = [np.asarray(outer, float)] + [np.asarray(h, float) for h in holes]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"rings must be lists of [x, y] pairs: {exc}") from exc
    for r in rings:
        if r.ndim != 2 or r.shape[-1] != 2:
            raise DegenerateRing("rings must be lists of [x, y] pairs with at least 3 corners")
    allpts = np.concatenate(rings)
    if not np.isfinite(allpts).all():
        raise DegenerateRing("non-finite coordinate")
    diam = float(np.hypot(*(allpts.max(axis=0) - allpts.min(axis=0))))
    if eps is None:
        eps = EPS_GEOM_REL * diam
    names = ["outer"] + [f"hole {i}" for i in range(len(rings) - 1)]
    for ring, name in zip(rings, names):
        _check_ring_shape(ring, eps, name)

    # pairwise distinct corners across all rings
    P = np.concatenate(rings)
    D = np.hypot(P[:, None, 0] - P[None, :, 0], P[:, None, 1] - P[None, :, 1])
    np.fill_diagonal(D, np.inf)
    if (D <= eps).any():
        i, j = np.unravel_index(int(np.argmin(D)), D.shape)
        raise DuplicateCorner(f"corners {i} and {j} coincide at {tuple(P[i])}")

    for ring, name in zip(rings, names):
        _check_simple(ring, eps, name)
        L = np.hypot(*(np.roll(ring, -1, axis=0) - ring).T)
        if abs(geo.signed_area(ring)) <= eps * max(float(L.max()), 1.0):
            raise DegenerateRing(f"{name} has zero area")

    # rings pairwise disjoint
    for a in range(len(rings)):
        A0 = rings[a]
        A1 = np.roll(A0, -1, axis=0)
        for b in range(a + 1, len(rings)):
            B0 = rings[b]
            B1 = np.roll(B0, -1, axis=0)
            for i in range(len(A0)):
                if (geo.segment_segment_distance(A0[i], A1[i], B0, B1) <= eps).any():
                    raise OverlappingRings(f"{names[a]} and {names[b]} intersect or touch")

    def inside_ring(p, ring):
        return bool(geo.points_in_closed(p, ring, np.roll(ring, -1, axis=0), 0.0)[0])

    for b in range(1, len(rings)):
        if not inside_ring(rings[b][0], rings[0]):
            raise HoleOutsideOuter(f"{names[b]} is not inside the outer ring")
        for c in range(1, len(rings)):
            if c != b and inside_ring(rings[b][0], rings[c]):
                raise OverlappingRings(f"{names[b]} lies inside {names[c]}")

    def oriented(ring, ccw):
        if (geo.signed_area(ring) > 0) != ccw:
            return np.concatenate([ring[:1], ring[1:][::-1]])
        return ring

    outer_n = oriented(rings[0], True)
    holes_n = [oriented(r, False) for r in rings[1:]]
    return PolygonalDomain(outer_n, holes_n, eps)


def parse_domain(obj) -> tuple[list, list]:
    if not isinstance(obj, dict) or "outer" not in obj:
        raise ParseError("domain JSON must be an object with an 'outer' ring")
    holes = obj.get("holes", [])
    if not isinstance(holes, list):
        raise ParseError("'holes' must be a list of rings")
    return obj["outer"], holes


def load_domain(path: str, eps: float | None = None) -> PolygonalDomain:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read domain {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    outer, holes = parse_domain(obj)
    return validate_domain(outer, holes, eps)


def polyline_length(points) -> float:
    return float(sum(math.dist(a, b) for a, b in zip(points[:-1], points[1:])))
