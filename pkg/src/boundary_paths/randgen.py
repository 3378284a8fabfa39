"""Seeded random test domains and free-space segments."""
from __future__ import annotations

import numpy as np

from . import geometry as geo
from .domain import PolygonalDomain, validate_domain
from .errors import GeometryError


def _star(rng, k, radius, jitter=0.35, rmin=0.55):
    gaps = rng.uniform(1.0 - jitter, 1.0 + jitter, k)
    ang = 2 * np.pi * np.cumsum(gaps) / gaps.sum()
    rad = radius * rng.uniform(rmin, 1.0, k)
    return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


def random_domain(seed: int, max_corners: int = 40, max_holes: int = 3, radius: float = 10.0,
                  attempts: int = 200) -> PolygonalDomain:
    """Star-shaped outer ring plus up to ``max_holes`` small convex holes.

    Deterministic in ``seed``; total corner count stays at most ``max_corners``.
    """
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        h = int(rng.integers(0, max_holes + 1))
        hole_k = [int(rng.integers(3, 6)) for _ in range(h)]
        budget = max_corners - sum(hole_k)
        k_out = int(rng.integers(6, max(7, min(budget, 24) + 1)))
        if k_out + sum(hole_k) > max_corners:
            continue
        outer = _star(rng, k_out, radius)
        E0 = outer
        E1 = np.roll(outer, -1, axis=0)
        holes = []
        placed = []  # (center, r)
        for k in hole_k:
            for _ in range(100):
                r = rng.uniform(0.06, 0.16) * radius
                c = rng.uniform(-0.6 * radius, 0.6 * radius, 2)
                if not geo.points_in_closed(c, E0, E1, 0.0)[0]:
                    continue
                clear = geo.point_segment_distance(c, E0, E1)[0].min()
                if clear < 1.6 * r:
                    continue
                if any(np.hypot(*(c - c2)) < 1.4 * (r + r2) for c2, r2 in placed):
                    continue
                ang = np.sort(rng.uniform(0, 2 * np.pi, k))
                ring = np.column_stack([c[0] + r * np.cos(ang), c[1] + r * np.sin(ang)])
                if abs(geo.signed_area(ring)) < 0.2 * r * r:
                    continue
                holes.append(ring)
                placed.append((c, r))
                break
        try:
            return validate_domain(outer, holes)
        except GeometryError:
            continue
    raise RuntimeError(f"no valid random domain for seed {seed}")


def random_free_point(domain: PolygonalDomain, rng) -> np.ndarray:
    lo = domain.corners.min(axis=0)
    hi = domain.corners.max(axis=0)
    while True:
        p = rng.uniform(lo, hi)
        if domain.contains(p)[0]:
            return p


def random_free_segment(domain: PolygonalDomain, rng, min_len_frac: float = 0.05):
    """Segment with both endpoints and its whole length in the closed free space."""
    while True:
        p = random_free_point(domain, rng)
        q = random_free_point(domain, rng)
        if np.hypot(*(q - p)) < min_len_frac * domain.diameter:
            continue
        if domain.visible_pairs(p, q)[0]:
            return (float(p[0]), float(p[1])), (float(q[0]), float(q[1]))


def random_convex_domain(seed: int, points: int = 24, radius: float = 10.0) -> PolygonalDomain:
    """Convex hull of random points in a disk, no holes."""
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0, 2 * np.pi, points)
    rad = radius * np.sqrt(rng.uniform(0.3, 1.0, points))
    hull = geo.convex_hull(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]))
    return validate_domain(hull)
