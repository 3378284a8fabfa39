"""Vectorized planar predicates over an edge soup.

All functions take the boundary as two arrays ``E0``/``E1`` of shape (m, 2)
holding edge start and end points, and a single absolute tolerance ``eps``.
"""
from __future__ import annotations

import numpy as np

from . import _kernels


def cross(a, b):
    """z-component of the 2-D cross product, broadcasting over leading axes."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def signed_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def point_segment_distance(P, A, B):
    """Distances between points P (k,2) and segments A-B (m,2); shape (k,m)."""
    P = np.asarray(P, float).reshape(-1, 2)
    d = B - A
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd > 0, dd, 1.0)
    rel = P[:, None, :] - A[None, :, :]
    lam = np.clip(np.einsum("kmj,mj->km", rel, d) / dd, 0.0, 1.0)
    foot = A[None] + lam[..., None] * d[None]
    return np.hypot(P[:, None, 0] - foot[..., 0], P[:, None, 1] - foot[..., 1])


def segment_segment_distance(a0, a1, b0, b1):
    """Distance between segment a0-a1 and each segment in b0-b1 (m,2)."""
    a0 = np.asarray(a0, float)
    a1 = np.asarray(a1, float)
    d = a1 - a0
    r = b1 - b0
    o0 = cross(d, b0 - a0)
    o1 = cross(d, b1 - a0)
    o2 = cross(r, a0 - b0)
    o3 = cross(r, a1 - b0)
    crossing = (np.sign(o0) * np.sign(o1) < 0) & (np.sign(o2) * np.sign(o3) < 0)
    dist = np.minimum(
        np.minimum(point_segment_distance(a0, b0, b1)[0], point_segment_distance(a1, b0, b1)[0]),
        np.minimum(
            point_segment_distance(b0, a0[None], a1[None])[:, 0],
            point_segment_distance(b1, a0[None], a1[None])[:, 0],
        ),
    )
    return np.where(crossing, 0.0, dist)


def points_on_boundary(P, E0, E1, eps):
    return (point_segment_distance(P, E0, E1) <= eps).any(axis=1)


def points_in_closed(P, E0, E1, eps):
    """Even-odd containment in the closed region bounded by all edges.

    With one outer ring and holes inside it, the even-odd rule over every
    edge gives exactly the free space.  Points within ``eps`` of an edge
    count as inside.
    """
    P = np.asarray(P, float).reshape(-1, 2)
    px = P[:, 0:1]
    py = P[:, 1:2]
    x0, y0 = E0[None, :, 0], E0[None, :, 1]
    x1, y1 = E1[None, :, 0], E1[None, :, 1]
    straddle = (y0 > py) != (y1 > py)
    dy = np.where(straddle, y1 - y0, 1.0)
    xint = x0 + (py - y0) * (x1 - x0) / dy
    hits = straddle & (px < xint)
    inside = (hits.sum(axis=1) % 2) == 1
    return inside | points_on_boundary(P, E0, E1, eps)


def _proper_crossings(A, B, E0, E1, eps):
    """Mask (k,m): segment A_i-B_i crosses edge j transversally, away from all endpoints."""
    d = B - A
    L = np.hypot(d[:, 0], d[:, 1])
    L = np.where(L > 0, L, 1.0)
    r = E1 - E0
    rl = np.hypot(r[:, 0], r[:, 1])
    oA = cross(r[None], A[:, None] - E0[None]) / rl
    oB = cross(r[None], B[:, None] - E0[None]) / rl
    o0 = cross(d[:, None], E0[None] - A[:, None]) / L[:, None]
    o1 = cross(d[:, None], E1[None] - A[:, None]) / L[:, None]
    split_ab = ((oA > eps) & (oB < -eps)) | ((oA < -eps) & (oB > eps))
    split_e = ((o0 > eps) & (o1 < -eps)) | ((o0 < -eps) & (o1 > eps))
    return split_ab & split_e, oA, oB


def segments_in_closed(A, B, E0, E1, corners, eps):
    """For each pair (A_i, B_i), whether the closed segment lies in the closed region.

    A segment is rejected if it properly crosses an edge.  Otherwise it is
    split at every corner lying on it and each piece's midpoint is tested
    for containment; grazing contact therefore counts as inside.
    """
    A = np.asarray(A, float).reshape(-1, 2)
    B = np.asarray(B, float).reshape(-1, 2)
    k = len(A)
    d = B - A
    L = np.hypot(d[:, 0], d[:, 1])
    short = L <= eps
    proper, _, _ = _proper_crossings(A, B, E0, E1, eps)
    ok = ~proper.any(axis=1)

    Ls = np.where(short, 1.0, L)
    rel = corners[None] - A[:, None]
    lam = np.einsum("knj,kj->kn", rel, d) / (Ls * Ls)[:, None]
    perp = np.abs(cross(d[:, None], rel)) / Ls[:, None]
    on = (perp <= eps) & (lam * L[:, None] > eps) & ((1.0 - lam) * L[:, None] > eps)
    on &= ~short[:, None]

    mids = []
    owner = []
    todo = np.nonzero(ok)[0]
    for i in todo:
        if short[i]:
            mids.append(A[i])
            owner.append(i)
            continue
        cut = lam[i, on[i]]
        if cut.size == 0:
            mids.append(0.5 * (A[i] + B[i]))
            owner.append(i)
            continue
        ts = np.concatenate(([0.0], np.sort(cut), [1.0]))
        mt = 0.5 * (ts[:-1] + ts[1:])
        mids.extend(A[i] + mt[:, None] * d[i])
        owner.extend([i] * len(mt))
    if mids:
        inside = points_in_closed(np.array(mids), E0, E1, eps)
        bad = np.array(owner)[~inside]
        ok[bad] = False
    return ok


def ray_free_extent(origin, direction, E0, E1, corners, eps, maxlen):
    """Length of the longest initial piece of a ray that stays in the closed region."""
    origin = np.asarray(origin, float)
    direction = np.asarray(direction, float)
    far = origin + maxlen * direction
    A = origin[None]
    B = far[None]
    proper, oA, oB = _proper_crossings(A, B, E0, E1, eps)
    cuts = []
    j = np.nonzero(proper[0])[0]
    if j.size:
        # parameter of the crossing along the ray, from the edge-line distances
        cuts.append(maxlen * oA[0, j] / (oA[0, j] - oB[0, j]))
    rel = corners - origin
    lam = rel @ direction
    perp = np.abs(cross(direction[None], rel))
    c = (perp <= eps) & (lam > eps)
    if c.any():
        cuts.append(lam[c])
    if not cuts:
        return maxlen
    ts = np.unique(np.concatenate([[0.0], np.concatenate(cuts), [maxlen]]))
    mt = 0.5 * (ts[:-1] + ts[1:])
    inside = points_in_closed(origin + mt[:, None] * direction, E0, E1, eps)
    out = np.nonzero(~inside)[0]
    if out.size == 0:
        return maxlen
    return float(ts[out[0]])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone chain hull, counter-clockwise, without repeated endpoint."""
    pts = sorted(set(map(tuple, np.asarray(points, float).tolist())))
    if len(pts) <= 2:
        return np.array(pts, float).reshape(-1, 2)

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and turn(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1], float)


def edges_meet_open_polygon(hull: np.ndarray, E0, E1, eps) -> bool:
    """Whether any edge enters the interior of a convex CCW polygon shrunk by eps."""
    return bool(_kernels.edges_meet_convex(np.ascontiguousarray(hull, float), E0, E1, float(eps)))
