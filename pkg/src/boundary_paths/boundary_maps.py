"""Boundary-restricted shortest path maps, breakpoints, grid and blocks.

A *locus* is a union of directed segments ("carriers") sharing one
parameter axis: either the whole boundary (one carrier per edge) or a single
free-space segment.  For each corner v and carrier, the row of v records
which corner is the last one on the shortest path from v to p(t).
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import geometry as geo
from .domain import PolygonalDomain
from .errors import OutOfRange, SegmentOutsideFreeSpace
from .geodesic import GeodesicTable, VisibilityGraph, all_pairs_corner_distances, build_visibility_graph

EPS_ENV_REL = 1e-11

CORNER = "corner"
ROOT_SWITCH = "root-switch"
VIS_EVENT = "visibility-event"


@dataclass(frozen=True)
class Carrier:
    """Directed segment a -> b; ``side`` is +1 (left) or -1 (right)."""

    a: np.ndarray
    b: np.ndarray
    offset: float
    side: int = 1
    edge: int | None = None

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.b - self.a)))

    @property
    def unit(self) -> np.ndarray:
        return (self.b - self.a) / self.length

    def local(self, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates (along, left offset) of points relative to this carrier."""
        e = self.unit
        rel = np.asarray(P, float) - self.a
        return rel @ e, geo.cross(e[None], rel)

    def point(self, tau) -> np.ndarray:
        return self.a + np.multiply.outer(tau, self.unit)


class Locus:
    """Carriers laid end to end on one parameter axis."""

    def __init__(self, carriers: Sequence[Carrier], total: float, name: str):
        self.carriers = list(carriers)
        self.starts = np.array([c.offset for c in carriers])
        self.total = float(total)
        self.name = name

    @classmethod
    def boundary(cls, domain: PolygonalDomain) -> "Locus":
        par = domain.param
        cs = [Carrier(domain.E0[k], domain.E1[k], float(par.starts[k]), 1, k) for k in range(domain.n)]
        return cls(cs, par.total, "boundary")

    @classmethod
    def segment(cls, domain: PolygonalDomain, a, b, side: int) -> "Locus":
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        if np.hypot(*(b - a)) <= domain.eps:
            raise SegmentOutsideFreeSpace("segment has zero length")
        if not (domain.contains(np.array([a, b])).all() and domain.visible_pairs(a, b)[0]):
            raise SegmentOutsideFreeSpace(f"segment {a.tolist()}-{b.tolist()} leaves the free space")
        c = Carrier(a, b, 0.0, side, None)
        return cls([c], c.length, f"segment{'L' if side > 0 else 'R'}")

    def carrier_of(self, s: float) -> int:
        if not (0.0 <= s < self.total):
            raise OutOfRange(f"parameter {s} outside [0, {self.total})")
        return int(np.searchsorted(self.starts, s, side="right") - 1)

    def point(self, s: float) -> np.ndarray:
        k = self.carrier_of(s)
        c = self.carriers[k]
        return c.a + (s - c.offset) * c.unit


@dataclass(frozen=True)
class Ray:
    """Free continuation beyond corner ``b`` of the sight line from corner ``a``."""

    a: int
    b: int
    direction: np.ndarray
    extent: float


@dataclass
class Breakpoint:
    t: float
    corner: int | None
    kind: str


@dataclass
class BoundarySPMRow:
    """Root of p(t) w.r.t. corner v, as a step function of the locus parameter.

    ``roots[k]`` holds on [starts[k], starts[k+1]); consecutive roots differ.
    """

    v: int
    starts: np.ndarray
    roots: np.ndarray
    offsets: np.ndarray
    breakpoints: list = field(default_factory=list)

    def root_at(self, t: float) -> int:
        return int(self.roots[bisect_right(self.starts, t) - 1])


def visibility_rays(domain: PolygonalDomain, graph: VisibilityGraph) -> list[Ray]:
    C = domain.corners
    maxlen = 2.0 * domain.diameter + 1.0
    rays = []
    for a in range(domain.n):
        for b in np.nonzero(graph.adj[a])[0]:
            d = C[b] - C[a]
            d = d / np.hypot(*d)
            ext = geo.ray_free_extent(C[b], d, domain.E0, domain.E1, C, domain.eps, maxlen)
            if ext > domain.eps:
                rays.append(Ray(a, int(b), d, ext))
    return rays


def ray_hits(carrier: Carrier, rays: Sequence[Ray], C: np.ndarray, eps: float):
    """Carrier-local parameters where rays meet the carrier; returns (tau, source corner)."""
    if not rays:
        return np.zeros(0), np.zeros(0, int)
    O = C[[r.b for r in rays]]
    Dr = np.array([r.direction for r in rays])
    ext = np.array([r.extent for r in rays])
    src = np.array([r.a for r in rays])
    e = carrier.unit
    L = carrier.length
    den = geo.cross(Dr, e[None])
    ok = np.abs(den) > 1e-12
    den = np.where(ok, den, 1.0)
    rel = carrier.a[None] - O
    lam = geo.cross(rel, e[None]) / den  # along the ray
    tau = geo.cross(rel, Dr) / den  # along the carrier
    hit = ok & (lam >= -eps) & (lam <= ext + eps) & (tau >= -eps) & (tau <= L + eps)
    return np.clip(tau[hit], 0.0, L), src[hit]


def _pair_crossings(xi, yi, xj, yj, K):
    """Real roots tau of hypot(tau-xi, yi) - hypot(tau-xj, yj) = K (may include extraneous)."""
    P = 2.0 * (xj - xi)
    Q = xi * xi - xj * xj + yi * yi - yj * yj - K * K
    A = 4.0 * K * K - P * P
    B = -8.0 * K * K * xj - 2.0 * P * Q
    Cc = 4.0 * K * K * (xj * xj + yj * yj) - Q * Q
    out = []
    scale = np.maximum(np.abs(B), 1e-300)
    lin = np.abs(A) * (np.abs(xi) + np.abs(xj) + np.abs(yi) + np.abs(yj) + 1.0) <= 1e-14 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        r_lin = np.where(lin & (B != 0), -Cc / B, np.nan)
        disc = B * B - 4.0 * A * Cc
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (B + np.copysign(sq, B))
        r1 = np.where(~lin, q / A, np.nan)
        r2 = np.where(~lin, Cc / q, np.nan)
        # K == 0 reduces to the perpendicular bisector
        zero = K == 0
        r0 = np.where(zero & (P != 0), -Q / np.where(P != 0, P, 1.0), np.nan)
    for r in (r_lin, r1, r2, r0):
        out.append(np.ravel(r))
    return np.concatenate(out)


def _envelope_on_piece(Dv, xw, yw, ids, t0, t1, tol, xtol):
    """Lower envelope of Dv[w] + |w p(tau)| over tau in [t0, t1].

    Returns a list of (start, root id) with roots differing consecutively;
    switches are isolated from closed-form candidates, then certified by
    root bracketing.
    """
    lb = Dv + np.hypot(np.clip(xw, t0, t1) - xw, yw)
    ub = Dv + np.maximum(np.hypot(t0 - xw, yw), np.hypot(t1 - xw, yw))
    keep = np.nonzero(lb <= ub.min() + tol)[0]
    if len(keep) == 1:
        return [(t0, int(ids[keep[0]]))]
    Dk, xk, yk, ik = Dv[keep], xw[keep], yw[keep], ids[keep]
    ii, jj = np.triu_indices(len(keep), 1)
    roots = _pair_crossings(xk[ii], yk[ii], xk[jj], yk[jj], Dk[jj] - Dk[ii])
    span = t1 - t0
    roots = roots[np.isfinite(roots) & (roots > t0 + 1e-12 * span) & (roots < t1 - 1e-12 * span)]
    pts = np.concatenate(([t0], np.unique(roots), [t1]))
    mids = 0.5 * (pts[:-1] + pts[1:])
    vals = Dk[:, None] + np.hypot(mids[None] - xk[:, None], yk[:, None])
    best = vals.min(axis=0)
    win = np.argmax(vals <= best + tol, axis=0)  # smallest id among near ties
    out = [(t0, int(ik[win[0]]))]
    for m in range(1, len(mids)):
        if win[m] == win[m - 1]:
            continue
        a, b = win[m - 1], win[m]

        def g(tau, a=a, b=b):
            return (Dk[a] + math.hypot(tau - xk[a], yk[a])) - (Dk[b] + math.hypot(tau - xk[b], yk[b]))

        lo, hi = float(mids[m - 1]), float(mids[m])
        glo, ghi = g(lo), g(hi)
        if glo < 0 < ghi or glo > 0 > ghi:
            x = brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
        else:
            x = float(pts[m])
        out.append((x, int(ik[b])))
    return out


class BoundaryMaps:
    """Shared preprocessing: visibility graph, geodesic table and rays."""

    def __init__(self, domain: PolygonalDomain, eps_env: float | None = None,
                 graph: VisibilityGraph | None = None, table: GeodesicTable | None = None):
        self.domain = domain
        self.graph = graph if graph is not None else build_visibility_graph(domain)
        self.table = table if table is not None else all_pairs_corner_distances(self.graph)
        self.eps = domain.eps
        self.eps_env = eps_env if eps_env is not None else EPS_ENV_REL * domain.perimeter
        self.rays = visibility_rays(domain, self.graph)
        self.boundary = Locus.boundary(domain)
        self._rows: dict = {}
        self._events: dict = {}

    # events on carriers
    def carrier_events(self, carrier: Carrier):
        """Carrier-local event parameters and their source corners (cached)."""
        key = id(carrier)
        if key not in self._events:
            self._events[key] = (carrier, ray_hits(carrier, self.rays, self.domain.corners, self.eps))
        return self._events[key][1]

    def corners_on(self, carrier: Carrier) -> np.ndarray:
        x, y = carrier.local(self.domain.corners)
        on = (np.abs(y) <= self.eps) & (x > self.eps) & (x < carrier.length - self.eps)
        return x[on]

    def side_mask(self, carrier: Carrier) -> np.ndarray:
        _, y = carrier.local(self.domain.corners)
        return carrier.side * y >= -self.eps

    def visible_from(self, carrier: Carrier, tau: float) -> np.ndarray:
        p = carrier.a + tau * carrier.unit
        return self.domain.visible_mask(p) & self.side_mask(carrier)

    # rows
    def carrier_rows(self, carrier: Carrier) -> dict:
        """Per corner v: list of (local start, root) along the carrier."""
        key = id(carrier)
        if key in self._rows:
            return self._rows[key][1]
        dom = self.domain
        L = carrier.length
        tau_ev, _ = self.carrier_events(carrier)
        cuts = np.unique(np.concatenate(([0.0], tau_ev, self.corners_on(carrier))))
        cuts = cuts[cuts < L - self.eps]
        cuts = cuts[np.concatenate(([True], np.diff(cuts) > self.eps))]
        cuts = np.append(cuts, L)
        xw_all, yw_all = carrier.local(dom.corners)
        D = self.table.dist
        tol = 1e-12 * max(dom.perimeter, 1.0)
        rows = {v: [] for v in range(dom.n)}
        for k in range(len(cuts) - 1):
            t0, t1 = float(cuts[k]), float(cuts[k + 1])
            W = np.nonzero(self.visible_from(carrier, 0.5 * (t0 + t1)))[0]
            xw, yw = xw_all[W], np.abs(yw_all[W])
            for v in range(dom.n):
                pieces = _envelope_on_piece(D[v, W], xw, yw, W, t0, t1, tol, self.eps_env)
                row = rows[v]
                for start, root in pieces:
                    if row and row[-1][1] == root:
                        continue
                    kind = VIS_EVENT if start == t0 and k > 0 else ROOT_SWITCH
                    row.append((start, root, kind if row else CORNER))
        self._rows[key] = (carrier, rows)
        return rows

    def locus_rows(self, locus: Locus, corners: Iterable[int] | None = None) -> dict:
        """Rows over the whole locus for the given corners (default all)."""
        vs = range(self.domain.n) if corners is None else corners
        per = [self.carrier_rows(c) for c in locus.carriers]
        D = self.table.dist
        out = {}
        for v in vs:
            starts, roots, bps = [], [], []
            for c, rows in zip(locus.carriers, per):
                for start, root, kind in rows[v]:
                    t = c.offset + start
                    if roots and roots[-1] == root:
                        continue
                    starts.append(t)
                    roots.append(root)
                    if kind != CORNER:
                        bps.append(Breakpoint(t, v, kind))
            r = np.array(roots, int)
            out[v] = BoundarySPMRow(v, np.array(starts), r, D[v, r], bps)
        return out


def boundary_spm(maps: BoundaryMaps, v: int) -> BoundarySPMRow:
    return maps.locus_rows(maps.boundary, [v])[v]


@dataclass
class GridIndex:
    """Merged breakpoints of one locus; interval k is [starts[k], ends[k])."""

    starts: np.ndarray
    ends: np.ndarray
    carrier: np.ndarray
    kinds: list
    visible: np.ndarray  # (G, n) bool
    total: float

    @property
    def size(self) -> int:
        return len(self.starts)

    def locate(self, s: float) -> int:
        if not (0.0 <= s < self.total):
            raise OutOfRange(f"parameter {s} outside [0, {self.total})")
        return max(bisect_right(self.starts, s) - 1, 0)

    def visible_set(self, k: int) -> list[int]:
        return [int(i) for i in np.nonzero(self.visible[k])[0]]


def locate_interval(grid: GridIndex, s: float) -> int:
    return grid.locate(s)


def all_breakpoints(maps: BoundaryMaps, rows: dict, locus: Locus | None = None,
                    subset: Sequence[int] | None = None) -> GridIndex:
    """Merge corners, visibility events and row breakpoints into a grid.

    With ``subset`` only events from rays whose source is in the subset are
    used and visible sets are restricted to it.
    """
    locus = locus if locus is not None else maps.boundary
    dom = maps.domain
    eps = maps.eps
    ts = []
    kinds = []
    for c in locus.carriers:
        ts.append(c.offset)
        kinds.append(CORNER)
        tau, src = maps.carrier_events(c)
        if subset is not None:
            tau = tau[np.isin(src, np.asarray(list(subset), int))]
        ts.extend((c.offset + tau).tolist())
        kinds.extend([VIS_EVENT] * len(tau))
        on = maps.corners_on(c)
        ts.extend((c.offset + on).tolist())
        kinds.extend([CORNER] * len(on))
    for row in rows.values():
        for bp in row.breakpoints:
            ts.append(bp.t)
            kinds.append(bp.kind)
    ts = np.array(ts)
    order = np.argsort(ts, kind="stable")
    starts, kset = [], []
    carrier_starts = locus.starts
    for i in order:
        t = float(ts[i])
        if t >= locus.total - eps:
            continue
        if starts and t - starts[-1] <= eps:
            kset[-1].add(kinds[i])
            # a carrier start always wins so intervals never straddle carriers
            if kinds[i] == CORNER and np.any(np.abs(carrier_starts - t) <= eps):
                starts[-1] = float(carrier_starts[np.argmin(np.abs(carrier_starts - t))])
            continue
        starts.append(t)
        kset.append({kinds[i]})
    starts = np.array(starts)
    ends = np.append(starts[1:], locus.total)
    carrier = np.clip(np.searchsorted(locus.starts, starts + 0.5 * (ends - starts), side="right") - 1,
                      0, len(locus.carriers) - 1)
    G = len(starts)
    visible = np.zeros((G, dom.n), bool)
    mask = None
    if subset is not None:
        mask = np.zeros(dom.n, bool)
        mask[list(subset)] = True
    for k in range(G):
        c = locus.carriers[carrier[k]]
        tau = 0.5 * (starts[k] + ends[k]) - c.offset
        vis = maps.visible_from(c, tau)
        visible[k] = vis if mask is None else vis & mask
    return GridIndex(starts, ends, carrier, [frozenset(s) for s in kset], visible, locus.total)


def root_table(grid: GridIndex, rows: dict, n: int) -> np.ndarray:
    """roots[v, k] for every row v and grid interval k (-1 for rows not given)."""
    out = np.full((n, grid.size), -1, int)
    mids = 0.5 * (grid.starts + grid.ends)
    for v, row in rows.items():
        idx = np.searchsorted(row.starts, mids, side="right") - 1
        out[v] = row.roots[np.clip(idx, 0, len(row.roots) - 1)]
    return out


@dataclass(frozen=True)
class Block:
    id: int
    s_interval: int
    t_first: int
    t_last: int  # inclusive
    carrier_t: int

    @property
    def t_intervals(self) -> range:
        return range(self.t_first, self.t_last + 1)


@dataclass
class BlockLayout:
    """Blocks of one (s-grid, t-grid) pair, numbered s-major."""

    blocks: list
    chunk_of: np.ndarray  # t-interval -> chunk
    chunks: list  # (first, last, carrier)

    def block_id(self, i_s: int, j_t: int) -> int:
        return i_s * len(self.chunks) + int(self.chunk_of[j_t])


def make_blocks(grid_s: GridIndex, grid_t: GridIndex, cap: int, switches: np.ndarray | None = None,
                budget: int | None = None) -> BlockLayout:
    """Chunk each carrier's t-intervals into runs of at most ``cap`` cells.

    With ``switches`` (root changes summed over rows at the start of each
    t-interval) a run also closes before its interior switches exceed
    ``budget``, which bounds the partial functions per block.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if budget is None:
        budget = cap
    chunks = []
    k = 0
    while k < grid_t.size:
        c = grid_t.carrier[k]
        j = k
        used = 0
        while j + 1 < grid_t.size and grid_t.carrier[j + 1] == c and j + 1 - k < cap:
            w = 0 if switches is None else int(switches[j + 1])
            if used + w > budget:
                break
            used += w
            j += 1
        chunks.append((k, j, int(c)))
        k = j + 1
    return layout_from_chunks(grid_s.size, chunks)


def layout_from_chunks(n_s: int, chunks: Sequence) -> BlockLayout:
    chunks = [(int(a), int(b), int(c)) for a, b, c in chunks]
    chunk_of = np.zeros(chunks[-1][1] + 1 if chunks else 0, int)
    for k, (first, last, _) in enumerate(chunks):
        chunk_of[first:last + 1] = k
    blocks = []
    for i in range(n_s):
        for first, last, c in chunks:
            blocks.append(Block(len(blocks), i, first, last, c))
    return BlockLayout(blocks, chunk_of, chunks)
