"""Query structures for boundary pairs and segment pairs."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import geometry as geo
from .boundary_maps import (
    BlockLayout,
    BoundaryMaps,
    GridIndex,
    Locus,
    all_breakpoints,
    make_blocks,
    root_table,
)
from .domain import Point2, PolygonalDomain
from .envelope import DIRECT, REGIONS, BlockDiagram, block_diagram, direct_diagram, partial_functions
from .errors import CoverageGap, OffsetOutOfRange, OutOfRange

log = logging.getLogger(__name__)


@dataclass
class BuildConfig:
    delta: float = 1.0
    eps_geom: float | None = None
    eps_env: float | None = None
    curve_res: float = 1.0 / 16
    cap: int | None = None
    check: bool = False

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.curve_res <= 0 or (self.eps_env is not None and self.eps_env <= 0) or \
                (self.eps_geom is not None and self.eps_geom <= 0):
            raise ValueError("tolerances must be positive")


@dataclass
class PathResult:
    length: float
    polyline: list
    witness: tuple | None  # (u, v) corner ids, None for a direct segment
    direct: bool
    locations: int = 0

    def to_json(self, domain: PolygonalDomain | None = None, path: bool = True) -> dict:
        out = {"length": self.length, "direct": self.direct, "locations": self.locations}
        if self.witness is None:
            out["witness"] = None
        else:
            u, v = self.witness
            out["witness"] = {"u": u, "v": v}
            if domain is not None:
                out["witness"]["u_xy"] = list(domain.corner(u))
                out["witness"]["v_xy"] = list(domain.corner(v))
        if path:
            out["path"] = [[p.x, p.y] for p in self.polyline]
        return out


def partition_corners(n: int, delta: float) -> list[list[int]]:
    """m = ceil(n^(1-delta)) contiguous near-equal subsets of corner ids."""
    m = max(1, math.ceil(n ** (1.0 - delta) - 1e-12))
    m = min(m, n)
    return [list(map(int, part)) for part in np.array_split(np.arange(n), m)]


def block_cap(n: int, delta: float) -> int:
    return n if delta >= 1.0 else max(1, math.ceil(n ** delta - 1e-12))


def _fully_visible(domain: PolygonalDomain, pts: np.ndarray) -> bool:
    """Whether the convex hull of the points lies in the closed free space."""
    hull = geo.convex_hull(pts)
    if len(hull) <= 2 or abs(geo.signed_area(hull)) <= domain.eps * domain.diameter:
        if len(hull) == 1:
            return bool(domain.contains(hull).all())
        d = pts - pts[0]
        k = int(np.argmax(np.hypot(d[:, 0], d[:, 1])))
        far = pts[k]
        d = pts - far
        k2 = int(np.argmax(np.hypot(d[:, 0], d[:, 1])))
        return bool(domain.visible_pairs(far, pts[k2])[0])
    if geo.edges_meet_open_polygon(hull, domain.E0, domain.E1, domain.eps):
        return False
    return bool(domain.contains(hull.mean(axis=0)[None]).all())


class PairStructure:
    """Grid, blocks and diagrams for one source locus, target locus and corner subset."""

    def __init__(self, subset, locus_s: Locus, locus_t: Locus, grid_s: GridIndex, grid_t: GridIndex,
                 layout: BlockLayout, diagrams: list, rows_breaks: dict | None = None):
        self.subset = list(subset)
        self.locus_s = locus_s
        self.locus_t = locus_t
        self.grid_s = grid_s
        self.grid_t = grid_t
        self.layout = layout
        self.diagrams = diagrams
        self.rows_breaks = rows_breaks or {}

    @property
    def blocks(self):
        return self.layout.blocks

    def block_at(self, s: float, t: float) -> int:
        return self.layout.block_id(self.grid_s.locate(s), self.grid_t.locate(t))

    def locate(self, s: float, t: float):
        """(diagram kind, winning PartialFunc or None)."""
        diag = self.diagrams[self.block_at(s, t)]
        return diag.kind, diag.locate(s, t)


def build_pair(maps: BoundaryMaps, locus_s: Locus, locus_t: Locus, subset: Sequence[int] | None,
               cap: int, config: BuildConfig) -> PairStructure:
    dom = maps.domain
    sub = None if subset is None or len(subset) == dom.n else list(subset)
    rows_t = maps.locus_rows(locus_t, sub)
    grid_t = all_breakpoints(maps, rows_t, locus_t, sub)
    if locus_s is locus_t:
        grid_s = grid_t
    else:
        rows_s = maps.locus_rows(locus_s, sub)
        grid_s = all_breakpoints(maps, rows_s, locus_s, sub)
    roots = root_table(grid_t, rows_t, dom.n)
    switches = np.zeros(grid_t.size, int)
    switches[1:] = (roots[:, 1:] != roots[:, :-1]).sum(axis=0)
    layout = make_blocks(grid_s, grid_t, cap, switches, cap)
    dist = maps.table.dist
    diagrams = []
    consts: dict = {}
    ps_lo = np.array([locus_s.point(x) for x in grid_s.starts])
    ps_hi = np.array([_end_point(locus_s, grid_s, k) for k in range(grid_s.size)])
    pt_lo = np.array([locus_t.point(x) for x in grid_t.starts])
    pt_hi = np.array([_end_point(locus_t, grid_t, k) for k in range(grid_t.size)])
    for blk in layout.blocks:
        i = blk.s_interval
        pts = np.array([ps_lo[i], ps_hi[i], pt_lo[blk.t_first], pt_hi[blk.t_last]])
        t_lo = float(grid_t.starts[blk.t_first])
        t_hi = float(grid_t.ends[blk.t_last])
        if _fully_visible(dom, pts):
            diagrams.append(direct_diagram(blk.id, t_lo, t_hi))
            continue
        funcs = partial_functions(blk, grid_s, grid_t, locus_s, locus_t, roots, dist, dom.corners, consts=consts)
        cols = np.array([[grid_t.starts[j], grid_t.ends[j]] for j in blk.t_intervals])
        diagrams.append(block_diagram(blk.id, funcs, float(grid_s.starts[i]), float(grid_s.ends[i]),
                                      cols, maps.eps_env, config.curve_res, config.check))
    breaks = {int(v): len(r.breakpoints) for v, r in rows_t.items()}
    return PairStructure(subset if subset is not None else list(range(dom.n)), locus_s, locus_t,
                         grid_s, grid_t, layout, diagrams, breaks)


def _end_point(locus: Locus, grid: GridIndex, k: int) -> np.ndarray:
    c = locus.carriers[grid.carrier[k]]
    return c.a + (grid.ends[k] - c.offset) * c.unit


def _result_from(domain, table, p, q, best, locations) -> PathResult:
    length, u, v = best
    seq = table.path(u, v)
    poly = [Point2(float(p[0]), float(p[1]))] + [domain.corner(k) for k in seq] + \
        [Point2(float(q[0]), float(q[1]))]
    return PathResult(float(length), poly, (int(u), int(v)), False, locations)


def _answer(domain, table, parts, p, q, s, t) -> PathResult:
    """Point-locate (s, t) in every part, then prefer the direct segment when p sees q."""
    P = Point2(float(p[0]), float(p[1]))
    Q = Point2(float(q[0]), float(q[1]))
    best = None
    count = 0
    saw_direct = False
    for part in parts:
        kind, f = part.locate(s, t)
        count += 1
        if kind == DIRECT:
            saw_direct = True
        if f is None:
            continue
        cand = (f.value(s, t), f.u, f.v)
        if best is None or cand < best:
            best = cand
    if math.dist(P, Q) <= domain.eps:
        return PathResult(0.0, [P], None, True, count)
    if domain.visible_pairs(np.asarray(p), np.asarray(q))[0]:
        return PathResult(float(math.dist(P, Q)), [P, Q], None, True, count)
    if best is None:
        if saw_direct:
            # hull of the block is free, so p sees q; the segment test missed a graze
            return PathResult(float(math.dist(P, Q)), [P, Q], None, True, count)
        raise CoverageGap(f"no candidate path for ({s}, {t})")
    return _result_from(domain, table, p, q, best, count)


class QueryStructure:
    """Boundary-to-boundary query structure, optionally split by corner subsets."""

    def __init__(self, domain: PolygonalDomain, maps: BoundaryMaps, config: BuildConfig,
                 parts: list[PairStructure], build_seconds: float = 0.0):
        self.domain = domain
        self.maps = maps
        self.config = config
        self.parts = parts
        self.build_seconds = build_seconds

    @property
    def table(self):
        return self.maps.table

    @property
    def m(self) -> int:
        return len(self.parts)

    def query(self, s: float, t: float) -> PathResult:
        P = self.domain.param
        if not (0.0 <= s < P.total) or not (0.0 <= t < P.total):
            raise OutOfRange(f"parameters ({s}, {t}) outside [0, {P.total})")
        p = P.param_to_point(s)
        q = P.param_to_point(t)
        return _answer(self.domain, self.table, self.parts, p, q, s, t)

    def query_points(self, pp, qq) -> PathResult:
        return self.query(self.domain.point_to_param(pp), self.domain.point_to_param(qq))

    def stats(self) -> dict:
        return structure_stats(self)


def build(domain: PolygonalDomain, delta: float = 1.0, cap: int | None = None,
          config: BuildConfig | None = None, maps: BoundaryMaps | None = None) -> QueryStructure:
    config = config or BuildConfig(delta=delta, cap=cap)
    if config.delta != delta and delta != 1.0:
        config.delta = delta
    t0 = time.perf_counter()
    maps = maps or BoundaryMaps(domain, config.eps_env)
    n = domain.n
    cap = config.cap or block_cap(n, config.delta)
    subsets = partition_corners(n, config.delta)
    parts = []
    for sub in subsets:
        log.info("building subset %s", sub if len(sub) < n else "all")
        parts.append(build_pair(maps, maps.boundary, maps.boundary, sub, cap, config))
    return QueryStructure(domain, maps, config, parts, time.perf_counter() - t0)


class SegmentQueryStructure:
    """Queries between points on source segments and target segments."""

    def __init__(self, domain: PolygonalDomain, maps: BoundaryMaps, config: BuildConfig,
                 sources: list, targets: list, parts: dict, build_seconds: float = 0.0):
        self.domain = domain
        self.maps = maps
        self.config = config
        self.sources = sources
        self.targets = targets
        self.parts = parts  # (si, ti) -> list of PairStructure over side combos and subsets
        self.build_seconds = build_seconds

    @property
    def table(self):
        return self.maps.table

    def _point(self, segs, idx, off):
        if not (0 <= idx < len(segs)):
            raise OffsetOutOfRange(f"segment id {idx} out of range")
        a, b = segs[idx]
        L = float(np.hypot(*(b - a)))
        if not (0.0 <= off <= L):
            raise OffsetOutOfRange(f"offset {off} outside [0, {L}]")
        return a + off * (b - a) / L, L

    def query(self, src: tuple, dst: tuple) -> PathResult:
        si, so = src
        ti, to = dst
        p, Ls = self._point(self.sources, si, so)
        q, Lt = self._point(self.targets, ti, to)
        # the closed end of a segment belongs to its last interval
        s = min(float(so), np.nextafter(Ls, 0.0))
        t = min(float(to), np.nextafter(Lt, 0.0))
        res = _answer(self.domain, self.table, self.parts[(si, ti)], p, q, s, t)
        if res.witness is not None:
            # re-evaluate at the exact offsets so the length matches the polyline
            u, v = res.witness
            C = self.domain.corners
            length = float(np.hypot(*(p - C[u])) + self.table.dist[u, v] + np.hypot(*(C[v] - q)))
            res.length = length
        return res


def segment_query(structure: SegmentQueryStructure, src: tuple, dst: tuple) -> PathResult:
    return structure.query(src, dst)


def build_segments(domain: PolygonalDomain, sources: Sequence, targets: Sequence, delta: float = 1.0,
                   config: BuildConfig | None = None, maps: BoundaryMaps | None = None) -> SegmentQueryStructure:
    config = config or BuildConfig(delta=delta)
    t0 = time.perf_counter()
    maps = maps or BoundaryMaps(domain, config.eps_env)
    n = domain.n
    cap = config.cap or block_cap(n, config.delta)
    subsets = partition_corners(n, config.delta)
    src = [(np.asarray(a, float), np.asarray(b, float)) for a, b in sources]
    dst = [(np.asarray(a, float), np.asarray(b, float)) for a, b in targets]
    loci = {}

    def locus(kind, idx, side):
        key = (kind, idx, side)
        if key not in loci:
            a, b = (src if kind == "s" else dst)[idx]
            loci[key] = Locus.segment(domain, a, b, side)
        return loci[key]

    parts = {}
    for si in range(len(src)):
        for ti in range(len(dst)):
            lst = []
            for ss in (1, -1):
                for ts in (1, -1):
                    for sub in subsets:
                        lst.append(build_pair(maps, locus("s", si, ss), locus("t", ti, ts), sub, cap, config))
            parts[(si, ti)] = lst
    return SegmentQueryStructure(domain, maps, config, src, dst, parts, time.perf_counter() - t0)


def structure_stats(qs: QueryStructure) -> dict:
    dom = qs.domain
    per_part = []
    regions_max = 0
    vertices_max = 0
    vertices_total = 0
    crossings_max = 0
    direct = 0
    blocks = 0
    per_block = []
    for k, part in enumerate(qs.parts):
        for d in part.diagrams:
            blocks += 1
            st = d.stats
            if d.kind == DIRECT:
                direct += 1
            regions_max = max(regions_max, st.get("regions", 0))
            vertices_max = max(vertices_max, st.get("vertices", 0))
            vertices_total += st.get("vertices", 0)
            crossings_max = max(crossings_max, st.get("max_pair_crossings", 0))
            per_block.append([k, d.block_id, d.kind, st.get("functions", 0), st.get("regions", 0),
                              st.get("vertices", 0)])
        per_part.append({
            "subset": part.subset,
            "breakpoints": part.grid_t.size,
            "grid_intervals": part.grid_t.size,
            "blocks": len(part.blocks),
        })
    full = qs.parts[0] if qs.m == 1 else None
    row_counts = full.rows_breaks if full is not None else {}
    if full is None:
        rows = qs.maps.locus_rows(qs.maps.boundary)
        row_counts = {int(v): len(r.breakpoints) for v, r in rows.items()}
    return {
        "n": dom.n,
        "h": dom.h,
        "perimeter": dom.perimeter,
        "delta": qs.config.delta,
        "m": qs.m,
        "breakpoints": sum(p["breakpoints"] for p in per_part) if qs.m > 1 else per_part[0]["breakpoints"],
        "grid_intervals": per_part[0]["grid_intervals"] if qs.m == 1 else [p["grid_intervals"] for p in per_part],
        "blocks": blocks,
        "direct_blocks": direct,
        "row_breakpoints": [row_counts.get(v, 0) for v in range(dom.n)],
        "max_regions_per_block": regions_max,
        "max_vertices_per_block": vertices_max,
        "total_diagram_vertices": vertices_total,
        "max_pair_crossings": crossings_max,
        "parts": per_part,
        "per_block": per_block,
        "direct_check": {"method": "segment against all edges", "cost_per_query": f"O(n), n={dom.n}"},
        "build_seconds": qs.build_seconds,
    }
