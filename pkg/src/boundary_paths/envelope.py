"""Per-block distance functions, bisectors, envelopes and minimization diagrams.

Within a block the s-range is one grid interval on carrier S and the t-range
a run of grid intervals (columns) on carrier T.  Local coordinates are
sigma = s - s_origin and tau = t - t_origin, and every candidate path length is

    h_i(s, t) = hypot(sigma + a_i, b_i) + hypot(tau + c_i, d_i) + D_i.

At fixed t the functions restricted to the s-range behave like
pseudolines sorted by the angle at which u_i is seen from p(s): the pair
difference h_i - h_j is strictly monotone in s.  Hence the region of i at
fixed t is the interval between the highest bisector with a function ranked
below i and the lowest bisector with a function ranked above it, and the
diagram at fixed t is fully described by the bottom-to-top list of present
labels.  The diagram over the block is a sequence of t-slabs, each with a
constant label list; slab boundaries are the t where some region appears or
vanishes.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as kern
from .errors import CoverageGap, DisjointSubdomains, OutsideSubdomain

DIRECT = "direct"
EMPTY = "empty"
REGIONS = "regions"


@dataclass(frozen=True)
class PartialFunc:
    """One candidate path family p(s) -> u -> ... -> v -> p(t) on a sub-rectangle."""

    index: int
    u: int
    v: int
    geo: float
    a: float
    b: float
    c: float
    d: float
    s_origin: float
    t_origin: float
    s_lo: float
    s_hi: float
    t_lo: float
    t_hi: float
    col_lo: int
    col_hi: int  # exclusive

    @property
    def key(self) -> tuple[int, int]:
        return (self.u, self.v)

    def value(self, s: float, t: float) -> float:
        return (math.hypot(s - self.s_origin + self.a, self.b)
                + math.hypot(t - self.t_origin + self.c, self.d) + self.geo)

    def contains(self, s: float, t: float, tol: float = 0.0) -> bool:
        return (self.s_lo - tol <= s <= self.s_hi + tol) and (self.t_lo - tol <= t <= self.t_hi + tol)

    def to_list(self) -> list:
        return [self.index, self.u, self.v, self.geo, self.a, self.b, self.c, self.d, self.s_origin,
                self.t_origin, self.s_lo, self.s_hi, self.t_lo, self.t_hi, self.col_lo, self.col_hi]

    @classmethod
    def from_list(cls, x) -> "PartialFunc":
        return cls(int(x[0]), int(x[1]), int(x[2]), *map(float, x[3:14]), int(x[14]), int(x[15]))


def carrier_constants(carrier, point) -> tuple[float, float]:
    """(a, b) with hypot(sigma + a, b) = |carrier(sigma) - point|."""
    a, b = carrier_constants_all(carrier, np.asarray(point, float)[None])
    return float(a[0]), float(b[0])


def carrier_constants_all(carrier, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rel = np.asarray(points, float) - carrier.a
    e = carrier.unit
    return -(rel @ e), np.abs(e[0] * rel[:, 1] - e[1] * rel[:, 0])


def eval_h(f: PartialFunc, s: float, t: float, tol: float = 1e-9) -> float:
    if not f.contains(s, t, tol):
        raise OutsideSubdomain(f"({s}, {t}) outside the subdomain of function {f.index}")
    return f.value(s, t)


def partial_functions(block, grid_s, grid_t, locus_s, locus_t, roots: np.ndarray,
                      dist: np.ndarray, corners: np.ndarray,
                      visible: Sequence[int] | None = None, consts: dict | None = None) -> list[PartialFunc]:
    """One function per u in V_s and per maximal run of columns sharing the root of u.

    ``consts`` caches carrier constants of all corners per carrier object.
    """
    cs = locus_s.carriers[grid_s.carrier[block.s_interval]]
    ct = locus_t.carriers[block.carrier_t]
    consts = {} if consts is None else consts
    for c in (cs, ct):
        if id(c) not in consts:
            a, b = carrier_constants_all(c, corners)
            consts[id(c)] = (a.tolist(), b.tolist())
    sa, sb = consts[id(cs)]
    tc, td = consts[id(ct)]
    s_lo = float(grid_s.starts[block.s_interval])
    s_hi = float(grid_s.ends[block.s_interval])
    t_first = block.t_first
    ncol = block.t_last - t_first + 1
    us = grid_s.visible_set(block.s_interval) if visible is None else list(visible)
    t_starts = grid_t.starts
    t_ends = grid_t.ends
    out = []
    for u in us:
        run = roots[u, t_first:t_first + ncol].tolist()
        k = 0
        while k < ncol:
            v = run[k]
            j = k
            while j + 1 < ncol and run[j + 1] == v:
                j += 1
            out.append(PartialFunc(len(out), int(u), int(v), float(dist[u, v]), sa[u], sb[u], tc[v], td[v],
                                   float(cs.offset), float(ct.offset), s_lo, s_hi,
                                   float(t_starts[t_first + k]), float(t_ends[t_first + j]), k, j + 1))
            k = j + 1
    return out


class _BlockEngine:
    """Vectorized evaluation of all region widths inside one block."""

    def __init__(self, funcs: Sequence[PartialFunc], sig0: float, sig1: float, col_tau: np.ndarray,
                 eps_env: float, tol_h: float, prune: bool = True):
        self.funcs = funcs
        self.sig0 = float(sig0)
        self.sig1 = float(sig1)
        self.col_tau = col_tau  # (C, 2) local tau ranges of the columns
        self.eps_w = eps_env
        self.tol_h = tol_h
        F = len(funcs)
        ar = lambda name: np.array([getattr(f, name) for f in funcs], float)
        self.a, self.b, self.c, self.d, self.D = ar("a"), ar("b"), ar("c"), ar("d"), ar("geo")
        self.keys = [f.key for f in funcs]
        kr = sorted(range(F), key=lambda i: self.keys[i])
        self.keyrank = np.empty(F, np.int64)
        self.keyrank[kr] = np.arange(F)
        sm = 0.5 * (self.sig0 + self.sig1)
        r = np.hypot(sm + self.a, self.b)
        slope = np.where(r > 0, (sm + self.a) / np.where(r > 0, r, 1.0), 1.0)
        collinear = self.b <= 1e-12 * max(abs(self.sig1 - self.sig0), 1.0)
        slope = np.where(collinear, np.sign(sm + self.a), slope)
        # bottom to top: decreasing slope of the s-term; ties by key
        order = sorted(range(F), key=lambda i: (-slope[i], self.keys[i]))
        self.rank = np.empty(F, int)
        self.rank[order] = np.arange(F)
        lev = np.empty(F, int)
        prev = None
        level = -1
        for i in order:
            sl = (bool(collinear[i]), float(slope[i]))
            if not (prev is not None and sl[0] and prev[0] and sl[1] == prev[1]):
                level += 1
            lev[i] = level
            prev = sl
        self.level = lev.astype(np.int64)
        self.collinear = collinear
        self.slope = slope
        C = len(col_tau)
        col_lo = np.array([f.col_lo for f in funcs])
        col_hi = np.array([f.col_hi for f in funcs])
        ks = np.arange(C)
        mask = (col_lo[:, None] <= ks[None, :]) & (ks[None, :] < col_hi[:, None])
        if prune:
            mask &= self._keep(mask, col_tau)
        # rows in rank order so each column lists its functions bottom to top
        mask = mask[order]
        order = np.array(order, np.int64)
        self.active = [order[mask[:, k]] for k in range(C)]
        sizes = mask.sum(axis=0)
        self.act_off = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
        self.act_flat = order[np.nonzero(mask.T)[1]] if C else np.zeros(0, np.int64)
        self.kmax = int(sizes.max()) if C else 0

    def _keep(self, mask, col_tau):
        """Drop functions whose lower bound exceeds some other function's upper bound per column."""
        a, b, c, d, D = self.a[:, None], self.b[:, None], self.c[:, None], self.d[:, None], self.D[:, None]
        s0, s1 = self.sig0, self.sig1
        t0 = col_tau[None, :, 0]
        t1 = col_tau[None, :, 1]
        minA = np.hypot(np.clip(-a, s0, s1) + a, b)
        maxA = np.maximum(np.hypot(s0 + a, b), np.hypot(s1 + a, b))
        minB = np.hypot(np.clip(-c, t0, t1) + c, d)
        maxB = np.maximum(np.hypot(t0 + c, d), np.hypot(t1 + c, d))
        lb = minA + minB + D
        ub = np.where(mask, maxA + maxB + D, np.inf)
        return lb <= ub.min(axis=0)[None, :] + self.tol_h

    def _kargs(self):
        return (self.a, self.b, self.c, self.d, self.D, self.level, self.keyrank, self.sig0, self.sig1,
                self.tol_h)

    def widths(self, cols: np.ndarray, taus: np.ndarray):
        """Region widths at probes, shape (P, kmax) padded with -inf.

        Also returns the column position of each function's upper-boundary
        competitor (-1 for the wall).
        """
        cols = np.ascontiguousarray(cols, np.int64)
        taus = np.ascontiguousarray(taus, float)
        return kern.probe_widths(self.act_flat, self.act_off, cols, taus, *self._kargs(), self.kmax)

    def events(self, cols, rpos, lo, hi, flo, fhi, eps_w, xtol):
        return kern.find_events(self.act_flat, self.act_off, np.asarray(cols, np.int64), np.asarray(rpos, np.int64),
                             np.asarray(lo, float), np.asarray(hi, float), np.asarray(flo, float),
                             np.asarray(fhi, float), *self._kargs(), eps_w, xtol)


@dataclass
class BlockDiagram:
    """Minimization diagram of one block as t-slabs with bottom-to-top label lists."""

    block_id: int
    kind: str
    funcs: list
    t_breaks: np.ndarray
    slabs: list  # tuple of function indices per slab, bottom to top
    stats: dict = field(default_factory=dict)

    def slab_of(self, t: float) -> int:
        k = bisect_right(self.t_breaks, t) - 1
        return min(max(k, 0), len(self.slabs) - 1)

    def locate(self, s: float, t: float):
        """Winning PartialFunc at (s, t); None for direct or empty blocks."""
        if self.kind != REGIONS:
            return None
        labels = self.slabs[self.slab_of(t)]
        lo, hi = 0, len(labels) - 1
        funcs = self.funcs
        while lo < hi:
            mid = (lo + hi) // 2
            fi = funcs[labels[mid]]
            fj = funcs[labels[mid + 1]]
            hi_, hj_ = fi.value(s, t), fj.value(s, t)
            if hi_ > hj_ or (hi_ == hj_ and fj.key < fi.key):
                lo = mid + 1
            else:
                hi = mid
        return funcs[labels[lo]]

    @property
    def region_labels(self) -> set:
        out = set()
        for sl in self.slabs:
            out.update(sl)
        return out


def block_diagram(block_id: int, funcs: Sequence[PartialFunc], s_lo: float, s_hi: float,
                  col_t: np.ndarray, eps_env: float, curve_res: float = 1.0 / 16,
                  check: bool = False, tol_h: float | None = None) -> BlockDiagram:
    """Assemble the diagram of one block.

    ``col_t`` holds the global (t_lo, t_hi) of each column.  Regions appear
    and vanish where a function's width (upper minus lower boundary)
    crosses zero; these t are located on a sample grid of ``curve_res``
    relative spacing per column and refined to ``eps_env``.
    """
    col_t = np.asarray(col_t, float).reshape(-1, 2)
    if not funcs:
        return BlockDiagram(block_id, EMPTY, [], np.array([col_t[0, 0], col_t[-1, 1]]), [()], {})
    f0 = funcs[0]
    if tol_h is None:
        tol_h = 1e-12 * max(1.0, max(f.geo for f in funcs) + abs(s_hi - s_lo) + abs(col_t[-1, 1] - col_t[0, 0]))
    sig0 = s_lo - f0.s_origin
    sig1 = s_hi - f0.s_origin
    col_tau = col_t - f0.t_origin
    eng = _BlockEngine(funcs, sig0, sig1, col_tau, eps_env, tol_h)
    C = len(col_tau)
    nsamp = max(3, int(math.ceil(1.0 / curve_res)) + 1)
    eps_w = eps_env

    grid = col_tau[:, :1] + np.linspace(0.0, 1.0, nsamp)[None, :] * (col_tau[:, 1:] - col_tau[:, :1])
    grid[:, -1] = col_tau[:, 1]
    samples = list(grid)
    stats = {"refine_rounds": 0}
    switches = np.zeros((0, 3), np.int64)
    for rnd in range(4):
        stats["refine_rounds"] = rnd + 1
        cols = np.concatenate([np.full(len(s), k) for k, s in enumerate(samples)])
        taus = np.concatenate(samples)
        W, Larg = eng.widths(cols, taus)
        switches = kern.competitor_switches(eng.act_flat, eng.act_off, cols.astype(np.int64), W, Larg, eps_w)
        # brackets where a function's presence flips
        pres = W > eps_w
        flip = (pres[1:] != pres[:-1]) & (cols[1:] == cols[:-1])[:, None]
        pm, pr = np.nonzero(flip)
        events = [[] for _ in range(C)]
        if pm.size:
            roots = eng.events(cols[pm], pr, taus[pm], taus[pm + 1], W[pm, pr] - eps_w, W[pm + 1, pr] - eps_w,
                               eps_w, eps_env)
            for k, x in zip(cols[pm], roots):
                events[k].append(float(x))
        # slabs per column, labelled at midpoints, checked at quarter points
        bounds = []
        for k in range(C):
            if not events[k]:
                bounds.append(col_tau[k].copy())
                continue
            b = np.unique(np.concatenate(([col_tau[k, 0]], events[k], [col_tau[k, 1]])))
            keep = np.concatenate(([True], np.diff(b) > eps_env))
            b = b[keep]
            b[-1] = col_tau[k, 1]
            if len(b) < 2:
                b = np.array([col_tau[k, 0], col_tau[k, 1]])
            bounds.append(b)
        per_col = np.array([len(b) - 1 for b in bounds])
        pc = np.repeat(np.arange(C), per_col)
        lo_all = np.concatenate([b[:-1] for b in bounds])
        hi_all = np.concatenate([b[1:] for b in bounds])
        pt = np.concatenate([lo_all + f * (hi_all - lo_all) for f in (0.5, 0.25, 0.75)])
        Wp, _ = eng.widths(np.tile(pc, 3), pt)
        pres = Wp > eps_w
        total = len(pc)
        mid, q1, q3 = pres[:total], pres[total:2 * total], pres[2 * total:]
        mismatch = (mid != q1).any(axis=1) | (mid != q3).any(axis=1)
        bad_cols = set(int(k) for k in pc[mismatch])
        slab_labels = []
        off = 0
        for k in range(C):
            act = eng.active[k]
            Kk = len(act)
            slab_labels.append([tuple(int(x) for x in act[mid[off + m, :Kk]]) for m in range(per_col[k])])
            off += per_col[k]
        if not bad_cols or rnd == 3:
            break
        for k in bad_cols:
            b = bounds[k]
            extra = np.concatenate([b[:-1] + f * (b[1:] - b[:-1]) for f in (0.25, 0.5, 0.75)])
            samples[k] = np.unique(np.concatenate((samples[k], extra)))
    stats["unresolved"] = len(bad_cols)

    # merge columns into block slabs
    t_breaks = [float(bounds[0][0] + f0.t_origin)]
    slabs = []
    for k, b in enumerate(bounds):
        for m in range(len(b) - 1):
            lab = slab_labels[k][m]
            if not lab:
                raise CoverageGap(f"block {block_id}: no region at t={b[m] + f0.t_origin:.12g}")
            if slabs and slabs[-1] == lab:
                t_breaks[-1] = float(b[m + 1] + f0.t_origin)
                continue
            slabs.append(lab)
            t_breaks.append(float(b[m + 1] + f0.t_origin))
    t_breaks[-1] = float(col_t[-1, 1])
    t_breaks[0] = float(col_t[0, 0])
    regions = set()
    for sl in slabs:
        regions.update(sl)
    if len(switches):
        _, counts = np.unique(switches, axis=0, return_counts=True)
        max_cross = int(counts.max())
    else:
        max_cross = 0
    stats.update({
        "functions": len(funcs),
        "regions": len(regions),
        "slabs": len(slabs),
        "vertices": _vertex_count(slabs),
        "max_pair_crossings": max_cross,
    })
    diag = BlockDiagram(block_id, REGIONS, list(funcs), np.array(t_breaks), slabs, stats)
    if check:
        verify_diagram(diag, s_lo, s_hi, tol=1e-9)
    return diag


def _vertex_count(slabs) -> int:
    """Vertices of the slab subdivision: region-boundary endpoints at slab walls plus events."""
    v = 0
    for sl in slabs:
        v += 2 * (len(sl) - 1)
    return v + max(len(slabs) - 1, 0)


def direct_diagram(block_id: int, t_lo: float, t_hi: float, funcs=None) -> BlockDiagram:
    return BlockDiagram(block_id, DIRECT, list(funcs or []), np.array([t_lo, t_hi]), [()],
                        {"functions": len(funcs or []), "regions": 1, "slabs": 1, "vertices": 0,
                         "max_pair_crossings": 0})


def verify_diagram(diag: BlockDiagram, s_lo: float, s_hi: float, samples: int = 200, tol: float = 1e-9,
                   seed: int = 0) -> int:
    """Check sampled points against direct minimization; raises CoverageGap on mismatch."""
    if diag.kind != REGIONS:
        return 0
    rng = np.random.default_rng(seed)
    t0, t1 = float(diag.t_breaks[0]), float(diag.t_breaks[-1])
    bad = 0
    for _ in range(samples):
        s = s_lo + (s_hi - s_lo) * rng.random()
        t = t0 + (t1 - t0) * rng.random()
        best = min(f.value(s, t) for f in diag.funcs if f.t_lo <= t <= f.t_hi)
        got = diag.locate(s, t).value(s, t)
        if got - best > tol * (1.0 + best):
            bad += 1
    if bad:
        raise CoverageGap(f"block {diag.block_id}: {bad} of {samples} samples not minimal")
    return bad


# ---------------------------------------------------------------------------
# pairwise operations on explicit curves


@dataclass
class BisectorCurve:
    """Locus h_i = h_j over the common t-range, sampled as s = gamma(t).

    ``kind`` is "empty", "t-parallel" (constant s) or "monotone".  Samples
    with no solution inside the s-range are NaN.
    """

    i: int
    j: int
    kind: str
    t: np.ndarray
    s: np.ndarray
    t_lo: float
    t_hi: float
    s_lo: float
    s_hi: float


@dataclass
class ExtendedBisector:
    """Bisector clamped to the s-range and classified for its owner.

    ``role`` is "L" (owner is better below: the curve bounds the owner's
    region from above) or "U" (owner better above).
    """

    owner: int
    other: int
    role: str
    t: np.ndarray
    s: np.ndarray
    curve: BisectorCurve


@dataclass
class EnvelopeChain:
    side: str
    t: np.ndarray
    s: np.ndarray
    labels: np.ndarray  # curve id per sample, -1 where no curve constrains
    vertices: list  # t of label switches, refined


@dataclass
class MinRegion:
    i: int
    pieces: list  # (t_lo, t_hi) runs where the region is non-empty
    lower: EnvelopeChain
    upper: EnvelopeChain


def _pair_geometry(fi: PartialFunc, fj: PartialFunc):
    if fi.u == fj.u:
        raise DisjointSubdomains(f"functions {fi.index} and {fj.index} share u={fi.u}")
    t_lo = max(fi.t_lo, fj.t_lo)
    t_hi = min(fi.t_hi, fj.t_hi)
    if t_hi <= t_lo or fi.s_lo != fj.s_lo:
        raise DisjointSubdomains(f"functions {fi.index} and {fj.index} do not overlap")
    return t_lo, t_hi


def _hdiff(fi, fj, s, t):
    return (np.hypot(s - fi.s_origin + fi.a, fi.b) + np.hypot(t - fi.t_origin + fi.c, fi.d) + fi.geo
            - np.hypot(s - fj.s_origin + fj.a, fj.b) - np.hypot(t - fj.t_origin + fj.c, fj.d) - fj.geo)


def _gamma(fi, fj, t, s_lo, s_hi, iters=80):
    """s in [s_lo, s_hi] with h_i = h_j at each t by bisection on the sign along s; NaN if none."""
    t = np.asarray(t, float)
    lo = np.full(t.shape, s_lo)
    hi = np.full(t.shape, s_hi)
    flo = _hdiff(fi, fj, lo, t)
    fhi = _hdiff(fi, fj, hi, t)
    ok = np.sign(flo) * np.sign(fhi) < 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = _hdiff(fi, fj, mid, t)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return np.where(ok, 0.5 * (lo + hi), np.nan)


def bisector(fi: PartialFunc, fj: PartialFunc, samples: int = 65, curve_res: float = 1e-3) -> BisectorCurve:
    t_lo, t_hi = _pair_geometry(fi, fj)
    s_lo, s_hi = fi.s_lo, fi.s_hi
    if fi.v == fj.v:
        # t drops out: |p(s)u_i| - |p(s)u_j| = D_j - D_i
        ss = np.linspace(s_lo, s_hi, 257)
        g = _hdiff(fi, fj, ss, np.full_like(ss, t_lo))
        ch = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
        zero = np.nonzero(g == 0)[0]
        if len(ch) == 0 and len(zero) == 0:
            return BisectorCurve(fi.index, fj.index, "empty", np.array([t_lo, t_hi]),
                                 np.array([np.nan, np.nan]), t_lo, t_hi, s_lo, s_hi)
        if len(ch):
            s_star = float(_gamma(fi, fj, np.array([t_lo]), ss[ch[0]], ss[ch[0] + 1])[0])
        else:
            s_star = float(ss[zero[0]])
        return BisectorCurve(fi.index, fj.index, "t-parallel", np.array([t_lo, t_hi]),
                             np.array([s_star, s_star]), t_lo, t_hi, s_lo, s_hi)
    t = np.linspace(t_lo, t_hi, samples)
    s = _gamma(fi, fj, t, s_lo, s_hi)
    # adaptive refinement: split where the curve jumps by more than the resolution
    res = curve_res * (s_hi - s_lo)
    for _ in range(12):
        ds = np.abs(np.diff(s))
        exist = np.isfinite(s)
        need = (np.nan_to_num(ds, nan=0.0) > res) | (exist[1:] != exist[:-1])
        need &= np.diff(t) > 1e-9 * (t_hi - t_lo)
        if not need.any():
            break
        tm = 0.5 * (t[:-1] + t[1:])[need]
        t = np.concatenate((t, tm))
        s = np.concatenate((s, _gamma(fi, fj, tm, s_lo, s_hi)))
        o = np.argsort(t)
        t, s = t[o], s[o]
    kind = "monotone" if np.isfinite(s).any() else "empty"
    return BisectorCurve(fi.index, fj.index, kind, t, s, t_lo, t_hi, s_lo, s_hi)


def extend_and_classify(curve: BisectorCurve, fi: PartialFunc, fj: PartialFunc):
    """Clamp the curve to the s-range over its full t-extent and classify it for both owners.

    Where no solution exists the winner is uniform along s and the curve is
    placed on the wall that leaves the loser nothing.
    """
    s_lo, s_hi = curve.s_lo, curve.s_hi
    t = curve.t
    gap = 1e-7 * (s_hi - s_lo)
    if curve.kind == "empty":
        t = np.linspace(curve.t_lo, curve.t_hi, 5)
    s = np.array(curve.s if curve.kind != "empty" else np.full(len(t), np.nan), float)
    # i better just above the curve <=> h_j - h_i > 0 there
    probe_s = np.where(np.isfinite(s), np.minimum(s + gap, s_hi), 0.5 * (s_lo + s_hi))
    above_i = _hdiff(fj, fi, probe_s, t) > 0
    finite = np.isfinite(s)
    if finite.any():
        i_above = bool(np.median(above_i[finite]) > 0.5) if finite.sum() > 1 else bool(above_i[finite][0])
    else:
        # compare slopes of the s-terms: the steeper one wins below
        sm = 0.5 * (s_lo + s_hi)
        gi = (sm - fi.s_origin + fi.a) / max(math.hypot(sm - fi.s_origin + fi.a, fi.b), 1e-300)
        gj = (sm - fj.s_origin + fj.a) / max(math.hypot(sm - fj.s_origin + fj.a, fj.b), 1e-300)
        i_above = gi < gj
    # clamp where no crossing: the loser is killed
    loser_i = _hdiff(fi, fj, np.full(len(t), 0.5 * (s_lo + s_hi)), t) > 0
    # lower function (better below) is the one not above
    if i_above:
        fill = np.where(loser_i, s_hi, s_lo)  # i loses: its lower bound goes to the top wall
    else:
        fill = np.where(loser_i, s_lo, s_hi)
    c = np.where(finite, s, fill)
    role_i = "U" if i_above else "L"
    role_j = "L" if i_above else "U"
    return (ExtendedBisector(fi.index, fj.index, role_i, t, c, curve),
            ExtendedBisector(fj.index, fi.index, role_j, t, c, curve))


def _resample(curve: ExtendedBisector, t: np.ndarray, default: float) -> np.ndarray:
    inside = (t >= curve.t[0]) & (t <= curve.t[-1])
    vals = np.interp(t, curve.t, curve.s)
    return np.where(inside, vals, default)


def envelope(curves: Sequence[ExtendedBisector], side: str, t: np.ndarray | None = None,
             s_wall: float | None = None) -> EnvelopeChain:
    """Divide-and-conquer lower ("lower") or upper ("upper") envelope on a common t-grid."""
    if t is None:
        t = np.unique(np.concatenate([c.t for c in curves])) if curves else np.zeros(0)
    if s_wall is None:
        s_wall = np.inf if side == "lower" else -np.inf
    pick = np.minimum if side == "lower" else np.maximum

    def rec(lo, hi):
        if hi - lo == 0:
            return np.full(len(t), s_wall), np.full(len(t), -1)
        if hi - lo == 1:
            c = curves[lo]
            vals = _resample(c, t, s_wall)
            return vals, np.where(vals != s_wall, c.other, -1)
        mid = (lo + hi) // 2
        va, la = rec(lo, mid)
        vb, lb = rec(mid, hi)
        v = pick(va, vb)
        take_a = v == va
        return v, np.where(take_a, la, lb)

    vals, labels = rec(0, len(curves))
    verts = []
    for m in np.nonzero(labels[1:] != labels[:-1])[0]:
        verts.append(0.5 * (t[m] + t[m + 1]))
    return EnvelopeChain(side, t, vals, labels, verts)


def min_region(i: int, lower: EnvelopeChain, upper: EnvelopeChain) -> MinRegion:
    """Runs of t where the region of i (below ``lower``, above ``upper``) is non-empty."""
    t = lower.t
    ok = lower.s > upper.s
    pieces = []
    m = 0
    while m < len(t):
        if not ok[m]:
            m += 1
            continue
        j = m
        while j + 1 < len(t) and ok[j + 1]:
            j += 1
        pieces.append((float(t[m]), float(t[j])))
        m = j + 1
    return MinRegion(i, pieces, lower, upper)


def region_of(i: int, funcs: Sequence[PartialFunc], samples: int = 65) -> MinRegion:
    """Reference construction of M(i) through bisectors and envelopes."""
    fi = funcs[i]
    Ls, Us = [], []
    for fj in funcs:
        if fj.index == i or fj.u == fi.u:
            continue
        if min(fi.t_hi, fj.t_hi) <= max(fi.t_lo, fj.t_lo):
            continue
        cur = bisector(fi, fj, samples)
        ei, _ = extend_and_classify(cur, fi, fj)
        (Ls if ei.role == "L" else Us).append(ei)
    t = np.linspace(fi.t_lo, fi.t_hi, samples)
    lower = envelope(Ls, "lower", t, fi.s_hi)
    upper = envelope(Us, "upper", t, fi.s_lo)
    return min_region(i, lower, upper)
