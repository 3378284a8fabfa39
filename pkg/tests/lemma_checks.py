"""Structural checks on computed diagrams: sign scans, curve slopes, angular orders.

Pair checks are batched: each pair of adjacent labels in a slab becomes one
row of parameter arrays and all scans run as array operations.
"""
from __future__ import annotations

import numpy as np

SCAN = 64
FIELDS = ("a", "b", "c", "d", "geo", "s_origin", "t_origin", "v")


def pair_row(fi, fj, s_lo, s_hi, t0, t1) -> list:
    return [float(getattr(fi, k)) for k in FIELDS] + [float(getattr(fj, k)) for k in FIELDS] + [s_lo, s_hi, t0, t1]


def boundary_pairs(diag, s_lo: float, s_hi: float) -> list:
    """Pair rows for every pair of adjacent labels in every slab."""
    out = []
    for m, labels in enumerate(diag.slabs):
        t0, t1 = float(diag.t_breaks[m]), float(diag.t_breaks[m + 1])
        for a, b in zip(labels[:-1], labels[1:]):
            out.append(pair_row(diag.funcs[a], diag.funcs[b], s_lo, s_hi, t0, t1))
    return out


def structure_pair_rows(part, kind="regions") -> list:
    rows = []
    for k, diag in enumerate(part.diagrams):
        if diag.kind != kind:
            continue
        blk = part.blocks[k]
        rows.extend(boundary_pairs(diag, float(part.grid_s.starts[blk.s_interval]),
                                   float(part.grid_s.ends[blk.s_interval])))
    return rows


class PairBatch:
    def __init__(self, rows):
        k = len(FIELDS)
        X = np.asarray(rows, float).reshape(-1, 2 * k + 4)
        self.i = {f: X[:, n] for n, f in enumerate(FIELDS)}
        self.j = {f: X[:, k + n] for n, f in enumerate(FIELDS)}
        self.s_lo, self.s_hi, self.t0, self.t1 = (X[:, 2 * k + n] for n in range(4))
        self.size = len(X)

    def hdiff(self, S, T):
        shape = (-1,) + (1,) * (np.ndim(S) - 1)

        def h(f):
            g = {key: val.reshape(shape) for key, val in f.items()}
            return (np.hypot(S - g["s_origin"] + g["a"], g["b"]) + np.hypot(T - g["t_origin"] + g["c"], g["d"])
                    + g["geo"])

        return h(self.i) - h(self.j)

    def h_tol(self):
        return 1e-12 * (1.0 + np.abs(self.i["geo"]) + np.abs(self.j["geo"]) + (self.s_hi - self.s_lo)
                        + (self.t1 - self.t0) + np.abs(self.s_hi) + np.abs(self.t1))

    def s_tol(self, rel):
        # relative to the interval, floored at float resolution of the parameter
        return rel * (self.s_hi - self.s_lo) + 1e-13 * (1.0 + np.abs(self.s_hi))

    def t_samples(self, k):
        return self.t0[:, None] + (self.t1 - self.t0)[:, None] * ((np.arange(k) + 0.5) / k)[None]

    def gamma(self, T, iters=80):
        """s with h_i = h_j at each t; NaN where no crossing or a wall value is within rounding."""
        lo = np.broadcast_to(self.s_lo[:, None], T.shape).copy()
        hi = np.broadcast_to(self.s_hi[:, None], T.shape).copy()
        flo = self.hdiff(lo, T)
        fhi = self.hdiff(hi, T)
        tol = self.h_tol()[:, None]
        ok = (np.sign(flo) * np.sign(fhi) < 0) & (np.abs(flo) > tol) & (np.abs(fhi) > tol)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            fm = self.hdiff(mid, T)
            same = np.sign(fm) == np.sign(flo)
            lo = np.where(same, mid, lo)
            flo = np.where(same, fm, flo)
            hi = np.where(same, hi, mid)
        return np.where(ok, 0.5 * (lo + hi), np.nan)


def robust_gamma(fi, fj, t, s_lo, s_hi):
    t = np.asarray(t, float)
    return PairBatch([pair_row(fi, fj, s_lo, s_hi, float(t.min()), float(t.max()))]).gamma(t[None])[0]


def _ffill(x, valid):
    idx = np.where(valid, np.arange(x.shape[-1])[None], 0)
    np.maximum.accumulate(idx, axis=-1, out=idx)
    return np.take_along_axis(x, idx, axis=-1), np.take_along_axis(valid, idx, axis=-1)


def sign_changes(batch: PairBatch, k: int = SCAN) -> np.ndarray:
    """Per pair, the most sign changes of h_i - h_j along s over k sampled t."""
    T = batch.t_samples(k)
    s = batch.s_lo[:, None] + (batch.s_hi - batch.s_lo)[:, None] * np.linspace(0, 1, k)[None]
    g = batch.hdiff(s[:, None, :], T[:, :, None])
    sg = np.sign(g) * (np.abs(g) > batch.h_tol()[:, None, None])
    P = batch.size
    filled, valid = _ffill(sg.reshape(P * k, k), (sg != 0).reshape(P * k, k))
    ch = (filled[:, 1:] != filled[:, :-1]) & valid[:, 1:] & valid[:, :-1]
    return ch.sum(axis=1).reshape(P, k).max(axis=1)


def slope_violations(batch: PairBatch, k: int = SCAN) -> np.ndarray:
    """Per pair: gamma not monotone in t, or not constant when both share the root v."""
    s = batch.gamma(batch.t_samples(k))
    fin = np.isfinite(s)
    filled, valid = _ffill(np.where(fin, s, 0.0), fin)
    d = np.where(valid[:, 1:] & valid[:, :-1], np.diff(filled, axis=1), 0.0)
    tol = batch.s_tol(1e-9)[:, None]
    mono = np.all(d >= -tol, axis=1) | np.all(d <= tol, axis=1)
    lo = np.where(fin, s, np.inf).min(axis=1)
    hi = np.where(fin, s, -np.inf).max(axis=1)
    flat = ~(hi - lo > tol[:, 0])
    return np.where(batch.i["v"] == batch.j["v"], ~flat, ~mono)


def derivative_violations(batch: PairBatch, k: int = SCAN) -> np.ndarray:
    """Per pair: observed slope sign differs from (cos phi_j - cos phi_i) / (cos theta_i - cos theta_j)."""
    T = batch.t_samples(k)
    s = batch.gamma(T)
    Tm = 0.5 * (T[:, 1:] + T[:, :-1])
    sm = batch.gamma(Tm)
    ds = np.diff(s, axis=1)

    def cos_s(f):
        x = sm - f["s_origin"][:, None] + f["a"][:, None]
        return x / np.hypot(x, f["b"][:, None])

    def cos_t(f):
        x = Tm - f["t_origin"][:, None] + f["c"][:, None]
        return x / np.hypot(x, f["d"][:, None])

    with np.errstate(invalid="ignore", divide="ignore"):
        num = cos_t(batch.j) - cos_t(batch.i)
        den = cos_s(batch.i) - cos_s(batch.j)
        use = (np.isfinite(ds) & (np.abs(ds) > batch.s_tol(1e-7)[:, None]) & np.isfinite(sm)
               & (np.abs(num) > 1e-12) & (np.abs(den) > 1e-12))
        wrong = use & (np.sign(num / den) != np.sign(ds))
    return wrong.any(axis=1)


def lemma_counts(rows, chunk: int = 1000) -> dict:
    """Violation counts over pair rows."""
    out = {"pairs": 0, "sign_changes": 0, "slope": 0, "derivative": 0, "max_sign_changes": 0}
    for a in range(0, len(rows), chunk):
        b = PairBatch(rows[a:a + chunk])
        sc = sign_changes(b)
        out["pairs"] += b.size
        out["sign_changes"] += int(np.sum(sc > 1))
        out["max_sign_changes"] = max(out["max_sign_changes"], int(sc.max(initial=0)))
        out["slope"] += int(slope_violations(b).sum())
        out["derivative"] += int(derivative_violations(b).sum())
    return out


def angular_orders(domain, grid, samples: int = 10) -> int:
    """Intervals whose visible corner set or its angular order changes across sampled s."""
    bad = 0
    C = domain.corners
    for k in range(grid.size):
        e = domain.param.unit[int(grid.carrier[k])]
        ref = None
        for s in grid.starts[k] + (grid.ends[k] - grid.starts[k]) * (np.arange(samples) + 0.5) / samples:
            p = np.asarray(domain.param_to_point(s))
            vis = np.nonzero(domain.visible_mask(p))[0]
            rel = C[vis] - p
            # visible corners lie left of the edge; clamping keeps the start corner at pi
            ang = np.arctan2(np.maximum(e[0] * rel[:, 1] - e[1] * rel[:, 0], 0.0), rel @ e)
            order = tuple(int(vis[i]) for i in np.lexsort((vis, np.round(ang, 12))))
            if ref is None:
                ref = order
                if not np.array_equal(np.sort(vis), np.nonzero(grid.visible[k])[0]):
                    bad += 1
                    break
            elif order != ref:
                bad += 1
                break
    return bad
