"""Compiled scalar kernels for the block envelope engine.

Functions are addressed by index into flat parameter arrays ``A, B, C, D,
G`` (s-term offset and height, t-term offset and height, geodesic part).
Column active lists are given as ``act_flat[act_off[k]:act_off[k + 1]]``,
bottom to top.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _pair_F(x, ai, bi, aj, bj, G):
    return math.hypot(x + ai, bi) - math.hypot(x + aj, bj) + G


@njit(cache=True)
def _root(ai, bi, aj, bj, G, F0, F1, lo, hi):
    """Root of the increasing pair difference on [lo, hi] with F0 < 0 < F1."""
    # closed form by squaring twice, then safeguarded Newton polish
    K1 = 2.0 * (ai - aj)
    K0 = ai * ai + bi * bi - aj * aj - bj * bj - G * G
    G2 = 4.0 * G * G
    qa = K1 * K1 - G2
    qb = 2.0 * K1 * K0 - 2.0 * G2 * aj
    qc = K0 * K0 - G2 * (aj * aj + bj * bj)
    x = lo - F0 * (hi - lo) / (F1 - F0)
    best = math.inf
    if abs(qa) > 1e-14 * (abs(qb) + abs(qc) + 1.0):
        disc = math.sqrt(max(qb * qb - 4.0 * qa * qc, 0.0))
        q = -0.5 * (qb + math.copysign(disc, qb))
        c1 = q / qa
        c2 = qc / q if q != 0.0 else math.nan
        for c in (c1, c2):
            if c >= lo and c <= hi:
                r = abs(_pair_F(c, ai, bi, aj, bj, G))
                if r < best:
                    best = r
                    x = c
    elif qb != 0.0:
        c = -qc / qb
        if c >= lo and c <= hi:
            x = c
    tol = 1e-13 * max(abs(lo), abs(hi), hi - lo, 1.0)
    for _ in range(40):
        ri = math.hypot(x + ai, bi)
        rj = math.hypot(x + aj, bj)
        f = ri - rj + G
        if f == 0.0:
            break
        if f > 0.0:
            hi = x
        else:
            lo = x
        fp = 0.0
        if ri > 0.0 and rj > 0.0:
            fp = (x + ai) / ri - (x + aj) / rj
        xn = x - f / fp if fp != 0.0 else math.nan
        if not (xn >= lo and xn <= hi):
            xn = 0.5 * (lo + hi)
        step = abs(xn - x)
        x = xn
        if step <= tol:
            break
    return x


@njit(cache=True)
def curve(i, j, tau, A, B, C, D, G, level, keyrank, sig0, sig1, tol):
    """Clamped bisector position between lower function i and upper function j.

    Below the returned s the lower function wins, above it the upper one;
    sig0 means i never wins, sig1 means j never wins.
    """
    g = math.hypot(tau + C[i], D[i]) + G[i] - math.hypot(tau + C[j], D[j]) - G[j]
    F0 = _pair_F(sig0, A[i], B[i], A[j], B[j], g)
    F1 = _pair_F(sig1, A[i], B[i], A[j], B[j], g)
    if level[i] == level[j]:
        Fm = 0.5 * (F0 + F1)
        if abs(Fm) <= tol:
            return sig1 if keyrank[i] < keyrank[j] else sig0
        return sig0 if Fm > 0.0 else sig1
    if F0 >= 0.0:
        return sig0
    if F1 <= 0.0:
        return sig1
    return _root(A[i], B[i], A[j], B[j], g, F0, F1, sig0, sig1)


@njit(cache=True)
def probe_widths(act_flat, act_off, cols, taus, A, B, C, D, G, level, keyrank, sig0, sig1, tol, kmax):
    """Region widths of every active function at each probe (column, tau).

    Returns W (P, kmax), padded with -inf, and the column position of the
    upper-boundary competitor (-1 for the wall).
    """
    P = cols.shape[0]
    W = np.full((P, kmax), -np.inf)
    Larg = np.full((P, kmax), -1, np.int64)
    for p in range(P):
        k = cols[p]
        a0 = act_off[k]
        K = act_off[k + 1] - a0
        tau = taus[p]
        L = np.full(K, sig1)
        U = np.full(K, sig0)
        for r in range(K):
            i = act_flat[a0 + r]
            for q in range(r + 1, K):
                c = curve(i, act_flat[a0 + q], tau, A, B, C, D, G, level, keyrank, sig0, sig1, tol)
                if c < L[r]:
                    L[r] = c
                    Larg[p, r] = q
                if c > U[q]:
                    U[q] = c
        for r in range(K):
            W[p, r] = L[r] - U[r]
    return W, Larg


@njit(cache=True)
def width_one(act_flat, a0, K, r, tau, A, B, C, D, G, level, keyrank, sig0, sig1, tol):
    L = sig1
    U = sig0
    me = act_flat[a0 + r]
    for q in range(K):
        if q < r:
            c = curve(act_flat[a0 + q], me, tau, A, B, C, D, G, level, keyrank, sig0, sig1, tol)
            if c > U:
                U = c
        elif q > r:
            c = curve(me, act_flat[a0 + q], tau, A, B, C, D, G, level, keyrank, sig0, sig1, tol)
            if c < L:
                L = c
    return L - U


@njit(cache=True)
def find_events(act_flat, act_off, cols, rpos, lo, hi, flo, fhi, A, B, C, D, G, level, keyrank,
                sig0, sig1, tol, eps_w, xtol):
    """Where a function's width crosses eps_w inside each bracket.

    False position with the Illinois modification; plain bisection while
    an endpoint sits on the flat zero-width side.
    """
    E = cols.shape[0]
    out = np.empty(E)
    flat = -eps_w
    ftol = 0.5 * eps_w
    for e in range(E):
        k = cols[e]
        a0 = act_off[k]
        K = act_off[k + 1] - a0
        l = lo[e]
        h = hi[e]
        fl = flo[e]
        fh = fhi[e]
        side = 0
        root = 0.5 * (l + h)
        for it in range(200):
            if h - l <= xtol:
                root = 0.5 * (l + h)
                break
            if fl == flat or fh == flat or it % 4 == 3:
                x = 0.5 * (l + h)
            else:
                x = h - fh * (h - l) / (fh - fl)
                if not (x > l and x < h):
                    x = 0.5 * (l + h)
            fx = width_one(act_flat, a0, K, rpos[e], x, A, B, C, D, G, level, keyrank,
                           sig0, sig1, tol) - eps_w
            if abs(fx) <= ftol:
                root = x
                break
            if (fx > 0.0) == (fl > 0.0):
                if side == -1:
                    fh *= 0.5
                l = x
                fl = fx
                side = -1
            else:
                if side == 1:
                    fl *= 0.5
                h = x
                fh = fx
                side = 1
            root = 0.5 * (l + h)
        out[e] = root
    return out


@njit(cache=True)
def competitor_switches(act_flat, act_off, cols, W, Larg, eps_w):
    """Changes of the upper-boundary competitor along consecutive probes of a column.

    Returns rows (owner, previous competitor, new competitor) as function ids.
    """
    P = cols.shape[0]
    kmax = W.shape[1]
    out = np.empty((P * kmax, 3), np.int64)
    n = 0
    prev = np.full(kmax, -1, np.int64)
    for p in range(P):
        k = cols[p]
        if p == 0 or cols[p - 1] != k:
            prev[:] = -1
        a0 = act_off[k]
        K = act_off[k + 1] - a0
        for r in range(K):
            if W[p, r] <= eps_w:
                continue
            cur = Larg[p, r]
            if prev[r] >= 0 and cur >= 0 and prev[r] != cur:
                x = act_flat[a0 + prev[r]]
                y = act_flat[a0 + cur]
                out[n, 0] = act_flat[a0 + r]
                out[n, 1] = min(x, y)
                out[n, 2] = max(x, y)
                n += 1
            prev[r] = cur
    return out[:n]


@njit(cache=True)
def edges_meet_convex(hull, E0, E1, eps):
    """Whether any segment E0[k]E1[k] enters a convex CCW polygon shrunk by eps.

    Clips each segment against the inward half-planes of the hull edges.
    """
    k = hull.shape[0]
    for m in range(E0.shape[0]):
        t0 = 0.0
        t1 = 1.0
        dx = E1[m, 0] - E0[m, 0]
        dy = E1[m, 1] - E0[m, 1]
        for i in range(k):
            ax = hull[i, 0]
            ay = hull[i, 1]
            ex = hull[(i + 1) % k, 0] - ax
            ey = hull[(i + 1) % k, 1] - ay
            L = math.hypot(ex, ey)
            nx = -ey / L
            ny = ex / L
            # inside means n.(x - a) > eps
            f0 = (E0[m, 0] - ax) * nx + (E0[m, 1] - ay) * ny - eps
            fd = dx * nx + dy * ny
            if abs(fd) < 1e-300:
                if f0 <= 0.0:
                    t1 = -1.0
            elif fd > 0.0:
                t0 = max(t0, -f0 / fd)
            else:
                t1 = min(t1, -f0 / fd)
            if t0 >= t1:
                break
        if t0 < t1:
            return True
    return False
