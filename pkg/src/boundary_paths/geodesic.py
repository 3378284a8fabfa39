"""Visibility graph, corner-to-corner geodesics and the brute-force oracle."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .domain import Point2, PolygonalDomain, polyline_length
from .errors import DisconnectedFreeSpace

TIE_REL = 1e-12


@dataclass
class VisibilityGraph:
    n: int
    adj: np.ndarray  # (n, n) bool, symmetric, False on the diagonal
    weight: np.ndarray  # (n, n) Euclidean lengths

    def degree(self, u: int) -> int:
        return int(self.adj[u].sum())

    def edges(self):
        iu, iv = np.nonzero(np.triu(self.adj, 1))
        return [(int(a), int(b), float(self.weight[a, b])) for a, b in zip(iu, iv)]


@dataclass
class GeodesicTable:
    dist: np.ndarray  # (n, n)
    pred: np.ndarray  # pred[u, v]: corner before v on the chosen u -> v path (-1 for v == u)

    def path(self, u: int, v: int) -> list[int]:
        seq = [v]
        while seq[-1] != u:
            seq.append(int(self.pred[u, seq[-1]]))
        return seq[::-1]


@dataclass
class ShortestPathTree:
    source: Point2
    parent: np.ndarray  # parent corner per corner, -1 if attached to the source
    dist: np.ndarray


def build_visibility_graph(domain: PolygonalDomain) -> VisibilityGraph:
    n = domain.n
    iu, iv = np.triu_indices(n, 1)
    C = domain.corners
    vis = domain.visible_pairs(C[iu], C[iv])
    adj = np.zeros((n, n), bool)
    adj[iu, iv] = vis
    adj[iv, iu] = vis
    W = np.hypot(C[:, None, 0] - C[None, :, 0], C[:, None, 1] - C[None, :, 1])
    return VisibilityGraph(n, adj, W)


def _dijkstra(n, adj, W, source_dist, tol):
    """Dense Dijkstra with lexicographic tie-break on the corner sequence.

    ``source_dist`` holds the initial label of every corner (inf when not
    directly reachable); the returned ``pred`` is -1 for corners whose
    chosen path starts at them directly.
    """
    dist = np.array(source_dist, float)
    paths: list = [(i,) if math.isfinite(dist[i]) else None for i in range(n)]
    pred = np.full(n, -1)
    done = np.zeros(n, bool)
    for _ in range(n):
        cand = np.where(done, np.inf, dist)
        u = int(np.argmin(cand))
        if not math.isfinite(cand[u]):
            break
        # among near-ties pick the lexicographically smallest path
        near = np.nonzero(~done & (dist <= cand[u] + tol))[0]
        if len(near) > 1:
            u = min(near, key=lambda k: (paths[k], k))
        done[u] = True
        nb = np.nonzero(adj[u] & ~done)[0]
        for v in nb:
            nd = dist[u] + W[u, v]
            newp = paths[u] + (int(v),)
            if nd < dist[v] - tol or (nd <= dist[v] + tol and (paths[v] is None or newp < paths[v])):
                dist[v] = nd
                paths[v] = newp
                pred[v] = u
    return dist, pred


def all_pairs_corner_distances(graph: VisibilityGraph) -> GeodesicTable:
    n = graph.n
    scale = float(graph.weight.max()) if n else 1.0
    tol = TIE_REL * max(scale, 1.0)
    dist = np.zeros((n, n))
    pred = np.full((n, n), -1)
    for u in range(n):
        init = np.full(n, np.inf)
        init[u] = 0.0
        d, p = _dijkstra(n, graph.adj, graph.weight, init, tol)
        if not np.isfinite(d).all():
            raise DisconnectedFreeSpace(f"corner {u} cannot reach every corner")
        dist[u] = d
        pred[u] = p
        pred[u, u] = -1
    # enforce exact symmetry; both directions are equal up to rounding
    dist = np.minimum(dist, dist.T)
    return GeodesicTable(dist, pred)


def spt(domain: PolygonalDomain, graph: VisibilityGraph, source) -> ShortestPathTree:
    domain._require_inside(source)
    x = np.asarray(source, float)
    vis = domain.visible_mask(x)
    d0 = np.where(vis, np.hypot(*(domain.corners - x).T), np.inf)
    tol = TIE_REL * max(float(graph.weight.max()), 1.0)
    dist, pred = _dijkstra(graph.n, graph.adj, graph.weight, d0, tol)
    return ShortestPathTree(Point2(float(x[0]), float(x[1])), pred, dist)


def oracle_shortest_path(domain: PolygonalDomain, graph: VisibilityGraph, p, q):
    """Dijkstra on the visibility graph augmented with p and q.

    Returns (length, polyline).  Independent of the query structure.
    """
    domain._require_inside(p, q)
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    P = Point2(float(p[0]), float(p[1]))
    Q = Point2(float(q[0]), float(q[1]))
    if np.hypot(*(p - q)) <= domain.eps:
        return 0.0, [P]
    if domain.visible_pairs(p, q)[0]:
        return float(math.dist(P, Q)), [P, Q]
    n = graph.n
    C = domain.corners
    vp = domain.visible_mask(p)
    vq = domain.visible_mask(q)
    dp = np.hypot(*(C - p).T)
    dq = np.hypot(*(C - q).T)
    # heap Dijkstra over corners; node n is q
    best = np.full(n + 1, np.inf)
    prev = np.full(n + 1, -2)
    heap = []
    for u in np.nonzero(vp)[0]:
        best[u] = dp[u]
        prev[u] = -1
        heap.append((dp[u], int(u)))
    heapq.heapify(heap)
    done = np.zeros(n + 1, bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u] or d > best[u]:
            continue
        done[u] = True
        if u == n:
            break
        if vq[u] and d + dq[u] < best[n]:
            best[n] = d + dq[u]
            prev[n] = u
            heapq.heappush(heap, (best[n], n))
        for v in np.nonzero(graph.adj[u])[0]:
            nd = d + graph.weight[u, v]
            if nd < best[v]:
                best[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, int(v)))
    if not math.isfinite(best[n]):
        raise DisconnectedFreeSpace("query points are not connected")
    seq = []
    k = int(prev[n])
    while k != -1:
        seq.append(k)
        k = int(prev[k])
    poly = [P] + [Point2(float(C[k, 0]), float(C[k, 1])) for k in reversed(seq)] + [Q]
    return float(polyline_length(poly)), poly
