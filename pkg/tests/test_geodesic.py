import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundary_paths import all_pairs_corner_distances, build_visibility_graph, oracle_shortest_path, spt
from boundary_paths.domain import polyline_length, validate_domain
from boundary_paths.errors import PointOutsideFreeSpace
from boundary_paths.randgen import random_domain, random_free_point
from oracles import ShapelyDomain

SQRT17 = math.sqrt(17)

# Two-hole domain whose oracle values were computed with shapely + networkx.
TWO_HOLES = {
    "outer": [(0, 0), (12, 0), (12, 8), (0, 8)],
    "holes": [[(3, 2), (4, 5), (5, 2)], [(7, 3), (7, 6), (9, 6), (9, 3)]],
}
TWO_HOLES_LENGTHS = [
    ((0, 3.5), (12, 4.5), 12.788381499076829),
    ((4, 0), (4, 8), 8.318830507798008),
    ((8, 0), (8, 8), 8.39834563766817),
    ((0, 0), (12, 8), 14.947127982750379),
    ((2, 8), (10, 0), 11.313708498984761),
    ((4, 5), (9, 3), 5.60555127546399),
    ((6, 0), (6, 8), 8.0),
    ((0, 7), (12, 1), 13.462852037598072),
]


def cid(d, xy):
    return d.corner_id(xy)


@pytest.fixture(scope="module")
def sq_graph(sq):
    return build_visibility_graph(sq)


@pytest.fixture(scope="module")
def sq_table(sq_graph):
    return all_pairs_corner_distances(sq_graph)


def test_triangle_graph_complete(tri):
    g = build_visibility_graph(tri)
    assert g.adj.sum() == 6
    t = all_pairs_corner_distances(g)
    assert np.allclose(t.dist, g.weight, rtol=0, atol=1e-12)


def test_square_hole_graph(sq, sq_graph):
    a, b, c = cid(sq, (4, 4)), cid(sq, (6, 6)), cid(sq, (6, 4))
    assert not sq_graph.adj[a, b]
    assert sq_graph.adj[a, c]
    assert sq_graph.degree(cid(sq, (0, 0))) == 5
    assert not sq_graph.adj[cid(sq, (0, 0)), b]


def test_square_hole_distances(sq, sq_table):
    a, b = cid(sq, (4, 4)), cid(sq, (6, 6))
    assert sq_table.dist[a, b] == pytest.approx(4.0, abs=1e-12)
    assert np.all(np.diag(sq_table.dist) == 0)
    path = sq_table.path(a, b)
    assert path[0] == a and path[-1] == b and len(path) == 3
    # lexicographically smallest of the two equal routes
    assert path[1] == min(cid(sq, (4, 6)), cid(sq, (6, 4)))


def test_table_matches_networkx():
    for seed in (0, 5, 11):
        d = random_domain(seed)
        ref = ShapelyDomain.of(d).corner_distances()
        t = all_pairs_corner_distances(build_visibility_graph(d))
        for u in range(d.n):
            for v in range(d.n):
                assert t.dist[u, v] == pytest.approx(ref[u][v], rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("seed", [None, 1, 3, 9])
def test_metric_axioms(seed, sq):
    d = sq if seed is None else random_domain(seed)
    g = build_visibility_graph(d)
    D = all_pairs_corner_distances(g).dist
    scale = 1e-12 * max(D.max(), 1.0)
    assert np.all(np.diag(D) == 0)
    assert np.array_equal(D, D.T)
    assert np.all(D[:, :, None] <= D[:, None, :] + D.T[None, :, :] + scale)
    assert np.all(D >= g.weight - scale)
    # predecessor paths realize the table
    t = all_pairs_corner_distances(g)
    for u in range(d.n):
        for v in range(d.n):
            seq = t.path(u, v)
            L = sum(g.weight[a, b] for a, b in zip(seq, seq[1:]))
            assert all(g.adj[a, b] for a, b in zip(seq, seq[1:]))
            assert L == pytest.approx(D[u, v], rel=1e-12, abs=1e-12)


def test_oracle_examples(sq, sq_graph):
    L, poly = oracle_shortest_path(sq, sq_graph, (0, 5), (10, 5))
    assert L == pytest.approx(2 + 2 * SQRT17, rel=1e-12)
    assert poly[0] == (0, 5) and poly[-1] == (10, 5)
    assert [tuple(p) for p in poly[1:3]] in ([(4, 4), (6, 4)], [(4, 6), (6, 6)])
    L, poly = oracle_shortest_path(sq, sq_graph, (0, 5), (10, 0))
    assert L == pytest.approx(math.hypot(10, 5)) and len(poly) == 2
    L, poly = oracle_shortest_path(sq, sq_graph, (3, 3), (3, 3))
    assert L == 0 and len(poly) == 1


def test_oracle_mirror_symmetry(sq, sq_graph):
    a = oracle_shortest_path(sq, sq_graph, (0, 5), (10, 5))[0]
    b = oracle_shortest_path(sq, sq_graph, (0, 10 - 5), (10, 10 - 5))[0]
    assert a == b
    for y0, y1 in [(3.0, 7.5), (5.5, 1.25), (8.0, 4.9)]:
        a = oracle_shortest_path(sq, sq_graph, (0, y0), (10, y1))[0]
        b = oracle_shortest_path(sq, sq_graph, (0, 10 - y0), (10, 10 - y1))[0]
        assert a == pytest.approx(b, rel=1e-12)


def test_oracle_frozen_two_holes():
    d = validate_domain(TWO_HOLES["outer"], TWO_HOLES["holes"])
    g = build_visibility_graph(d)
    for p, q, want in TWO_HOLES_LENGTHS:
        assert oracle_shortest_path(d, g, p, q)[0] == pytest.approx(want, rel=1e-12)


def test_oracle_outside(sq, sq_graph):
    with pytest.raises(PointOutsideFreeSpace):
        oracle_shortest_path(sq, sq_graph, (5, 5), (0, 0))


_D = random_domain(6)
_G = build_visibility_graph(_D)
_REF = ShapelyDomain.of(_D)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_oracle_feasible_and_matches_networkx(seed):
    rng = np.random.default_rng(seed)
    p = random_free_point(_D, rng)
    q = random_free_point(_D, rng)
    L, poly = oracle_shortest_path(_D, _G, p, q)
    assert L >= math.dist(p, q) - 1e-12
    assert L == pytest.approx(polyline_length(poly), rel=1e-12)
    assert all(_D.is_visible(a, b) for a, b in zip(poly, poly[1:]))
    assert L == pytest.approx(_REF.shortest(p, q), rel=1e-12, abs=1e-12)


def test_spt(sq, sq_graph, sq_table):
    tree = spt(sq, sq_graph, sq.corners[2])
    assert np.allclose(tree.dist, sq_table.dist[2], rtol=0, atol=1e-12)
    tree = spt(sq, sq_graph, (0, 5))
    a, b, c, e = (cid(sq, x) for x in [(4, 6), (6, 6), (4, 4), (6, 4)])
    assert tree.parent[b] == a or tree.parent[e] == c
    for k in range(sq.n):
        assert tree.dist[k] == pytest.approx(oracle_shortest_path(sq, sq_graph, (0, 5), sq.corners[k])[0],
                                             rel=1e-12)


def test_spt_triangle_is_star(tri):
    g = build_visibility_graph(tri)
    tree = spt(tri, g, (2, 2))
    assert np.all(tree.parent == -1)
