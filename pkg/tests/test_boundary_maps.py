import math

import numpy as np
import pytest

from boundary_paths import BoundaryMaps, all_breakpoints, boundary_spm, make_blocks, oracle_shortest_path
from boundary_paths.boundary_maps import (
    CORNER,
    ROOT_SWITCH,
    GridIndex,
    layout_from_chunks,
    locate_interval,
)
from boundary_paths.errors import OutOfRange
from boundary_paths.randgen import random_domain
from oracles import ShapelyDomain


@pytest.fixture(scope="module")
def sq_maps(sq):
    return BoundaryMaps(sq)


@pytest.fixture(scope="module")
def sq_grid(sq_maps):
    return all_breakpoints(sq_maps, sq_maps.locus_rows(sq_maps.boundary))


@pytest.fixture(scope="module")
def rnd():
    d = random_domain(3)
    maps = BoundaryMaps(d)
    rows = maps.locus_rows(maps.boundary)
    return d, maps, rows, all_breakpoints(maps, rows)


def test_triangle_rows(tri):
    maps = BoundaryMaps(tri)
    for v in range(3):
        row = boundary_spm(maps, v)
        assert row.breakpoints == []
        assert set(row.roots.tolist()) == {v}
    grid = all_breakpoints(maps, maps.locus_rows(maps.boundary))
    assert grid.size == 3
    assert grid.starts.tolist() == [0.0, 8.0, 18.0]
    # every grid line is a corner (degenerate events merge into them)
    assert all(CORNER in k for k in grid.kinds)


def test_square_hole_row_on_right_edge(sq, sq_maps):
    v = sq.corner_id((4, 4))
    row = boundary_spm(sq_maps, v)
    # outer edge x = 10 runs from parameter 10 to 20; the only root change is
    # where the sight line along the hole's bottom edge reaches it
    inside = [bp for bp in row.breakpoints if 10 < bp.t < 20]
    assert len(inside) == 1
    t = inside[0].t
    assert sq.param_to_point(t) == pytest.approx((10, 4), abs=1e-9)
    before, after = row.root_at(t - 1e-6), row.root_at(t + 1e-6)
    assert before == v
    assert after == sq.corner_id((6, 4))
    # no switch at (10,5): the route via (6,6) costs 2 more to reach and gains less than 2
    assert row.root_at(15.0) == after
    p = np.array(sq.param_to_point(t))
    D = sq_maps.table.dist
    C = sq.corners
    e1 = D[v, before] + math.dist(C[before], p)
    e2 = D[v, after] + math.dist(C[after], p)
    assert abs(e1 - e2) <= sq_maps.eps_env


def test_square_hole_switch_at_equal_distance(sq, sq_maps):
    # every root-switch breakpoint has two roots with equal distance from v
    D = sq_maps.table.dist
    C = sq.corners
    for v in range(sq.n):
        row = boundary_spm(sq_maps, v)
        for bp in row.breakpoints:
            if bp.kind != ROOT_SWITCH:
                continue
            p = np.array(sq.param_to_point(bp.t))
            r0, r1 = row.root_at(bp.t - 1e-7), row.root_at(bp.t)
            assert r0 != r1
            assert abs(D[v, r0] + math.dist(C[r0], p) - D[v, r1] - math.dist(C[r1], p)) <= sq_maps.eps_env


def test_square_hole_grid(sq, sq_grid):
    assert sq_grid.size >= 8
    assert sq_grid.size <= 4 * sq.n ** 2
    for k in range(sq.n):
        assert np.any(np.abs(sq_grid.starts - sq.param.starts[k]) <= sq.eps)
    assert sq_grid.size == 24
    # (10,4) and (10,6): sight lines along the hole's horizontal edges
    assert np.any(np.abs(sq_grid.starts - 14.0) <= 1e-9)
    assert np.any(np.abs(sq_grid.starts - 16.0) <= 1e-9)


def test_rows_match_oracle(rnd):
    d, maps, rows, _ = rnd
    ref = ShapelyDomain.of(d)
    rng = np.random.default_rng(0)
    D = maps.table.dist
    C = d.corners
    for _ in range(1000):
        v = int(rng.integers(d.n))
        t = rng.uniform(0, d.perimeter)
        r = rows[v].root_at(t)
        p = np.asarray(d.param_to_point(t))
        got = D[v, r] + math.dist(C[r], p)
        assert d.is_visible(C[r], p)
        if _ % 10 == 0:
            want = ref.shortest(C[v], p)
        else:
            want = oracle_shortest_path(d, maps.graph, C[v], p)[0]
        assert got == pytest.approx(want, rel=1e-9)


def test_row_roots_alternate(rnd):
    _, _, rows, _ = rnd
    for row in rows.values():
        assert np.all(row.roots[1:] != row.roots[:-1])
        assert np.all(np.diff(row.starts) > 0)


def test_visible_set_constant_in_intervals(rnd):
    d, _, _, grid = rnd
    for k in range(grid.size):
        s = np.linspace(grid.starts[k], grid.ends[k], 12)[1:-1]
        for x in s:
            vis = d.visible_mask(d.param_to_point(x))
            assert np.array_equal(vis, grid.visible[k]), (k, x)


def test_breakpoint_bound(rnd):
    d, _, _, grid = rnd
    assert d.n <= grid.size <= 4 * d.n ** 2


def test_locate(sq_grid):
    g = sq_grid
    for k in (0, 3, g.size - 1):
        assert locate_interval(g, float(g.starts[k])) == k
        assert g.locate(0.5 * (g.starts[k] + g.ends[k])) == k
    assert g.locate(g.total - 0.5 * 1e-9) == g.size - 1
    with pytest.raises(OutOfRange):
        g.locate(g.total)
    with pytest.raises(OutOfRange):
        g.locate(-1.0)


def _grid(starts, total):
    starts = np.asarray(starts, float)
    ends = np.append(starts[1:], total)
    return GridIndex(starts, ends, np.zeros(len(starts), int), [{CORNER}] * len(starts),
                     np.zeros((len(starts), 1), bool), total)


def test_make_blocks_chunking():
    g = _grid(np.arange(7.0), 7.0)
    lay = make_blocks(g, g, 3)
    sizes = [last - first + 1 for first, last, _ in lay.chunks]
    assert sizes == [3, 3, 1]
    assert len(lay.blocks) == 7 * 3


def test_make_blocks_triangle(tri):
    maps = BoundaryMaps(tri)
    g = all_breakpoints(maps, maps.locus_rows(maps.boundary))
    lay = make_blocks(g, g, 3)
    assert len(lay.chunks) == 3
    assert len(lay.blocks) == 9


@pytest.mark.parametrize("cap", [1, 2, 5, 100])
def test_blocks_tile(rnd, cap):
    _, _, _, g = rnd
    lay = make_blocks(g, g, cap)
    seen = np.zeros((g.size, g.size), int)
    for b in lay.blocks:
        assert b.t_last - b.t_first + 1 <= cap
        assert len({int(g.carrier[j]) for j in b.t_intervals}) == 1
        seen[b.s_interval, b.t_first:b.t_last + 1] += 1
        for j in b.t_intervals:
            assert lay.block_id(b.s_interval, j) == b.id
    assert np.all(seen == 1)
    assert sum(len(b.t_intervals) for b in lay.blocks) == g.size * g.size


def test_layout_from_chunks_round_trip(rnd):
    _, _, _, g = rnd
    lay = make_blocks(g, g, 4)
    again = layout_from_chunks(g.size, lay.chunks)
    assert again.blocks == lay.blocks
    assert np.array_equal(again.chunk_of, lay.chunk_of)
