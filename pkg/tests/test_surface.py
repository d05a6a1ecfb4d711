import itertools

import numpy as np
import pytest
import scipy.spatial

from conftest import random_layout
from oracles import brute_in_circumcircle
from gradtac.aggregate import EventFrame
from gradtac.errors import GeometryError, OutsideHull
from gradtac.surface import interpolate_grid, nn_weights, orient, triangulate, weight_matrix


def _random_queries(tri, n, rng):
    lo, hi = tri.sites.min(axis=0), tri.sites.max(axis=0)
    out = []
    while len(out) < n:
        q = rng.uniform(lo, hi)
        if tri.contains(q):
            out.append(q)
    return np.array(out)


def test_three_points():
    tri = triangulate(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert len(tri.triangles) == 1 and len(tri.cells) == 3


def test_square_tie_break():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    tri = triangulate(pts)
    assert len(tri.triangles) == 2
    edges = {tuple(sorted(e)) for t in tri.triangles for e in itertools.combinations(t.tolist(), 2)}
    # lowest-index diagonal is 0-2 rather than 1-3
    assert (0, 2) in edges and (1, 3) not in edges
    assert triangulate(pts).triangles.tolist() == tri.triangles.tolist()


def test_triangles_ccw():
    tri = triangulate(random_layout(4))
    for a, b, c in tri.triangles:
        assert orient(tri.sites[a], tri.sites[b], tri.sites[c]) > 0


@pytest.mark.parametrize("seed", range(5))
def test_empty_circumcircle_exhaustive(seed):
    tri = triangulate(random_layout(seed))
    s = tri.sites
    for t in tri.triangles:
        for p in range(len(s)):
            if p in t:
                continue
            assert not brute_in_circumcircle(s[t[0]], s[t[1]], s[t[2]], s[p])


@pytest.mark.parametrize("seed", range(5))
def test_triangle_count_matches_scipy(seed):
    lay = random_layout(seed)
    assert len(triangulate(lay).triangles) == len(scipy.spatial.Delaunay(lay.positions_2d).simplices)


def test_cells_positive_and_tile_box():
    tri = triangulate(random_layout(7))
    area = 0.0
    for cell in tri.cells:
        p = np.array(cell)
        a = 0.5 * np.sum(p[:, 0] * np.roll(p[:, 1], -1) - np.roll(p[:, 0], -1) * p[:, 1])
        assert a > 0
        area += a
    u0, v0, u1, v1 = tri.box
    assert area == pytest.approx((u1 - u0) * (v1 - v0), rel=1e-9)


def test_box_padding():
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 20.0]])
    assert triangulate(pts).box == pytest.approx((-1.0, -2.0, 11.0, 22.0))


def test_collinear_rejected():
    with pytest.raises(GeometryError):
        triangulate(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))


def test_on_site_weight_one():
    tri = triangulate(random_layout(1))
    for i, s in enumerate(tri.sites):
        assert nn_weights(tri, s) == [(i, 1.0)]


def test_equilateral_centroid():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    w = nn_weights(triangulate(pts), pts.mean(axis=0))
    assert [i for i, _ in w] == [0, 1, 2]
    assert np.allclose([x for _, x in w], 1 / 3, atol=1e-12)


def test_outside_and_boundary_rejected():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    tri = triangulate(pts)
    with pytest.raises(OutsideHull):
        nn_weights(tri, (2.0, 2.0))
    with pytest.raises(OutsideHull):
        nn_weights(tri, (0.5, 0.0))


@pytest.mark.parametrize("seed", range(5))
def test_sibson_properties_random_layout(seed):
    rng = np.random.default_rng(seed)
    tri = triangulate(random_layout(100 + seed, n=10))
    for q in _random_queries(tri, 100, rng):
        w = nn_weights(tri, q)
        idx = np.array([i for i, _ in w])
        lam = np.array([x for _, x in w])
        assert abs(lam.sum() - 1.0) < 1e-9
        assert lam.min() >= -1e-12
        assert np.allclose(lam @ tri.sites[idx], q, atol=1e-6, rtol=0)


def test_support_is_natural_neighbours():
    # the query's natural neighbours are the vertices of triangles whose
    # circumcircle contains it
    rng = np.random.default_rng(3)
    tri = triangulate(random_layout(9))
    for q in _random_queries(tri, 50, rng):
        inside = ((tri.centers - q) ** 2).sum(axis=1) < tri.radii2
        neigh = set(np.unique(tri.triangles[inside]).tolist())
        assert {i for i, _ in nn_weights(tri, q)} == neigh


def test_query_does_not_mutate_triangulation():
    tri = triangulate(random_layout(2))
    before = tri.triangles.copy()
    nn_weights(tri, tri.sites.mean(axis=0))
    assert np.array_equal(before, tri.triangles)


def test_continuity_probe():
    rng = np.random.default_rng(5)
    lay = random_layout(5)
    tri = triangulate(lay)
    f = rng.uniform(0, 10, lay.taxel_count)
    rng_f = f.max() - f.min()
    for q in _random_queries(tri, 50, rng):
        g1 = sum(w * f[i] for i, w in nn_weights(tri, q))
        g2 = sum(w * f[i] for i, w in nn_weights(tri, q + 1e-6))
        assert abs(g1 - g2) < 1e-3 * rng_f


def test_zero_and_constant_frames(layout):
    tri = triangulate(layout)
    z = interpolate_grid(np.zeros(24), tri)
    assert not z.values.any()
    c = interpolate_grid(np.full(24, 2.5), tri)
    assert np.max(np.abs(c.values[~c.mask] - 2.5)) < 1e-9
    assert not c.values[c.mask].any()


def test_linear_field(layout):
    tri = triangulate(layout)
    f = 0.7 * layout.positions_2d[:, 0] - 1.3 * layout.positions_2d[:, 1] + 4.0
    s = interpolate_grid(f, tri, 64, 48)
    uu, vv = np.meshgrid(s.u, s.v)
    ref = 0.7 * uu - 1.3 * vv + 4.0
    assert np.max(np.abs(s.values - ref)[~s.mask]) < 1e-6


def test_maximum_principle(layout):
    rng = np.random.default_rng(0)
    tri = triangulate(layout)
    f = rng.uniform(1, 9, 24)
    s = interpolate_grid(f, tri, 32, 24)
    vals = s.values[~s.mask]
    assert vals.min() >= f.min() - 1e-9 and vals.max() <= f.max() + 1e-9


def test_node_on_site_exact():
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0], [5.0, 5.0]])
    tri = triangulate(pts)
    f = np.array([1.0, 2.0, 3.0, 4.0, 7.0])
    s = interpolate_grid(f, tri, 11, 11)
    assert s.values[5, 5] == pytest.approx(7.0, abs=1e-9)
    assert s.values[0, 0] == pytest.approx(1.0, abs=1e-9)
    assert not s.mask[5, 5]


def test_hull_masking(layout):
    tri = triangulate(layout)
    s = interpolate_grid(np.ones(24), tri, 64, 48)
    uu, vv = np.meshgrid(s.u, s.v)
    nodes = np.column_stack([uu.ravel(), vv.ravel()])
    inside = tri.contains_many(nodes).reshape(s.shape)
    assert np.all(s.mask[inside] == False)  # noqa: E712
    assert s.mask.any()


def test_event_frame_input_and_window_times(layout):
    tri = triangulate(layout)
    fr = EventFrame(0.1, 0.15, np.ones(24, int), np.zeros(24, int), np.ones(24))
    s = interpolate_grid(fr, tri)
    assert (s.window_start, s.window_end) == (0.1, 0.15)


def test_wrong_length(layout):
    with pytest.raises(GeometryError):
        interpolate_grid(np.ones(5), triangulate(layout))


def test_weight_matrix_cached(layout):
    tri = triangulate(layout)
    assert weight_matrix(tri, 16, 12)[0] is weight_matrix(tri, 16, 12)[0]
