import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull, Voronoi

from distlat import geometry as geo
from distlat import tess
from distlat.geometry import EUC, HYP
from distlat.pointproc import PointSample, ProcessKind, sample_palm_poisson, sample_poisson

from oracles import brute_force_delaunay_edges


def _sample(space, pts, window=math.inf):
    return PointSample(space, np.asarray(pts, float), window, ProcessKind.poisson(1.0))


@pytest.mark.parametrize("space", [EUC, HYP])
def test_small_samples_match_oracle(space):
    rng = np.random.default_rng(11)
    for _ in range(8):
        n = int(rng.integers(4, 10))
        r = np.sqrt(rng.random(n)) * (0.9 if space is HYP else 3.0)
        th = rng.random(n) * 2 * math.pi
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        net = tess.delaunay(_sample(space, pts))
        assert net.edge_set() == brute_force_delaunay_edges(pts, space is HYP)


def test_euclidean_euler_counts():
    s = sample_poisson(EUC, 1.0, 8.0, 3)
    net = tess.delaunay(s)
    h = len(ConvexHull(s.points).vertices)
    n = s.count
    assert net.n_edges == 3 * n - 3 - h
    assert len(net.triangles) == 2 * n - 2 - h


@pytest.mark.parametrize("space,R", [(EUC, 8.0), (HYP, 4.0)])
def test_network_structure(space, R):
    net = tess.delaunay(sample_palm_poisson(space, 1.0, R, 4))
    e = net.edges
    assert np.all(e[:, 0] < e[:, 1])
    assert len(np.unique(e, axis=0)) == len(e)
    assert net.degree.sum() == 2 * net.n_edges
    for v in range(0, net.n_vertices, 7):
        nb = net.neighbors(v)
        assert np.all(np.diff(nb) > 0)
        for w in nb:
            assert v in net.neighbors(w)
    m = geo.geodesic_midpoint(space, net.points[e[:, 0]], net.points[e[:, 1]])
    assert np.allclose(m, net.edge_marks)


@pytest.mark.parametrize("space,R,r", [(EUC, 12.0, 8.0), (HYP, 6.0, 4.5)])
def test_certified_neighbors_survive_enlarging_window(space, R, r):
    big = sample_palm_poisson(space, 1.0, R, 21)
    d = geo.dist(space, big.points, np.zeros(2))
    keep = np.flatnonzero(d <= r)
    small = tess.delaunay(PointSample(space, big.points[keep], r, big.kind))
    full = tess.delaunay(big)
    assert small.certified.sum() > 10
    for v in np.flatnonzero(small.certified):
        assert set(keep[small.neighbors(v)]) == set(full.neighbors(keep[v]))


def test_euclidean_cell_areas_match_scipy():
    s = sample_palm_poisson(EUC, 1.0, 8.0, 2)
    net = tess.delaunay(s)
    area, bounded = tess.cell_areas(net)
    vor = Voronoi(s.points)
    checked = 0
    for v in np.flatnonzero(net.certified):
        reg = vor.regions[vor.point_region[v]]
        assert -1 not in reg
        ref = ConvexHull(vor.vertices[reg]).volume
        assert area[v] == pytest.approx(ref, rel=1e-9)
        checked += 1
    assert checked > 50


def test_hyperbolic_cells_consistent():
    net = tess.delaunay(sample_palm_poisson(HYP, 1.0, 5.0, 8))
    cells = tess.voronoi_cells(net)
    n = 0
    for c in cells:
        if not c.certified:
            continue
        # fan from a vertex versus fan from the nucleus
        assert geo.polygon_area(c.polygon) == pytest.approx(c.area, rel=1e-9)
        assert c.area > 0
        # every polygon vertex is equidistant from the nucleus and two or more neighbours
        nuc = net.points[c.nucleus_id]
        dn = geo.dist(HYP, c.polygon.vertices, nuc)
        others = geo.dist(HYP, c.polygon.vertices[:, None, :], net.points[net.neighbors(c.nucleus_id)][None])
        assert np.all(np.min(others, axis=1) >= dn - 1e-8)
        n += 1
    assert n > 30


@pytest.mark.parametrize("space,R", [(EUC, 6.0), (HYP, 5.0)])
def test_root_cell_agrees_with_triangulation(space, R):
    for seed in range(10):
        s = sample_palm_poisson(space, 1.0, R, seed)
        net = tess.delaunay(s)
        poly, nb, rho, ok = tess.root_cell(space, s.points, R, root=s.root)
        if not (ok and net.certified[s.root]):
            continue
        assert set(nb) == set(net.neighbors(s.root))
        cell = tess.voronoi_cells(net)[s.root]
        assert geo.polygon_area(geo.GeodesicPolygon(poly, space)) == pytest.approx(cell.area, rel=1e-8)
        assert np.max(geo.dist(space, poly, np.zeros(2))) == pytest.approx(rho, rel=1e-9)


def test_cocircular_square():
    pts = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], float)
    net = tess.delaunay(_sample(EUC, pts))
    assert net.n_edges == 5
    # lexicographic rule picks the same diagonal under any input order
    again = tess.delaunay(_sample(EUC, pts[[2, 0, 3, 1]]))
    perm = np.array([2, 0, 3, 1])
    assert {tuple(sorted((perm[a], perm[b]))) for a, b in again.edges} == net.edge_set()


def test_integer_grid_triangulation():
    g = np.array([[x, y] for x in range(6) for y in range(6)], float)
    net = tess.delaunay(_sample(EUC, g))
    assert net.n_edges == 3 * 36 - 3 - 20
    assert set(np.round(geo.dist(EUC, net.points[net.edges[:, 0]], net.points[net.edges[:, 1]]), 9)) <= {1.0, 1.414213562}


def test_degenerate_inputs():
    # fewer than three points: isolated vertices by convention
    for pts in ([], [[0.1, 0.2]], [[0, 0], [0.5, 0]]):
        net = tess.delaunay(_sample(HYP, np.reshape(pts, (-1, 2))))
        assert net.n_edges == 0 and net.n_vertices == len(pts)
    line = tess.delaunay(_sample(EUC, [[0, 0], [1, 0], [3, 0], [2, 0]]))
    assert line.degenerate == "collinear"
    assert line.edge_set() == {(0, 1), (1, 3), (2, 3)}


def test_certified_core_synthetic():
    net = tess.delaunay(sample_palm_poisson(EUC, 1.0, 6.0, 1))
    d = net.distance_from_origin()
    net.certified = d < 4.0
    far = np.argmax(d * (d < 3.0))
    net.certified[far] = False
    core = tess.certified_core(net)
    assert core.any() and np.all(d[core] < d[far])
    net.certified[:] = False
    assert not tess.certified_core(net).any()
    with pytest.raises(tess.EmptyCoreError):
        tess.degree_moment(net)


def test_degree_moment_on_core():
    net = tess.delaunay(sample_palm_poisson(EUC, 1.0, 20.0, 2))
    m = tess.degree_moment(net)
    assert 5.5 < m < 6.5
    assert tess.degree_moment(net, 2) > m ** 2


def test_cell_diameter_tail_shape():
    res = tess.cell_diameter_tail(HYP, 1.0, [1.0, 2.0], 200, 3)
    assert res["probability"][0] >= res["probability"][1]
    assert res["envelope"][0] == pytest.approx(res["probability"][0])
    with pytest.raises(ValueError):
        tess.cell_diameter_tail(HYP, 1.0, [6.0], 10, 0)


def test_network_json_round_trip(tmp_path):
    net = tess.delaunay(sample_palm_poisson(HYP, 1.0, 3.0, 5))
    p = tess.write_network(net, tmp_path / "n.json")
    data = tess.read_network(p)
    assert len(data["vertices"]) == net.n_vertices and len(data["edges"]) == net.n_edges
    assert {(e["a"], e["b"]) for e in data["edges"]} == net.edge_set()
    first = p.read_bytes()
    tess.write_network(net, p)
    assert p.read_bytes() == first
