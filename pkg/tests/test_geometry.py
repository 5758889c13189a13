import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distlat import geometry as geo
from distlat.geometry import EUC, HYP

from oracles import hyp_dist


def disk_point(max_r=6.0):
    return st.tuples(st.floats(0.0, max_r), st.floats(0.0, 2 * math.pi)).map(
        lambda t: np.array([math.tanh(t[0] / 2) * math.cos(t[1]), math.tanh(t[0] / 2) * math.sin(t[1])]))


def plane_point(m=50.0):
    return st.tuples(st.floats(-m, m), st.floats(-m, m)).map(np.array)


def test_space_parse():
    assert geo.SpaceKind.parse("hyperbolic") is HYP
    assert geo.SpaceKind.parse("Euclidean") is EUC
    with pytest.raises(ValueError):
        geo.SpaceKind.parse("sphere")


@given(disk_point(), disk_point())
def test_hyperbolic_distance_matches_arccosh_form(p, q):
    d = geo.dist(HYP, p, q)
    assert d == pytest.approx(float(hyp_dist(p, q)), rel=1e-9, abs=1e-7)


def test_distance_from_origin_closed_form():
    r = 0.7
    assert geo.dist(HYP, [r, 0], [0, 0]) == pytest.approx(2 * math.atanh(r), rel=1e-14)
    assert geo.dist(EUC, [3, 4], [0, 0]) == 5.0


@settings(max_examples=200)
@given(disk_point(), disk_point(), disk_point())
def test_triangle_inequality_hyperbolic(a, b, c):
    assert geo.dist(HYP, a, c) <= geo.dist(HYP, a, b) + geo.dist(HYP, b, c) + 1e-9


def test_chart_guard():
    with pytest.raises(geo.ChartError):
        geo.dist(HYP, [1.0, 0.0], [0.0, 0.0])
    with pytest.raises(geo.ChartError):
        geo.check_chart(HYP, [0.6, 0.8])
    geo.check_chart(EUC, [10.0, 0.0])


@pytest.mark.parametrize("r", [0.0, 1e-6, 0.5, 3.0, 11.0])
def test_ball_volume_forms(r):
    assert geo.ball_volume(HYP, r) == pytest.approx(math.pi * (math.expm1(r) + math.expm1(-r)), rel=1e-9, abs=1e-20)
    assert geo.ball_volume(EUC, r) == pytest.approx(math.pi * r * r)
    for space in (EUC, HYP):
        assert geo.inverse_ball_volume(space, geo.ball_volume(space, r)) == pytest.approx(r, abs=1e-9)


def test_ball_volume_rejects_negative():
    with pytest.raises(ValueError):
        geo.ball_volume(HYP, -1.0)


@given(disk_point(5), disk_point(5))
def test_geodesic_midpoint(p, q):
    m = geo.geodesic_midpoint(HYP, p, q)
    d = geo.dist(HYP, p, q)
    assert geo.dist(HYP, p, m) == pytest.approx(d / 2, abs=1e-7)
    assert geo.dist(HYP, m, q) == pytest.approx(d / 2, abs=1e-7)


@given(disk_point(4), disk_point(4), disk_point(4))
def test_circumcircle_equidistant(a, b, c):
    try:
        center, r = geo.circumcircle(HYP, a, b, c)
    except (geo.DegenerateCircleError, geo.UnboundedWitnessError):
        return
    for p in (a, b, c):
        assert geo.dist(HYP, center, p) == pytest.approx(r, rel=1e-6, abs=1e-6)


def test_chart_disk_round_trip():
    c, r = geo.hyperbolic_disk_to_chart(np.array([0.3, -0.2]), 1.7)
    c2, r2 = geo.chart_disk_to_hyperbolic(c, r)
    assert np.allclose(c2, [0.3, -0.2]) and r2 == pytest.approx(1.7)


@given(disk_point())
def test_klein_round_trip(p):
    assert np.allclose(geo.from_klein(geo.to_klein(p)), p, atol=1e-12)


@given(disk_point(4), disk_point(4), disk_point(4))
def test_triangle_area_equals_angle_defect(a, b, c):
    x, y, z = geo.dist(HYP, b, c), geo.dist(HYP, a, c), geo.dist(HYP, a, b)
    if min(x, y, z) < 1e-3 or max(x, y, z) > 0.999 * (x + y + z - max(x, y, z)):
        return
    angles = geo.hyperbolic_angles(x, y, z)
    assert geo.hyperbolic_triangle_area(x, y, z) == pytest.approx(math.pi - sum(angles), abs=1e-6)


def test_ideal_limit_area_below_pi():
    assert geo.hyperbolic_triangle_area(40.0, 40.0, 40.0) == pytest.approx(math.pi, abs=1e-6)
    assert geo.hyperbolic_triangle_area(40.0, 40.0, 40.0) <= math.pi


def test_polygon_area_square_and_orientation():
    sq = geo.GeodesicPolygon([[0, 0], [1, 0], [1, 1], [0, 1]], EUC)
    assert geo.polygon_area(sq) == 1.0
    cw = geo.GeodesicPolygon(sq.vertices[::-1], EUC)
    assert geo.polygon_area(cw) == -1.0


def test_hyperbolic_polygon_area_additive():
    pts = np.array([[0.0, 0.0], [0.5, 0.0], [0.4, 0.4], [-0.1, 0.5]])
    whole = geo.polygon_area(geo.GeodesicPolygon(pts, HYP))
    t1 = geo.polygon_area(geo.GeodesicPolygon(pts[[0, 1, 2]], HYP))
    t2 = geo.polygon_area(geo.GeodesicPolygon(pts[[0, 2, 3]], HYP))
    assert whole == pytest.approx(t1 + t2, rel=1e-12)
    assert whole > 0


def test_non_simple_polygon_rejected():
    bow = geo.GeodesicPolygon([[0, 0], [1, 1], [1, 0], [0, 1]], EUC)
    with pytest.raises(geo.PolygonError):
        geo.polygon_area(bow)


def test_regular_hyperbolic_polygon_area():
    # regular n-gon with circumradius R: area = (n - 2) pi - n * interior angle
    n, R = 7, 1.3
    rho = math.tanh(R / 2)
    th = 2 * math.pi * np.arange(n) / n
    poly = geo.GeodesicPolygon(np.column_stack([rho * np.cos(th), rho * np.sin(th)]), HYP)
    # right triangle (center, vertex, edge midpoint): angle pi/n at center, hypotenuse R
    half = math.atan(1.0 / (math.cosh(R) * math.tan(math.pi / n)))
    assert geo.polygon_area(poly) == pytest.approx((n - 2) * math.pi - n * 2 * half, rel=1e-10)


@settings(max_examples=100)
@given(disk_point(3), disk_point(3), disk_point(3), st.floats(-3, 3), st.booleans())
def test_isometries_preserve_distance(p, q, a, angle, flip):
    g = geo.Isometry(HYP, angle, (float(a[0]), float(a[1])), flip)
    assert geo.dist(HYP, g.apply(p), g.apply(q)) == pytest.approx(geo.dist(HYP, p, q), rel=1e-7, abs=1e-7)
    back = g.inverse().apply(g.apply(p))
    assert np.allclose(back, p, atol=1e-9)


@given(plane_point(), plane_point(), st.floats(-3, 3))
def test_euclidean_isometry(p, a, angle):
    g = geo.Isometry(EUC, angle, (float(a[0]), float(a[1])))
    assert np.allclose(g.apply(a), [0, 0], atol=1e-9)
    assert geo.dist(EUC, g.apply(p), g.apply(a)) == pytest.approx(geo.dist(EUC, p, a), rel=1e-9, abs=1e-9)


def test_compose_and_translation():
    for space in (EUC, HYP):
        t = geo.translation_along_x(space, 1.5)
        r = geo.rotation(space, 0.7)
        x = np.array([0.1, -0.2])
        assert np.allclose(t.compose(r).apply(x), t.apply(r.apply(x)))
        assert geo.dist(space, t.apply([0, 0]), [0, 0]) == pytest.approx(1.5)
        assert np.allclose(geo.isometry_to_origin(space, x).apply(x), 0)


@pytest.mark.parametrize("space", [EUC, HYP])
@pytest.mark.parametrize("k", [1, 3])
def test_nearest_sites_matches_brute_force(space, k):
    rng = np.random.default_rng(7)
    n = 300
    r = rng.random(n) * (math.tanh(4) if space is HYP else 10) * 0.999
    th = rng.random(n) * 2 * math.pi
    sites = np.column_stack([r * np.cos(th), r * np.sin(th)])
    rq = rng.random(50) * (math.tanh(4) if space is HYP else 10) * 0.999
    tq = rng.random(50) * 2 * math.pi
    q = np.column_stack([rq * np.cos(tq), rq * np.sin(tq)])
    idx, d = geo.nearest_sites(space, sites, q, k=k)
    full = np.array([geo.dist(space, sites, x) for x in q])
    brute = np.argsort(full, axis=1, kind="stable")[:, :k]
    assert np.array_equal(idx, brute)
    assert np.allclose(d, np.take_along_axis(full, brute, axis=1))
