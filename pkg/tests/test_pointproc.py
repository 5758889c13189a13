import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from distlat import geometry as geo
from distlat.geometry import EUC, HYP
from distlat.pointproc import (GAF_INTENSITY, PointSample, ProcessKind, RootFindingError, drop_coincident,
                               kac_coefficients, matched_poisson_params, palmify, poly_roots, read_sample,
                               sample_kac_gaf, sample_palm_poisson, sample_poisson, sample_radii, write_sample)


def test_process_kind_validation():
    with pytest.raises(ValueError):
        ProcessKind.poisson(0.0)
    with pytest.raises(ValueError):
        ProcessKind.kac_gaf(0)
    with pytest.raises(ValueError):
        ProcessKind("cox", 1.0)


def test_window_cap_and_negative_window():
    with pytest.raises(geo.ChartError):
        sample_poisson(HYP, 1.0, 12.5, 0)
    with pytest.raises(ValueError):
        sample_poisson(EUC, 1.0, -1.0, 0)


def test_zero_window_is_empty():
    assert sample_poisson(HYP, 1.0, 0.0, 1).count == 0


def test_determinism():
    a = sample_poisson(HYP, 1.0, 5.0, 123)
    b = sample_poisson(HYP, 1.0, 5.0, 123)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, sample_poisson(HYP, 1.0, 5.0, 124).points)


@pytest.mark.parametrize("space,R", [(EUC, 4.0), (HYP, 3.0)])
def test_radial_law(space, R):
    # P[r <= t] = f(t) / f(R) for a uniform point of the ball
    r = sample_radii(space, R, np.random.default_rng(1).random(20000))
    ks = stats.kstest(r, lambda t: geo.ball_volume(space, np.clip(t, 0, R)) / geo.ball_volume(space, R))
    assert ks.pvalue > 1e-3


def test_points_inside_window():
    s = sample_poisson(HYP, 1.0, 8.0, 3)
    d = geo.dist(HYP, s.points, np.zeros(2))
    assert np.all(d <= 8.0 + 1e-9)


def test_palm_adds_origin_once():
    s = sample_poisson(EUC, 1.0, 3.0, 5)
    p = palmify(s)
    assert p.count == s.count + 1
    assert p.root == p.count - 1 and np.all(p.points[p.root] == 0)
    assert p.is_palm
    with pytest.raises(ValueError):
        palmify(p)


def test_palm_root_of_empty_window():
    p = sample_palm_poisson(HYP, 1.0, 0.0, 0)
    assert p.count == 1 and p.root == 0


def test_drop_coincident():
    pts = np.array([[0.0, 0.0], [1e-14, 0.0], [0.5, 0.5]])
    assert len(drop_coincident(pts)) == 2


def test_sample_round_trip(tmp_path):
    s = sample_palm_poisson(HYP, 1.0, 4.0, 9)
    csv_path, json_path = write_sample(s, tmp_path / "x")
    back = read_sample(tmp_path / "x")
    assert np.array_equal(back.points, s.points)
    assert back.kind == s.kind and back.root == s.root and back.window_radius == s.window_radius
    first = csv_path.read_bytes()
    write_sample(s, tmp_path / "x")
    assert csv_path.read_bytes() == first


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2 ** 31))
def test_roots_match_companion_matrix(n, seed):
    a = kac_coefficients(n, seed)
    z = np.sort_complex(poly_roots(a))
    ref = np.sort_complex(np.roots(a[::-1]))
    # match by nearest neighbour, robust to sort-order ties
    for w in ref:
        assert np.min(np.abs(z - w)) < 1e-6 * max(1.0, abs(w))


def test_roots_with_zero_root_and_linear():
    assert np.allclose(np.sort_complex(poly_roots([0, 0, -1, 1])), [0, 0, 1])
    assert np.allclose(poly_roots([2, 1]), [-2])
    with pytest.raises(ValueError):
        poly_roots([1.0])


def test_root_failure_reported():
    with pytest.raises(RootFindingError) as err:
        poly_roots(kac_coefficients(30, 1), max_iter=1, tol=1e-15)
    assert len(err.value.failed) > 0


def test_gaf_count_and_chart():
    s = sample_kac_gaf(200, 4)
    assert s.space is HYP and not math.isfinite(s.window_radius)
    assert np.all(np.sum(s.points ** 2, axis=1) < 1)
    counts = [sample_kac_gaf(200, k).count for k in range(20)]
    assert abs(np.mean(counts) - 100) < 3 * math.sqrt(100 / 20) + 2


def test_gaf_degree_two_is_nearly_empty():
    assert sample_kac_gaf(2, 0).count <= 2


def test_matched_poisson_params():
    lam, R = matched_poisson_params(1000)
    assert lam == GAF_INTENSITY
    assert R == pytest.approx(math.acosh(1001), rel=1e-12)
    assert R == pytest.approx(7.6019, abs=1e-4)
    assert lam * geo.ball_volume(HYP, R) == pytest.approx(500)


def test_point_sample_normalizes():
    s = PointSample("euclidean", [[1, 2]], 3.0, ProcessKind.poisson(1.0))
    assert s.points.shape == (1, 2) and s.space is EUC
    with pytest.raises(ValueError):
        s.points[0, 0] = 5
