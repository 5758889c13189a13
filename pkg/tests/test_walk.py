import math

import numpy as np
import pytest

from distlat import geometry as geo
from distlat import tess, walk
from distlat.geometry import EUC, HYP
from distlat.pointproc import sample_palm_poisson


@pytest.mark.parametrize("space,steps", [(EUC, 300), (HYP, 14)])
def test_lazy_walk_neighbors_are_exact(space, steps):
    # every neighbor set the lazy walker used must equal the Delaunay
    # neighbors in the triangulation of all points it ever generated
    for seed in range(3):
        log = []
        _, env = walk._run_lazy(space, 1.0, steps, seed, log)
        ids, pts = env.all_points()
        net = tess.delaunay(pts, space)
        pos = {int(i): k for k, i in enumerate(ids)}
        for v, nb in log:
            assert np.array_equal(np.sort(ids[net.neighbors(pos[v])]), nb)


@pytest.mark.parametrize("space,radius", [(EUC, 4), (HYP, 2)])
def test_lazy_graph_ball_neighbors_are_exact(space, radius):
    log = []
    hop, d = walk.lazy_graph_ball(space, 1.0, radius, 5, log)
    env = log.pop()
    ids, pts = env.all_points()
    net = tess.delaunay(pts, space)
    pos = {int(i): k for k, i in enumerate(ids)}
    for v, nb in log:
        assert np.array_equal(np.sort(ids[net.neighbors(pos[v])]), nb)
    # hop counts agree with breadth-first search on the full triangulation
    hops = walk._hops_from(net, pos[0], radius)
    assert np.sum((hops >= 0) & (hops <= radius)) == len(hop)
    assert d[hop == 0][0] == 0.0


def test_lazy_walk_displacement_consistent():
    tr, env = walk._run_lazy(HYP, 1.0, 14, 3)  # start-frame chart only resolves short walks
    # triangle inequality along the path
    assert np.all(np.abs(np.diff(tr.embedded)) <= tr.step_lengths + 1e-9)
    ids, pts = env.all_points()
    where = pts[list(ids).index(tr.vertex_ids[-1])]
    assert geo.dist(HYP, where, np.zeros(2)) == pytest.approx(tr.embedded[-1], rel=1e-8)


def test_lazy_walk_deterministic():
    a = walk.srw_unbounded(EUC, 1.0, 200, 9)
    b = walk.srw_unbounded(EUC, 1.0, 200, 9)
    assert np.array_equal(a.vertex_ids, b.vertex_ids) and np.array_equal(a.embedded, b.embedded)
    assert a.graph is None
    with pytest.raises(ValueError):
        a.displacement(10, "graph")


def test_lazy_walk_seed_sequence_matches_int():
    a = walk.srw_unbounded(HYP, 1.0, 50, 4)
    b = walk.srw_unbounded(HYP, 1.0, 50, np.random.SeedSequence(4))
    assert np.array_equal(a.vertex_ids, b.vertex_ids)


def test_zero_steps():
    t = walk.srw_unbounded(HYP, 1.0, 0, 1)
    assert t.length == 0 and t.embedded[0] == 0.0


def test_windowed_walk_basics():
    net = tess.delaunay(sample_palm_poisson(EUC, 1.0, 15.0, 1))
    t = walk.srw(net, net.root, 400, 2)
    for a, b in zip(t.vertex_ids[:-1], t.vertex_ids[1:]):
        assert b in net.neighbors(a)
    assert np.all(net.certified[t.vertex_ids])
    assert np.all(np.abs(np.diff(t.graph)) <= 1)
    assert t.graph[0] == 0 and t.embedded[0] == 0
    assert np.allclose(t.step_lengths, geo.dist(EUC, net.points[t.vertex_ids[:-1]], net.points[t.vertex_ids[1:]]))
    lines = t.to_csv().splitlines()
    assert lines[0] == "step,vertex_id,d_embedded,d_graph" and len(lines) == t.length + 2


def test_windowed_walk_censoring():
    net = tess.delaunay(sample_palm_poisson(EUC, 1.0, 5.0, 1))
    t = walk.srw(net, net.root, 10000, 3)
    assert t.censored and t.length < 10000


def test_windowed_walk_rejects_bad_start():
    net = tess.delaunay(sample_palm_poisson(EUC, 1.0, 5.0, 1))
    bad = int(np.flatnonzero(~net.certified)[0])
    with pytest.raises(ValueError):
        walk.srw(net, bad, 10, 0)


def test_uniform_neighbor_choice():
    # from the root, the first step is uniform over its neighbors
    net = tess.delaunay(sample_palm_poisson(EUC, 1.0, 8.0, 6))
    nb = net.neighbors(net.root)
    first = [walk.srw(net, net.root, 1, s).vertex_ids[1] for s in range(3000)]
    counts = np.array([np.sum(np.array(first) == w) for w in nb])
    expected = 3000 / len(nb)
    assert np.all(np.abs(counts - expected) < 5 * math.sqrt(expected))


def test_speed_estimate_needs_replicas():
    traces = walk.unbounded_traces(EUC, 1.0, 20, 5, 1)
    with pytest.raises(walk.WalkRejected):
        walk.speed_estimate(traces)
    with pytest.raises(ValueError):
        walk.speed_estimate(traces, mode="hops")


def test_speed_estimate_and_scaling_on_synthetic_traces():
    n = 100
    traces = [walk.WalkTrace(np.arange(n + 1), 0.5 * np.arange(n + 1.0), None, np.ones(n), False, n)
              for _ in range(40)]
    est = walk.speed_estimate(traces)
    assert est.estimate == pytest.approx(0.5) and est.ci_lo == pytest.approx(0.5)
    sq = [walk.WalkTrace(np.arange(n + 1), np.sqrt(np.arange(n + 1.0)), None, np.ones(n), False, n)
          for _ in range(3)]
    slope, _ = walk.scaling_exponent(sq, [4, 16, 64])
    assert slope == pytest.approx(0.5)
    assert "estimate" in walk.trace_report(est)


def test_graph_ball_containment_and_growth():
    net = tess.delaunay(sample_palm_poisson(HYP, 1.0, 6.0, 2))
    res = walk.graph_ball_containment(net, [1, 2, 3], [1.0, 10.0])
    assert np.all(np.diff(res["size"]) > 0)
    assert res["size"][0] == net.degree[net.root] + 1
    assert np.all(res["contained"][:, 1])
    assert res["valid"][0]


def test_lazy_ball_growth_table():
    tab = walk.lazy_ball_growth(HYP, 1.0, [1, 2, 3], [1.0, 3.0], 3, 1)
    assert tab["replicas"] == 3
    assert np.all(np.diff(tab["mean_size"]) > 0)
    assert np.all(tab["noncontainment"][:, 1] <= tab["noncontainment"][:, 0])


def test_degree_bias_weight():
    net = tess.delaunay(sample_palm_poisson(EUC, 1.0, 12.0, 3))
    w = walk.degree_bias_weight(net, net.root)
    assert w == pytest.approx(net.degree[net.root] / net.degree[tess.certified_core(net)].mean())
