"""Amenability experiments on Delaunay networks.

The coarsening percolation opens an edge when both endpoints have the same
nearest point in an independent sparse Poisson process of intensity
``delta``.  Its clusters give boundary ratios and Folner-type quotients; the
module also has the nearest/second-nearest distance laws, a mass-transport
checker and a spectral upper bound on the edge-isoperimetric constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from . import geometry as geo
from .geometry import EUC, HYP, SpaceKind
from .pointproc import PointSample, ProcessKind, poisson_points, sample_palm_poisson, sample_poisson, sample_radii
from .rng import as_generator, replica_rng
from .tess import EmbeddedNetwork, EmptyCoreError, certified_core, delaunay, voronoi_cells


class ExperimentRejected(RuntimeError):
    """Every replica was discarded or the request cannot be met."""


def _z(level: float) -> float:
    return float(stats.norm.ppf(0.5 + level / 2.0))


@dataclass(frozen=True)
class Estimate:
    estimate: float
    ci_lo: float
    ci_hi: float
    replicas: int
    discarded: int = 0

    @classmethod
    def from_samples(cls, x, discarded: int = 0, level: float = 0.95) -> "Estimate":
        x = np.asarray(x, dtype=float)
        if len(x) == 0:
            raise ExperimentRejected("no usable replicas")
        m = float(x.mean())
        h = _z(level) * float(x.std(ddof=1)) / math.sqrt(len(x)) if len(x) > 1 else math.inf
        return cls(m, m - h, m + h, len(x), discarded)

    @property
    def stderr(self) -> float:
        return (self.ci_hi - self.ci_lo) / (2.0 * _z(0.95))


# -- coarsening percolation -------------------------------------------------------

@dataclass(frozen=True)
class Cluster:
    vertex_ids: np.ndarray
    boundary_edge_count: int
    cells_union_area: float
    certified: bool


@dataclass(eq=False)
class PercolationLabeling:
    """Edge labels of the coarsening percolation on ``net``.

    ``nearest[v]`` is the coarse point whose cell holds vertex ``v`` and
    ``label_certified[v]`` says that choice is forced by coarse points
    inside the coarse window.
    """

    net: EmbeddedNetwork
    delta: float
    q_points: PointSample
    seed: int | None
    nearest: np.ndarray
    label_certified: np.ndarray
    edge_open: np.ndarray
    cluster: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.cluster is None:
            n = self.net.n_vertices
            e = self.net.edges[self.edge_open]
            adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
            self.cluster = connected_components(adj, directed=False)[1]

    @property
    def vertex_open(self) -> np.ndarray:
        return np.ones(self.net.n_vertices, dtype=bool)

    def closed_degree(self) -> np.ndarray:
        closed = self.net.edges[~self.edge_open]
        return np.bincount(closed.ravel(), minlength=self.net.n_vertices)

    def boundary_counts(self) -> np.ndarray:
        """|boundary| per cluster label (edges with exactly one endpoint inside)."""
        a, b = self.net.edges[:, 0], self.net.edges[:, 1]
        ca, cb = self.cluster[a], self.cluster[b]
        cross = ca != cb
        k = int(self.cluster.max()) + 1 if len(self.cluster) else 0
        return np.bincount(ca[cross], minlength=k) + np.bincount(cb[cross], minlength=k)

    def _trusted(self) -> np.ndarray:
        """Vertices whose neighbor list and whose neighbors' labels are exact."""
        net = self.net
        ok = net.certified & self.label_certified
        bad_nb = np.zeros(net.n_vertices, dtype=bool)
        lc = self.label_certified
        a, b = net.edges[:, 0], net.edges[:, 1]
        np.logical_or.at(bad_nb, a, ~lc[b])
        np.logical_or.at(bad_nb, b, ~lc[a])
        return ok & ~bad_nb

    def clusters(self, areas: np.ndarray | None = None) -> list[Cluster]:
        bc = self.boundary_counts()
        trusted = self._trusted()
        out = []
        order = np.argsort(self.cluster, kind="stable")
        splits = np.flatnonzero(np.diff(self.cluster[order])) + 1
        for ids in np.split(order, splits):
            if len(ids) == 0:
                continue
            c = int(self.cluster[ids[0]])
            area = float(np.sum(areas[ids])) if areas is not None else math.nan
            out.append(Cluster(ids, int(bc[c]), area, bool(trusted[ids].all())))
        return out

    def root_cluster(self) -> np.ndarray:
        root = self.net.root
        if root is None:
            raise ValueError("network has no root")
        return np.flatnonzero(self.cluster == self.cluster[root])


def coarse_window(space: SpaceKind, window: float, delta: float, margin: float | None = None) -> float:
    """Window for the coarse process: the base window plus about one coarse-cell radius."""
    if margin is None:
        margin = 2.0 * geo.inverse_ball_volume(space, 1.0 / delta)
    w = window + margin
    if space is HYP and w > geo.MAX_HYPERBOLIC_WINDOW:
        w = geo.MAX_HYPERBOLIC_WINDOW
        if w <= window:
            raise ExperimentRejected(
                f"no room for a coarse window beyond the base window {window} under the precision cap")
    return w


def coarsen_percolation(net: EmbeddedNetwork, delta: float, seed, q_points: PointSample | np.ndarray | None = None,
                        margin: float | None = None) -> PercolationLabeling:
    """Open the edges whose endpoints share their nearest point of a Poisson
    process of intensity ``delta`` (drawn from ``seed`` unless ``q_points``
    is given)."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    space = net.space
    if q_points is None:
        if not math.isfinite(net.window_radius):
            raise ValueError("network has no finite window; pass q_points")
        w = coarse_window(space, net.window_radius, delta, margin)
        pts = poisson_points(space, delta, w, seed)
        q = PointSample(space, pts, w, ProcessKind.poisson(delta),
                        seed if isinstance(seed, (int, np.integer)) else None)
    elif isinstance(q_points, PointSample):
        q = q_points
    else:
        q = PointSample(space, np.asarray(q_points, dtype=float).reshape(-1, 2), math.inf,
                        ProcessKind.poisson(delta))
    n = net.n_vertices
    if q.count == 0:
        # no coarse points at all: a single cell that is not known to be one
        nearest = np.zeros(n, dtype=np.int64)
        cert = np.zeros(n, dtype=bool)
    else:
        idx, d = geo.nearest_sites(space, q.points, net.points, k=1)
        nearest = idx[:, 0]
        r = net.distance_from_origin()
        cert = (d[:, 0] + r < q.window_radius) if math.isfinite(q.window_radius) else np.ones(n, dtype=bool)
    e = net.edges
    edge_open = nearest[e[:, 0]] == nearest[e[:, 1]]
    return PercolationLabeling(net, float(delta), q, seed if isinstance(seed, (int, np.integer)) else None,
                               nearest, cert, edge_open)


def root_ratio(lab: PercolationLabeling, estimator: str = "cluster") -> float | None:
    """Boundary ratio at the root, or ``None`` if it is not determined by the window.

    ``"cluster"`` is ``|boundary K(o)| / |K(o)|``.  ``"closed"`` is the number
    of closed edges at the root; by mass transport (each vertex of a cluster
    sends its closed-edge count, split evenly, to every member) the two
    have the same expectation.
    """
    root = lab.net.root
    trusted = lab._trusted()
    if estimator == "closed":
        if not trusted[root]:
            return None
        return float(lab.closed_degree()[root])
    if estimator != "cluster":
        raise ValueError(f"unknown estimator {estimator!r}")
    k = lab.root_cluster()
    if not trusted[k].all():
        return None
    return float(lab.boundary_counts()[lab.cluster[root]] / len(k))


def boundary_ratio_estimate(labelings: list[PercolationLabeling], estimator: str = "cluster",
                            level: float = 0.95) -> Estimate:
    vals = []
    discarded = 0
    for lab in labelings:
        v = root_ratio(lab, estimator)
        if v is None:
            discarded += 1
        else:
            vals.append(v)
    if not vals:
        raise ExperimentRejected("every replica was discarded (root cluster not certified)")
    return Estimate.from_samples(vals, discarded, level)


def param_rows(params, per_replica: list[list[float | None]], name: str = "delta") -> list[dict]:
    """One row per parameter from per-replica value lists (``None`` = discarded)."""
    rows = []
    for j, d in enumerate(params):
        vals = [x[j] for x in per_replica if x[j] is not None]
        disc = len(per_replica) - len(vals)
        if vals:
            e = Estimate.from_samples(vals, disc)
            rows.append({name: float(d), "estimate": e.estimate, "ci_lo": e.ci_lo, "ci_hi": e.ci_hi,
                         "replicas": e.replicas, "discarded": disc})
        else:
            rows.append({name: float(d), "estimate": math.nan, "ci_lo": math.nan, "ci_hi": math.nan,
                         "replicas": 0, "discarded": disc})
    return rows


def percolation_replica(space, lam: float, window: float, deltas, seed: int, replica: int,
                        estimator: str = "cluster") -> list[float | None]:
    """Root boundary ratios of one Palm sample, one coarse process per delta."""
    net = delaunay(sample_palm_poisson(space, lam, window, replica_rng(seed, replica)))
    return [root_ratio(coarsen_percolation(net, float(d), replica_rng(seed, replica, 1, j)), estimator)
            for j, d in enumerate(deltas)]


def percolation_experiment(space, lam: float, window: float, deltas, replicas: int, seed: int,
                           estimator: str = "cluster", start: int = 0) -> list[dict]:
    """Boundary ratio per delta; each replica draws a fresh Palm sample and coarse process."""
    per = [percolation_replica(space, lam, window, deltas, seed, r, estimator)
           for r in range(start, start + replicas)]
    return param_rows(deltas, per)


# -- nearest and second-nearest coarse points ----------------------------------------

def d1_window(space, delta: float, miss: float = 1e-4) -> float:
    """Radius whose ball holds at least two points with probability >= 1 - miss."""
    # P[N < 2] = e^{-m} (1 + m) for N ~ Poisson(m)
    from scipy.optimize import brentq

    m = brentq(lambda x: math.exp(-x) * (1.0 + x) - miss, 1e-9, 100.0)
    return float(geo.inverse_ball_volume(space, m / delta))


def d1_tail(space, delta: float, t):
    return np.exp(-delta * np.asarray(geo.ball_volume(space, np.asarray(t, dtype=float))))


def d2d1_envelope(space, delta: float, t):
    return np.exp(-delta * np.asarray(geo.ball_volume(space, np.asarray(t, dtype=float) / 2.0)))


def d1_d2_replica(space, delta: float, window: float, rng, ball_points: int = 100):
    """``(d1, d2, ball_ok)`` for one coarse sample; ``None`` if fewer than two points.

    ``ball_ok`` says every one of ``ball_points`` uniform points of
    ``B(o, (d2 - d1)/2)`` has the nearest coarse point of ``o`` as its own
    nearest coarse point (``None`` when not checked).
    """
    space = SpaceKind.parse(space)
    rng = as_generator(rng)
    pts = poisson_points(space, delta, window, rng)
    if len(pts) < 2:
        return None
    dist0 = np.atleast_1d(geo.dist(space, pts, np.zeros(2)))
    order = np.argsort(dist0)
    d1, d2 = float(dist0[order[0]]), float(dist0[order[1]])
    rad = 0.5 * (d2 - d1)
    ok = None
    if ball_points and rad > 0:
        rr = sample_radii(space, rad * (1 - 1e-9), rng.random(ball_points))
        th = rng.random(ball_points) * 2.0 * math.pi
        rho = np.asarray(geo.radius_to_chart(space, rr))
        x = np.column_stack([rho * np.cos(th), rho * np.sin(th)])
        idx, _ = geo.nearest_sites(space, pts, x, k=1)
        ok = bool(np.all(idx[:, 0] == order[0]))
    return d1, d2, ok


def default_t_grid(space, delta: float, points: int = 20) -> np.ndarray:
    t_max = 2.0 * float(geo.inverse_ball_volume(space, math.log(1e3) / delta))
    return np.linspace(0.0, t_max, points)


def d1_d2_summary(space, delta: float, records: list, t_grid=None, window: float = math.nan) -> dict:
    """Compare per-replica ``(d1, d2, ball_ok)`` records with the closed forms."""
    space = SpaceKind.parse(space)
    ok = [x for x in records if x is not None]
    discarded = len(records) - len(ok)
    if not ok:
        raise ExperimentRejected("every replica was discarded")
    d1 = np.array([x[0] for x in ok])
    gap = np.array([x[1] - x[0] for x in ok])
    checks = [x[2] for x in ok if x[2] is not None]
    n = len(d1)
    ks = stats.kstest(d1, lambda t: 1.0 - d1_tail(space, delta, np.maximum(t, 0.0)))
    t_grid = default_t_grid(space, delta) if t_grid is None else np.asarray(t_grid, dtype=float)
    emp_d1 = np.array([np.mean(d1 >= t) for t in t_grid])
    emp_gap = np.array([np.mean(gap >= t) for t in t_grid])
    env = d2d1_envelope(space, delta, t_grid)
    slack = 3.0 * np.sqrt(env * (1.0 - env) / n)
    return {
        "space": space.value,
        "delta": float(delta),
        "window": window,
        "replicas": n,
        "discarded": discarded,
        "ks_statistic": float(ks.statistic),
        "ks_pvalue": float(ks.pvalue),
        "ks_threshold": 1.63 / math.sqrt(n),
        "t": t_grid,
        "d1_tail": emp_d1,
        "d1_closed_form": d1_tail(space, delta, t_grid),
        "gap_tail": emp_gap,
        "gap_envelope": env,
        "gap_slack": slack,
        "envelope_ok": bool(np.all(emp_gap <= env + slack)),
        "ball_in_cell_ok": int(sum(checks)),
        "ball_in_cell_checked": len(checks),
        "d1": d1,
        "gap": gap,
    }


def checked_d1_window(space, delta: float, window: float | None = None) -> float:
    space = SpaceKind.parse(space)
    if not delta > 0:
        raise ValueError("delta must be positive")
    need = d1_window(space, delta)
    w = need if window is None else float(window)
    if w < need * (1 - 1e-12):
        raise ExperimentRejected(f"window {w} too small; need {need} for d2 to be realized w.p. 1 - 1e-4")
    if space is HYP and w > geo.MAX_HYPERBOLIC_WINDOW:
        raise ExperimentRejected("window exceeds the precision cap")
    return w


def d1_d2_statistics(space, delta: float, replicas: int, seed: int, t_grid=None,
                     ball_points: int = 100, window: float | None = None) -> dict:
    """Empirical laws of the nearest (d1) and second-nearest (d2) coarse
    points to the origin against the closed forms, plus the ball-in-cell
    check ``B(o, (d2 - d1)/2)`` inside the cell of the nearest point."""
    w = checked_d1_window(space, delta, window)
    recs = [d1_d2_replica(space, delta, w, replica_rng(seed, r), ball_points) for r in range(replicas)]
    return d1_d2_summary(space, delta, recs, t_grid, w)


# -- Folner quotients ---------------------------------------------------------------

def _straight(space: SpaceKind, pts: np.ndarray) -> np.ndarray:
    return geo.to_klein(pts) if space is HYP else pts


def _in_polygon(px: np.ndarray, py: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd rule; ``poly`` in straight-edge coordinates."""
    inside = np.zeros(len(px), dtype=bool)
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for a, b, c, d in zip(x0, y0, x1, y1):
        cond = (b > py) != (d > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = a + (py - b) * (c - a) / (d - b)
        inside ^= cond & (px < xint)
    return inside


def in_union(space: SpaceKind, polygons: list[geo.GeodesicPolygon], pts: np.ndarray) -> np.ndarray:
    """Membership of ``pts`` (chart coordinates) in a union of geodesic polygons."""
    s = _straight(space, pts)
    out = np.zeros(len(pts), dtype=bool)
    for poly in polygons:
        v = _straight(space, np.asarray(poly.vertices, dtype=float))
        lo = v.min(axis=0)
        hi = v.max(axis=0)
        box = (s[:, 0] >= lo[0]) & (s[:, 0] <= hi[0]) & (s[:, 1] >= lo[1]) & (s[:, 1] <= hi[1]) & ~out
        if box.any():
            i = np.flatnonzero(box)
            out[i] |= _in_polygon(s[i, 0], s[i, 1], v)
    return out


@dataclass(frozen=True)
class FolnerResult:
    quotient: float
    ci_lo: float
    ci_hi: float
    per_isometry: np.ndarray
    volume: float
    mc_points: int


def folner_quotient(polygons: list[geo.GeodesicPolygon], isometries: list[geo.Isometry], mc_points: int,
                    seed, level: float = 0.95) -> FolnerResult:
    """max over g of ``Vol(gV sym-diff V) / Vol(V)`` for ``V`` the union of
    ``polygons``, by uniform sampling of a ball that contains every ``gV``."""
    if not polygons:
        raise ExperimentRejected("empty set")
    space = polygons[0].space
    vol = float(sum(geo.polygon_area(p, check=False) for p in polygons))
    if not vol > 0:
        raise ExperimentRejected("set has zero volume")
    verts = np.vstack([np.asarray(p.vertices, dtype=float) for p in polygons])
    rho = float(np.max(geo.dist(space, verts, np.zeros(2))))
    shift = max((float(geo.dist(space, g.apply(np.zeros(2)), np.zeros(2))) for g in isometries), default=0.0)
    R = rho + shift
    if space is HYP and R > geo.MAX_HYPERBOLIC_WINDOW:
        raise ExperimentRejected("sampling ball exceeds the precision cap")
    rng = as_generator(seed)
    r = sample_radii(space, R, rng.random(mc_points))
    th = rng.random(mc_points) * 2.0 * math.pi
    c = np.asarray(geo.radius_to_chart(space, r))
    pts = np.column_stack([c * np.cos(th), c * np.sin(th)])
    in_v = in_union(space, polygons, pts)
    box_vol = float(geo.ball_volume(space, R))
    z = _z(level)
    q, lo, hi = [], [], []
    for g in isometries:
        in_gv = in_union(space, polygons, g.inverse().apply(pts))
        p = float(np.mean(in_v != in_gv))
        h = z * math.sqrt(max(p * (1 - p), 0.0) / mc_points)
        q.append(p * box_vol / vol)
        lo.append(max(p - h, 0.0) * box_vol / vol)
        hi.append((p + h) * box_vol / vol)
    k = int(np.argmax(q)) if q else 0
    return FolnerResult(q[k] if q else 0.0, lo[k] if q else 0.0, hi[k] if q else 0.0,
                        np.asarray(q), vol, mc_points)


def root_cluster_polygons(lab: PercolationLabeling) -> list[geo.GeodesicPolygon] | None:
    """Cell polygons of the root cluster, or ``None`` if any cell is not certified."""
    cells = voronoi_cells(lab.net)
    k = lab.root_cluster()
    trusted = lab._trusted()
    if not trusted[k].all() or not all(cells[v].certified for v in k):
        return None
    return [cells[v].polygon for v in k]


def unit_translations(space, length: float = 1.0, directions: int = 4) -> list[geo.Isometry]:
    out = []
    for j in range(directions):
        a = 2.0 * math.pi * j / directions
        out.append(geo.rotation(space, a).compose(geo.translation_along_x(space, length)).compose(
            geo.rotation(space, -a)))
    return out


def folner_replica(space, lam: float, window: float, deltas, seed: int, replica: int,
                   mc_points: int = 20000, length: float = 1.0) -> list[float | None]:
    space = SpaceKind.parse(space)
    isos = unit_translations(space, length)
    net = delaunay(sample_palm_poisson(space, lam, window, replica_rng(seed, replica)))
    out = []
    for j, d in enumerate(deltas):
        lab = coarsen_percolation(net, float(d), replica_rng(seed, replica, 1, j))
        polys = root_cluster_polygons(lab)
        if polys is None:
            out.append(None)
            continue
        try:
            out.append(folner_quotient(polys, isos, mc_points, replica_rng(seed, replica, 2, j)).quotient)
        except ExperimentRejected:
            out.append(None)
    return out


def folner_experiment(space, lam: float, window: float, deltas, replicas: int, seed: int,
                      mc_points: int = 20000, length: float = 1.0) -> list[dict]:
    per = [folner_replica(space, lam, window, deltas, seed, r, mc_points, length) for r in range(replicas)]
    return param_rows(deltas, per)


# -- mass transport -----------------------------------------------------------------

def _f_adjacent(net: EmbeddedNetwork):
    e = net.edges
    return np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]), np.ones(2 * len(e))


def _f1(net: EmbeddedNetwork):
    """1[x ~ y, deg x > deg y]."""
    e = net.edges
    deg = net.degree
    a, b = e[:, 0], e[:, 1]
    fwd = deg[a] > deg[b]
    back = deg[b] > deg[a]
    src = np.concatenate([a[fwd], b[back]])
    dst = np.concatenate([b[fwd], a[back]])
    return src, dst, np.ones(len(src))


def _f2(net: EmbeddedNetwork):
    """1[y is the nearest point to x]; nearest points are always Delaunay neighbors."""
    e = net.edges
    if len(e) == 0:
        return np.zeros(0, int), np.zeros(0, int), np.zeros(0)
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    d = np.atleast_1d(geo.dist(net.space, net.points[src], net.points[dst]))
    order = np.lexsort((dst, d, src))
    first = np.ones(len(order), dtype=bool)
    first[1:] = src[order][1:] != src[order][:-1]
    pick = order[first]
    return src[pick], dst[pick], np.ones(len(pick))


def _f3(net: EmbeddedNetwork):
    """d(x, y) 1[x ~ y] / deg x."""
    src, dst, _ = _f_adjacent(net)
    d = np.atleast_1d(geo.dist(net.space, net.points[src], net.points[dst])) if len(src) else np.zeros(0)
    return src, dst, d / net.degree[src]


TRANSPORTS = {"adjacent": _f_adjacent, "f1": _f1, "f2": _f2, "f3": _f3}


def transport_matrix(net: EmbeddedNetwork, transport: str) -> csr_matrix:
    """``F[x, y] = f(G, x, y)`` for a registered transport."""
    if transport not in TRANSPORTS:
        raise ValueError(f"unknown transport {transport!r}; choose from {sorted(TRANSPORTS)}")
    src, dst, w = TRANSPORTS[transport](net)
    n = net.n_vertices
    return csr_matrix((w, (src, dst)), shape=(n, n))


def sent_received(net: EmbeddedNetwork, transport: str) -> tuple[np.ndarray, np.ndarray]:
    f = transport_matrix(net, transport)
    return np.asarray(f.sum(axis=1)).ravel(), np.asarray(f.sum(axis=0)).ravel()


def exact_vertices(net: EmbeddedNetwork) -> np.ndarray:
    """Certified vertices whose neighbors are all certified (sent and received exact)."""
    exact = net.certified.copy()
    a, b = net.edges[:, 0], net.edges[:, 1]
    np.logical_and.at(exact, a, net.certified[b])
    np.logical_and.at(exact, b, net.certified[a])
    return exact


def mtp_radius(space, window: float) -> float:
    """Default averaging ball: well inside the region where vertices are exact."""
    space = SpaceKind.parse(space)
    return 0.45 * window if space is EUC else window - 5.0


def mtp_roots(net: EmbeddedNetwork, radius: float) -> np.ndarray | None:
    """Vertices in the fixed ball ``B(o, radius)``, or ``None`` if one of them is not exact.

    The ball is fixed in advance: for a stationary sample the ball sums of
    sent and received mass then have equal means exactly, while any
    data-dependent choice of roots (dropping inexact vertices one by one,
    or cutting at the nearest inexact one) is biased, badly so in the
    hyperbolic plane where the shell near the cut holds a fixed fraction
    of the ball.
    """
    roots = net.distance_from_origin() < radius
    if not exact_vertices(net)[roots].all():
        return None
    return roots


@dataclass(frozen=True)
class MTPResult:
    transport: str
    sent: Estimate
    received: Estimate
    difference: Estimate

    @property
    def agree(self) -> bool:
        """Sent and received agree within combined 3-sigma intervals."""
        s = math.hypot(self.sent.stderr, self.received.stderr)
        return abs(self.sent.estimate - self.received.estimate) <= 3.0 * s


def mtp_check(net: EmbeddedNetwork, transport: str, radius: float) -> tuple[float, float, int]:
    """Sent and received mass averaged over the vertices of ``B(o, radius)``."""
    sent, rec = sent_received(net, transport)
    roots = mtp_roots(net, radius)
    if roots is None:
        raise EmptyCoreError("ball holds vertices with uncertified neighbors")
    if not roots.any():
        raise EmptyCoreError("no vertices in the ball")
    return float(sent[roots].mean()), float(rec[roots].mean()), int(roots.sum())


def mtp_replica(space, lam: float, window: float, transport: str, seed: int, replica: int,
                radius: float | None = None):
    """``(sent, received)`` ball means for one stationary sample, or ``None`` if the ball is not exact."""
    if transport not in TRANSPORTS:
        raise ValueError(f"unknown transport {transport!r}; choose from {sorted(TRANSPORTS)}")
    radius = mtp_radius(space, window) if radius is None else float(radius)
    if not radius > 0:
        raise ExperimentRejected(f"window {window} leaves no averaging ball")
    net = delaunay(sample_poisson(space, lam, window, replica_rng(seed, replica)))
    try:
        a, b, _ = mtp_check(net, transport, radius)
    except EmptyCoreError:
        return None
    return a, b


def mtp_summary(transport: str, per: list) -> MTPResult:
    ok = [x for x in per if x is not None]
    disc = len(per) - len(ok)
    if not ok:
        raise ExperimentRejected("no replica had certified roots")
    s_vals = np.array([x[0] for x in ok])
    r_vals = np.array([x[1] for x in ok])
    return MTPResult(transport, Estimate.from_samples(s_vals, disc), Estimate.from_samples(r_vals, disc),
                     Estimate.from_samples(s_vals - r_vals, disc))


def mtp_experiment(space, lam: float, window: float, transport: str, replicas: int, seed: int,
                   radius: float | None = None) -> MTPResult:
    return mtp_summary(transport, [mtp_replica(space, lam, window, transport, seed, r, radius)
                                   for r in range(replicas)])


# -- isoperimetry -------------------------------------------------------------------

@dataclass(frozen=True)
class IsoperimetricBound:
    bound: float
    vertices: int
    component_fraction: float
    iterations: int
    converged: bool
    best_set: np.ndarray


def _second_eigenvector(adj: csr_matrix, deg: np.ndarray, tol: float, max_iter: int, rng):
    """Second eigenvector of the lazy normalized adjacency ``(I + D^-1/2 A D^-1/2) / 2``
    by power iteration, deflating the top eigenvector ``D^{1/2} 1``."""
    dh = np.sqrt(deg)
    top = dh / np.linalg.norm(dh)
    inv = 1.0 / dh
    x = rng.standard_normal(len(deg))
    x -= top * (top @ x)
    x /= np.linalg.norm(x)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        y = 0.5 * (x + inv * (adj @ (inv * x)))
        y -= top * (top @ y)
        ny = np.linalg.norm(y)
        if ny == 0:
            break
        y /= ny
        if np.linalg.norm(y - x) < tol:
            x = y
            converged = True
            break
        x = y
    return x, it, converged


def sweep_cut(adj: csr_matrix, deg: np.ndarray, order: np.ndarray):
    """min over prefixes S of ``order`` (vol S <= vol V / 2) of |boundary S| / vol S."""
    n = len(order)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    coo = adj.tocoo()
    a, b = coo.row, coo.col
    up = a < b
    pa, pb = pos[a[up]], pos[b[up]]
    lo, hi = np.minimum(pa, pb), np.maximum(pa, pb)
    # edge is cut by prefix k (first k+1 vertices) iff lo <= k < hi
    delta = np.zeros(n + 1)
    np.add.at(delta, lo, 1.0)
    np.add.at(delta, hi, -1.0)
    cut = np.cumsum(delta)[:n]
    vol = np.cumsum(deg[order])
    ok = vol <= 0.5 * deg.sum()
    if not ok.any():
        return math.inf, 0
    ratio = np.where(ok, cut / np.maximum(vol, 1e-300), np.inf)
    k = int(np.argmin(ratio))
    return float(ratio[k]), k + 1


def isoperimetric_upper_bound(net: EmbeddedNetwork, core: np.ndarray | None = None, tol: float = 1e-8,
                              max_iter: int = 200000, seed=0) -> IsoperimetricBound:
    """Spectral sweep-cut upper bound on the edge-isoperimetric constant of the
    core subgraph (the certified core by default; its largest component if
    disconnected)."""
    mask = certified_core(net) if core is None else np.asarray(core, dtype=bool)
    ids = np.flatnonzero(mask)
    if len(ids) == 0:
        raise EmptyCoreError("empty core")
    e = net.edges
    keep = mask[e[:, 0]] & mask[e[:, 1]]
    remap = np.full(net.n_vertices, -1, dtype=np.int64)
    remap[ids] = np.arange(len(ids))
    a, b = remap[e[keep, 0]], remap[e[keep, 1]]
    m = len(ids)
    adj = csr_matrix((np.ones(2 * len(a)), (np.concatenate([a, b]), np.concatenate([b, a]))), shape=(m, m))
    ncomp, comp = connected_components(adj, directed=False)
    big = np.argmax(np.bincount(comp))
    sel = np.flatnonzero(comp == big)
    frac = len(sel) / m
    adj = adj[sel][:, sel].tocsr()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    if len(sel) < 2 or deg.sum() == 0:
        raise EmptyCoreError("core has no edges")
    x, it, conv = _second_eigenvector(adj, deg, tol, max_iter, as_generator(seed))
    f = x / np.sqrt(deg)
    best, best_set = math.inf, np.zeros(0, dtype=np.int64)
    for order in (np.argsort(f, kind="stable"), np.argsort(-f, kind="stable")):
        val, k = sweep_cut(adj, deg, order)
        if val < best:
            best, best_set = val, ids[sel[order[:k]]]
    return IsoperimetricBound(best, len(sel), frac, it, conv, best_set)
