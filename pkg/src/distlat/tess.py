"""Embedded Delaunay networks and Voronoi tessellations from point samples.

Hyperbolic metric disks are Euclidean disks in the Poincare chart, so the
hyperbolic Delaunay graph is read off the Euclidean triangulation of the
chart coordinates: an edge survives when some empty circle through its
endpoints lies inside the unit disk.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry as geo
from ._bowyer_watson import GHOST, cocircular_tiebreak, hilbert_order, triangulate
from ._cell import origin_cell
from ._stars import vertex_stars
from .geometry import EUC, HYP, SpaceKind
from .pointproc import PointSample, sample_palm_poisson
from .rng import replica_rng


class EmptyCoreError(ValueError):
    """No certified vertices or cells to average over."""


@dataclass(eq=False)
class EmbeddedNetwork:
    """Delaunay graph with vertex marks (positions) and edge marks (geodesic midpoints).

    Adjacency is CSR: the neighbors of ``v`` are
    ``indices[indptr[v]:indptr[v+1]]`` (sorted) and ``edge_of[...]`` gives
    the matching row of ``edges``.
    """

    space: SpaceKind
    window_radius: float
    points: np.ndarray
    edges: np.ndarray
    edge_marks: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    edge_of: np.ndarray
    certified: np.ndarray
    root: int | None = None
    triangles: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))
    tri_center: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    tri_radius: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tri_valid: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    star_indptr: np.ndarray | None = None
    star: np.ndarray | None = None
    star_closed: np.ndarray | None = None
    degenerate: str | None = None

    @property
    def n_vertices(self) -> int:
        return self.points.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[np.ndarray]:
        return [self.neighbors(v) for v in range(self.n_vertices)]

    @property
    def vertices(self) -> list[tuple[int, np.ndarray]]:
        return [(i, self.points[i]) for i in range(self.n_vertices)]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}

    def distance_from_origin(self) -> np.ndarray:
        if self.space is EUC:
            return np.hypot(self.points[:, 0], self.points[:, 1])
        return 2.0 * np.arctanh(np.minimum(np.hypot(self.points[:, 0], self.points[:, 1]), 1.0))


@dataclass(frozen=True)
class VoronoiCell:
    nucleus_id: int
    polygon: geo.GeodesicPolygon
    area: float
    certified: bool
    bounded: bool
    in_core: bool = False


def _csr(n: int, edges: np.ndarray):
    if len(edges) == 0:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(len(edges)), np.arange(len(edges))])
    order = np.lexsort((dst, src))
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst[order].astype(np.int64), eid[order].astype(np.int64)


def _circumcircles(points: np.ndarray, tris: np.ndarray):
    a = points[tris[:, 0]]
    b = points[tris[:, 1]] - a
    c = points[tris[:, 2]] - a
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    b2 = np.sum(b * b, axis=1)
    c2 = np.sum(c * c, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (c[:, 1] * b2 - b[:, 1] * c2) / d
        uy = (b[:, 0] * c2 - c[:, 0] * b2) / d
    center = a + np.column_stack([ux, uy])
    radius = np.hypot(ux, uy)
    return center, radius


def _pencil_reaches_disk(pa, pb, t_lo, t_hi, iters=200):
    """For chord (pa, pb) and circle centers m + t n with t in [t_lo, t_hi],
    is some circle of the pencil strictly inside the unit disk?"""
    m = 0.5 * (pa + pb)
    d = pb - pa
    h = 0.5 * np.hypot(d[:, 0], d[:, 1])
    nrm = np.column_stack([-d[:, 1], d[:, 0]]) / (2.0 * h)[:, None]
    mn = np.sum(m * nrm, axis=1)
    mm = np.sum(m * m, axis=1)

    def g(t):
        return np.sqrt(np.maximum(mm + 2 * t * mn + t * t, 0.0)) + np.sqrt(h * h + t * t)

    def dg(t):
        cn = np.sqrt(np.maximum(mm + 2 * t * mn + t * t, 1e-300))
        return (mn + t) / cn + t / np.sqrt(h * h + t * t)

    # g is convex in t; bisection on g' for the unconstrained minimizer
    lo = np.full(len(h), -4.0)
    hi = np.full(len(h), 4.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = dg(mid) > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    t_star = np.clip(0.5 * (lo + hi), t_lo, t_hi)
    return g(t_star) < 1.0


def _pencil_coordinate(pa, pb, centers):
    """Signed offset along the left normal of pa -> pb of circle centers."""
    m = 0.5 * (pa + pb)
    d = pb - pa
    nrm = np.column_stack([-d[:, 1], d[:, 0]]) / np.hypot(d[:, 0], d[:, 1])[:, None]
    return np.sum((centers - m) * nrm, axis=1)


def _trivial_network(space, window, points, root, edges=None, degenerate=None):
    n = len(points)
    edges = np.zeros((0, 2), dtype=np.int64) if edges is None else edges
    indptr, indices, edge_of = _csr(n, edges)
    marks = geo.geodesic_midpoint(space, points[edges[:, 0]], points[edges[:, 1]]) if len(edges) else np.zeros((0, 2))
    return EmbeddedNetwork(space, window, points, edges, np.asarray(marks).reshape(-1, 2), indptr, indices,
                           edge_of, np.zeros(n, dtype=bool), root, degenerate=degenerate)


def delaunay(sample: PointSample | np.ndarray, space=None, window_radius=None) -> EmbeddedNetwork:
    """Embedded Delaunay network of a sample (certified against its window)."""
    if isinstance(sample, PointSample):
        points = np.asarray(sample.points, dtype=float)
        space = sample.space
        window = sample.window_radius if window_radius is None else float(window_radius)
        root = sample.root
    else:
        points = np.asarray(sample, dtype=float).reshape(-1, 2)
        space = SpaceKind.parse(space or EUC)
        window = math.inf if window_radius is None else float(window_radius)
        root = None
    space = SpaceKind.parse(space)
    geo.check_chart(space, points)
    n = len(points)
    if n < 3:
        return _trivial_network(space, window, points, root)

    xs = np.ascontiguousarray(points[:, 0])
    ys = np.ascontiguousarray(points[:, 1])
    tri, nbr, alive, status = triangulate(xs, ys, hilbert_order(xs, ys))
    if status == 2:
        raise ValueError("sample contains coincident points")
    if status == 1:
        # all collinear: 1D Delaunay convention, a path in order along the line
        d = points - points[0]
        direction = d[np.argmax(np.hypot(d[:, 0], d[:, 1]))]
        order = np.argsort(d @ direction, kind="stable")
        e = np.sort(np.column_stack([order[:-1], order[1:]]), axis=1)
        return _trivial_network(space, window, points, root, e, degenerate="collinear")
    cocircular_tiebreak(tri, nbr, alive, xs, ys)

    real = alive & (tri[:, 2] != GHOST)
    new_index = np.full(len(tri), -1, dtype=np.int64)
    new_index[real] = np.arange(int(real.sum()))
    tris = tri[real]
    center, radius = _circumcircles(points, tris)
    if space is HYP:
        tri_valid = np.hypot(center[:, 0], center[:, 1]) + radius < 1.0
    else:
        tri_valid = np.ones(len(tris), dtype=bool)

    # half-edges a -> b with the triangle on their left
    ha = tris[:, [1, 2, 0]].ravel()
    hb = tris[:, [2, 0, 1]].ravel()
    ht = np.repeat(np.arange(len(tris)), 3)
    lo = np.minimum(ha, hb)
    hi = np.maximum(ha, hb)
    key = lo * n + hi
    uniq, inv = np.unique(key, return_inverse=True)
    edges = np.column_stack([uniq // n, uniq % n]).astype(np.int64)
    left = np.full(len(edges), -1, dtype=np.int64)    # triangle left of lo -> hi
    right = np.full(len(edges), -1, dtype=np.int64)
    fwd = ha < hb
    left[inv[fwd]] = ht[fwd]
    right[inv[~fwd]] = ht[~fwd]

    if space is HYP:
        pa = points[edges[:, 0]]
        pb = points[edges[:, 1]]
        both_in = np.ones(len(edges), dtype=bool)
        for side in (left, right):
            has = side >= 0
            both_in &= has
            both_in[has] &= tri_valid[side[has]]
        check = ~both_in
        keep = np.ones(len(edges), dtype=bool)
        if check.any():
            idx = np.flatnonzero(check)
            t_hi = np.full(len(idx), np.inf)
            t_lo = np.full(len(idx), -np.inf)
            lft = left[idx]
            rgt = right[idx]
            has_l = lft >= 0
            has_r = rgt >= 0
            t_hi[has_l] = _pencil_coordinate(pa[idx][has_l], pb[idx][has_l], center[lft[has_l]])
            t_lo[has_r] = _pencil_coordinate(pa[idx][has_r], pb[idx][has_r], center[rgt[has_r]])
            keep[idx] = _pencil_reaches_disk(pa[idx], pb[idx], t_lo, t_hi)
        edges = edges[keep]

    indptr, indices, edge_of = _csr(n, edges)
    marks = geo.geodesic_midpoint(space, points[edges[:, 0]], points[edges[:, 1]])

    sp, star_old, closed = vertex_stars(tri, nbr, alive, n)
    star = new_index[star_old]

    net = EmbeddedNetwork(space, window, points, edges, np.asarray(marks).reshape(-1, 2), indptr, indices,
                          edge_of, np.zeros(n, dtype=bool), root, tris, center, radius, tri_valid,
                          sp, star, closed)
    net.certified = certify(net)[0]
    return net


def _tri_inside_window(net: EmbeddedNetwork, margin: float = 0.0) -> np.ndarray:
    reach = np.hypot(net.tri_center[:, 0], net.tri_center[:, 1]) + net.tri_radius
    w = net.window_radius - margin
    if not math.isfinite(w):
        limit = 1.0 if net.space is HYP else math.inf
    else:
        limit = float(geo.radius_to_chart(net.space, max(w, 0.0)))
    ok = reach < limit
    if net.space is HYP:
        ok &= net.tri_valid
    return ok


def certify(net: EmbeddedNetwork, cells: list[VoronoiCell] | None = None, margin: float = 0.0):
    """Vertex flags (and cell flags when ``cells`` is given).

    A vertex is certified when its triangle star is closed and every
    incident circumdisk lies strictly inside the window; its neighborhood
    is then the same as in the untruncated process.
    """
    n = net.n_vertices
    if net.star is None or len(net.triangles) == 0:
        vflags = np.zeros(n, dtype=bool)
    else:
        ok = _tri_inside_window(net, margin)
        bad = np.zeros(n, dtype=np.int64)
        counts = np.diff(net.star_indptr)
        owner = np.repeat(np.arange(n), counts)
        np.add.at(bad, owner, (~ok[net.star]).astype(np.int64))
        vflags = net.star_closed & (bad == 0)
    if cells is None:
        return vflags, None
    cflags = np.array([c.bounded and bool(vflags[c.nucleus_id]) for c in cells], dtype=bool)
    return vflags, cflags


def certified_core(net: EmbeddedNetwork) -> np.ndarray:
    """Certified vertices strictly closer to the origin than every uncertified one.

    Certification alone favours small cells near the edge of the certified
    region (a vertex there is certified only if its circumdisks happen to be
    small).  Cutting at the nearest uncertified vertex removes that bias.
    """
    d = net.distance_from_origin()
    if not net.certified.any():
        return np.zeros(net.n_vertices, dtype=bool)
    bad = d[~net.certified]
    cut = bad.min() if len(bad) else math.inf
    return net.certified & (d < cut)


def core_radius_default(space, window: float) -> float:
    """Fixed averaging radius for a window: certification reaches past it
    in all but a small fraction of samples."""
    return float(window) - 4.0


def ball_core(net: EmbeddedNetwork, radius: float) -> np.ndarray | None:
    """Vertices of the fixed ball ``B(o, radius)``, or ``None`` if one is not certified.

    For a stationary sample, averages over a ball fixed in advance are
    ratio-unbiased (the expected ball sum is the intensity times the volume
    times the Palm mean).  :func:`certified_core` cuts where the data say
    and reads cell areas about 1% low.
    """
    mask = net.distance_from_origin() < radius
    if not net.certified[mask].all():
        return None
    return mask


def _voronoi_vertices(net: EmbeddedNetwork) -> np.ndarray:
    """Metric circumcenters of all triangles (chart coordinates)."""
    if net.space is EUC:
        return net.tri_center
    c = net.tri_center
    nc = np.hypot(c[:, 0], c[:, 1])
    r = net.tri_radius
    out = np.full_like(c, np.nan)
    ok = net.tri_valid
    s1 = 2.0 * np.arctanh(nc[ok] - r[ok])
    s2 = 2.0 * np.arctanh(nc[ok] + r[ok])
    mid = np.tanh(0.25 * (s1 + s2))
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(nc[ok] > 0, mid / np.where(nc[ok] > 0, nc[ok], 1.0), 0.0)
    out[ok] = c[ok] * scale[:, None]
    return out


def cell_areas(net: EmbeddedNetwork):
    """Vectorized Voronoi cell areas: ``(area, bounded)`` per vertex (nan when unbounded)."""
    n = net.n_vertices
    area = np.full(n, np.nan)
    if net.star is None:
        return area, np.zeros(n, dtype=bool)
    counts = np.diff(net.star_indptr)
    owner = np.repeat(np.arange(n), counts)
    valid_tri = net.tri_valid[net.star]
    bad = np.zeros(n, dtype=np.int64)
    np.add.at(bad, owner, (~valid_tri).astype(np.int64))
    bounded = net.star_closed & (bad == 0) & (counts >= 3)
    vv = _voronoi_vertices(net)
    sel = bounded[owner]
    own = owner[sel]
    c1 = vv[net.star[sel]]
    # next vertex in the same star, cyclically
    pos = np.arange(len(net.star))[sel]
    start = net.star_indptr[own]
    nxt = start + (pos - start + 1) % counts[own]
    c2 = vv[net.star[nxt]]
    nuc = net.points[own]
    if net.space is EUC:
        tri_area = 0.5 * ((c1[:, 0] - nuc[:, 0]) * (c2[:, 1] - nuc[:, 1])
                          - (c1[:, 1] - nuc[:, 1]) * (c2[:, 0] - nuc[:, 0]))
    else:
        a = geo.dist(HYP, c1, c2)
        b = geo.dist(HYP, nuc, c2)
        c = geo.dist(HYP, nuc, c1)
        tri_area = np.atleast_1d(geo.hyperbolic_triangle_area(a, b, c))
    sums = np.zeros(n)
    np.add.at(sums, own, tri_area)
    area[bounded] = sums[bounded]
    return area, bounded


def voronoi_cells(net: EmbeddedNetwork) -> list[VoronoiCell]:
    area, bounded = cell_areas(net)
    vv = _voronoi_vertices(net) if net.star is not None else None
    core = certified_core(net)
    cells = []
    for v in range(net.n_vertices):
        if bounded[v]:
            poly = vv[net.star[net.star_indptr[v]:net.star_indptr[v + 1]]]
        else:
            poly = np.zeros((0, 2))
        cert = bool(bounded[v] and net.certified[v])
        in_core = cert and bool(core[v])
        cells.append(VoronoiCell(v, geo.GeodesicPolygon(poly, net.space), float(area[v]),
                                 cert, bool(bounded[v]), in_core))
    return cells


def _core_mask(net: EmbeddedNetwork, core: str, core_radius: float | None) -> np.ndarray:
    if core == "ball":
        mask = certified_core(net)
    elif core == "certified":
        mask = net.certified.copy()
    else:
        raise ValueError(f"unknown core selection {core!r}")
    if core_radius is not None:
        mask &= net.distance_from_origin() <= core_radius
    return mask


def degree_moment(net: EmbeddedNetwork, k: int = 1, core: str = "ball",
                  core_radius: float | None = None) -> float:
    """Empirical k-th moment of the degree over the certified core.

    ``core="ball"`` (default) uses :func:`certified_core`; ``"certified"``
    uses every certified vertex.
    """
    mask = _core_mask(net, core, core_radius)
    if not mask.any():
        raise EmptyCoreError("no certified vertices")
    return float(np.mean(net.degree[mask].astype(float) ** k))


def cell_volume_moment(cells: list[VoronoiCell], k: int = 1, core: str = "ball") -> float:
    if core not in ("ball", "certified"):
        raise ValueError(f"unknown core selection {core!r}")
    vals = np.array([c.area for c in cells if (c.in_core if core == "ball" else c.certified)], dtype=float)
    if len(vals) == 0:
        raise EmptyCoreError("no certified cells")
    return float(np.mean(vals ** k))


def root_cell(space, points: np.ndarray, window_radius: float = math.inf, root=None):
    """Voronoi cell of the origin by half-plane clipping.

    Returns ``(polygon, neighbor_ids, rho_max, certified)``; ``polygon`` is
    in chart coordinates, ``neighbor_ids`` index ``points``, and
    ``certified`` says the cell is fully determined by points inside the
    window.  ``root`` (an index into ``points``) is excluded from the
    candidates.
    """
    space = SpaceKind.parse(space)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    idx = np.arange(len(pts))
    if root is not None:
        idx = idx[idx != root]
    q = pts[idx]
    r_chart = np.hypot(q[:, 0], q[:, 1])
    order = np.argsort(r_chart, kind="stable")
    q = q[order]
    idx = idx[order]
    hyper = space is HYP
    box = 1.0 if hyper else max(4.0 * float(r_chart.max()) if len(q) else 1.0, 1.0)
    vx, vy, lab, rho_max, exact = origin_cell(np.ascontiguousarray(q[:, 0]), np.ascontiguousarray(q[:, 1]),
                                              hyper, box)
    poly = np.column_stack([vx, vy])
    if hyper:
        poly = geo.from_klein(poly) if len(poly) else poly
    bounded = len(lab) > 0 and bool(np.all(lab >= 0)) and math.isfinite(rho_max)
    nb = np.unique(idx[lab[lab >= 0]]) if len(lab) else np.zeros(0, dtype=np.int64)
    # determined by the window when the cell plus its witness disks stay inside
    certified = bounded and (exact or 2.0 * rho_max < window_radius)
    return poly, nb, rho_max, certified


def cell_diameter_tail(space, lam: float, r_grid, replicas: int, seed: int, margin: float = 1.0):
    """Empirical P[root cell not inside B(o, R)] with the envelope
    ``C f(R) exp(-lam f(R - 1))`` calibrated at the smallest grid radius.

    Returns a dict of arrays: ``R, probability, envelope, stderr`` plus
    ``discarded`` and ``replicas``.
    """
    space = SpaceKind.parse(space)
    r_grid = np.sort(np.asarray(r_grid, dtype=float))
    window = 2.0 * float(r_grid.max()) + margin
    if space is HYP and window > geo.MAX_HYPERBOLIC_WINDOW:
        raise ValueError(f"window {window} needed for R={r_grid.max()} exceeds the precision cap")
    if margin <= 0:
        raise ValueError("margin must be positive")
    rho = []
    discarded = 0
    for r in range(replicas):
        s = sample_palm_poisson(space, lam, window, replica_rng(seed, r))
        _, _, rmax, ok = root_cell(space, s.points, window, root=s.root)
        if not ok:
            discarded += 1
            continue
        rho.append(rmax)
    rho = np.asarray(rho)
    if len(rho) == 0:
        raise EmptyCoreError("every replica was discarded")
    prob = np.array([np.mean(rho > R) for R in r_grid])
    shape = np.asarray(geo.ball_volume(space, r_grid)) * np.exp(
        -lam * np.asarray(geo.ball_volume(space, np.maximum(r_grid - 1.0, 0.0))))
    c = prob[0] / shape[0]
    return {
        "R": r_grid,
        "probability": prob,
        "envelope": c * shape,
        "stderr": np.sqrt(prob * (1 - prob) / len(rho)),
        "constant": c,
        "replicas": len(rho),
        "discarded": discarded,
        "window": window,
    }


# -- serialization ----------------------------------------------------------

def network_to_json(net: EmbeddedNetwork) -> dict:
    return {
        "space": net.space.value,
        "window_radius": net.window_radius if math.isfinite(net.window_radius) else None,
        "vertices": [{"id": i, "x": float(p[0]), "y": float(p[1]), "certified": bool(net.certified[i])}
                     for i, p in enumerate(net.points)],
        "edges": [{"a": int(a), "b": int(b), "mx": float(m[0]), "my": float(m[1])}
                  for (a, b), m in zip(net.edges, net.edge_marks)],
    }


def write_network(net: EmbeddedNetwork, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(network_to_json(net), fh, sort_keys=True)
        fh.write("\n")
    return path


def read_network(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
