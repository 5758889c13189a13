"""Simple random walk on embedded Delaunay networks, speed estimates and
graph-ball growth.

Two walkers are provided.  :func:`srw` runs on a finished network and is
censored the first time it reaches an uncertified vertex.  :func:`srw_unbounded`
walks on the Delaunay graph of an infinite Poisson process that is sampled
lazily around the walker, re-centering the chart at every step, so walks of
thousands of steps never hit a window or the precision limit of the disk
chart.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from . import geometry as geo
from ._cell import origin_cell
from ._jit import njit
from .geometry import EUC, HYP, SpaceKind
from .pointproc import sample_palm_poisson, sample_radii
from .rng import as_generator, replica_rng, replica_seed
from .tess import EmbeddedNetwork, EmptyCoreError, certified_core, delaunay


class WalkRejected(RuntimeError):
    """The requested estimate cannot be formed from the supplied traces."""


@dataclass
class WalkTrace:
    """Positions visited by one walk.

    ``embedded[j]`` is the metric distance of ``X_j`` from the start and
    ``graph[j]`` its hop distance (``None`` for lazily sampled walks, which
    have no global graph).  ``step_lengths[j]`` is ``d(X_j, X_{j+1})``.
    When ``censored`` is set the arrays stop before the offending step.
    """

    vertex_ids: np.ndarray
    embedded: np.ndarray
    graph: np.ndarray | None
    step_lengths: np.ndarray
    censored: bool
    steps: int
    seed: int | None = None

    @property
    def length(self) -> int:
        """Number of completed steps."""
        return len(self.vertex_ids) - 1

    def displacement(self, n: int, mode: str = "embedded") -> float:
        arr = self.embedded if mode == "embedded" else self.graph
        if arr is None:
            raise ValueError(f"trace has no {mode} displacements")
        return float(arr[n])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "vertex_id", "d_embedded", "d_graph"])
        for j, v in enumerate(self.vertex_ids):
            g = "" if self.graph is None else int(self.graph[j])
            w.writerow([j, int(v), repr(float(self.embedded[j])), g])
        return buf.getvalue()


# -- walks on a finished network ---------------------------------------------

@njit(cache=True)
def _walk_kernel(indptr, indices, certified, start, u, out):
    """Fill ``out`` with the walk; return (visited count, censored)."""
    out[0] = start
    v = start
    for j in range(u.shape[0]):
        deg = indptr[v + 1] - indptr[v]
        k = int(u[j] * deg)
        if k >= deg:
            k = deg - 1
        w = indices[indptr[v] + k]
        if not certified[w]:
            return j + 1, True
        out[j + 1] = w
        v = w
    return u.shape[0] + 1, False


def _graph_distances(net: EmbeddedNetwork, source: int) -> np.ndarray:
    n = net.n_vertices
    adj = csr_matrix((np.ones(len(net.indices)), net.indices, net.indptr), shape=(n, n))
    d = shortest_path(adj, method="D", unweighted=True, indices=source)
    return d


def srw(net: EmbeddedNetwork, start_id: int, steps: int, seed) -> WalkTrace:
    """Simple random walk from ``start_id``; censored on the first uncertified vertex."""
    start_id = int(start_id)
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if net.degree[start_id] == 0:
        raise ValueError(f"start vertex {start_id} is isolated")
    if not net.certified[start_id]:
        raise ValueError(f"start vertex {start_id} is not certified")
    rng = as_generator(seed)
    u = rng.random(int(steps))
    out = np.empty(int(steps) + 1, dtype=np.int64)
    count, censored = _walk_kernel(net.indptr, net.indices, net.certified, start_id, u, out)
    ids = out[:count].copy()
    pts = net.points[ids]
    emb = np.atleast_1d(geo.dist(net.space, pts, net.points[start_id]))
    hops = _graph_distances(net, start_id)[ids].astype(np.int64)
    steps_len = np.atleast_1d(geo.dist(net.space, pts[:-1], pts[1:])) if count > 1 else np.zeros(0)
    return WalkTrace(ids, emb, hops, steps_len, bool(censored), int(steps),
                     seed if isinstance(seed, (int, np.integer)) else None)


# -- lazily sampled infinite environment -------------------------------------

class _EnvironmentLost(Exception):
    pass


class _EuclideanEnvironment:
    """Poisson points in square tiles, each tile seeded from its own index."""

    def __init__(self, lam: float, seq: np.random.SeedSequence):
        self.lam = lam
        self.seq = seq
        self.side = max(1.0, math.sqrt(20.0 / lam))
        self.tiles: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        self.next_id = 1
        self.pos = np.zeros(2)       # walker, world coordinates
        self.walker = 0
        self.root = np.zeros((1, 2))

    @staticmethod
    def _zigzag(i: int) -> int:
        return 2 * i if i >= 0 else -2 * i - 1

    def _tile(self, key):
        got = self.tiles.get(key)
        if got is not None:
            return got
        ss = np.random.SeedSequence(self.seq.entropy,
                                    spawn_key=tuple(self.seq.spawn_key) + (self._zigzag(key[0]), self._zigzag(key[1])))
        rng = np.random.default_rng(ss)
        n = int(rng.poisson(self.lam * self.side * self.side))
        pts = (np.array(key, dtype=float) + rng.random((n, 2))) * self.side
        ids = np.arange(self.next_id, self.next_id + n, dtype=np.int64)
        self.next_id += n
        self.tiles[key] = (ids, pts)
        return ids, pts

    def candidates(self, reach: float):
        lo = np.floor((self.pos - reach) / self.side).astype(int)
        hi = np.floor((self.pos + reach) / self.side).astype(int)
        ids = [np.zeros(1, dtype=np.int64)]
        pts = [self.root]
        for ix in range(lo[0], hi[0] + 1):
            for iy in range(lo[1], hi[1] + 1):
                i, p = self._tile((ix, iy))
                ids.append(i)
                pts.append(p)
        ids = np.concatenate(ids)
        rel = np.concatenate(pts) - self.pos
        r = np.hypot(rel[:, 0], rel[:, 1])
        keep = (r <= reach) & (ids != self.walker)
        order = np.argsort(r[keep], kind="stable")
        return ids[keep][order], rel[keep][order]

    def move(self, vid: int, rel: np.ndarray) -> float:
        self.pos = self.pos + rel
        self.walker = vid
        return float(np.hypot(rel[0], rel[1]))

    def displacement(self) -> float:
        return float(np.hypot(self.pos[0], self.pos[1]))

    def jump(self, vid: int, where: np.ndarray):
        """Put the frame on vertex ``vid`` at start-frame position ``where``."""
        self.pos = np.asarray(where, dtype=float).copy()
        self.walker = vid

    def to_start(self, rel: np.ndarray) -> np.ndarray:
        return rel + self.pos

    def all_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Every point generated so far: ids and start-frame positions."""
        ids = np.concatenate([np.zeros(1, dtype=np.int64)] + [v[0] for v in self.tiles.values()])
        pts = np.concatenate([self.root] + [v[1] for v in self.tiles.values()])
        return ids, pts


class _HyperbolicEnvironment:
    """Poisson points generated in metric balls around the walker.

    Each ball keeps its points in its own chart (centered on the ball) plus a
    disk automorphism, stored as a 2x2 matrix with a separate log scale,
    taking that chart to the walker's current chart.  Only balls near the
    walker are ever mapped, so far-away points never lose precision and a
    walker that backtracks finds exactly the points it left.  A new ball only
    samples where no earlier ball reached.
    """

    def __init__(self, lam: float, rng: np.random.Generator):
        self.lam = lam
        self.rng = rng
        # about 40 points per ball
        self.r_gen = max(1.0, geo.inverse_ball_volume(HYP, 40.0 / lam))
        self.max_reach = geo.MAX_HYPERBOLIC_WINDOW / 2.0
        self.local: list[np.ndarray] = []
        self.ball_ids: list[np.ndarray] = []
        self.bm = np.zeros((0, 2, 2), dtype=complex)
        self.bls = np.zeros(0)
        self.br = np.zeros(0)
        self.next_id = 0
        # the Palm atom, as a ball of radius zero
        self._add_ball(np.zeros(1, dtype=complex), 0.0)
        self.walker = 0
        self.m = np.eye(2, dtype=complex)    # start chart -> walker chart
        self.logscale = 0.0

    def _add_ball(self, z: np.ndarray, radius: float):
        k = len(z)
        self.local.append(z)
        self.ball_ids.append(np.arange(self.next_id, self.next_id + k, dtype=np.int64))
        self.next_id += k
        self.bm = np.concatenate([self.bm, np.eye(2, dtype=complex)[None]])
        self.bls = np.append(self.bls, 0.0)
        self.br = np.append(self.br, radius)

    @staticmethod
    def _d0(z):
        return 2.0 * np.arctanh(np.minimum(np.abs(z), 1.0 - 1e-17))

    def _ball_dist(self) -> np.ndarray:
        """Distance from the walker to every ball center (sinh(d/2) = |m01|)."""
        b = np.abs(self.bm[:, 0, 1])
        with np.errstate(divide="ignore"):
            lb = self.bls + np.log(b)
        return np.where(lb < 300.0, 2.0 * np.arcsinh(np.exp(np.minimum(lb, 300.0))), 2.0 * (lb + math.log(2.0)))

    def _centers(self, sel: np.ndarray) -> np.ndarray:
        m = self.bm[sel]
        return m[:, 0, 1] / m[:, 1, 1]

    def _materialize(self, sel: np.ndarray):
        zs, ids = [], []
        for i in np.flatnonzero(sel):
            m = self.bm[i]
            w = self.local[i]
            zs.append((m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1]))
            ids.append(self.ball_ids[i])
        if not zs:
            return np.zeros(0, dtype=complex), np.zeros(0, dtype=np.int64)
        return np.concatenate(zs), np.concatenate(ids)

    def _new_ball(self, radius: float, dball: np.ndarray):
        mean = self.lam * geo.ball_volume(HYP, radius)
        n = int(self.rng.poisson(mean))
        r = sample_radii(HYP, radius, self.rng.random(n))
        th = self.rng.random(n) * (2.0 * math.pi)
        z = np.tanh(r / 2.0) * np.exp(1j * th)
        near = (dball < radius + self.br) & (self.br > 0)
        if near.any() and n:
            c = self._centers(near)
            w = (z[:, None] - c[None, :]) / (1.0 - np.conj(c)[None, :] * z[:, None])
            inside = self._d0(w) < self.br[near][None, :]
            z = z[~inside.any(axis=1)]
        self._add_ball(z, radius)

    def candidates(self, reach: float):
        if reach > self.max_reach:
            raise _EnvironmentLost("Voronoi cell too large for the lazy sampler")
        dball = self._ball_dist()
        if not np.any(dball + reach <= self.br):
            self._new_ball(max(self.r_gen, reach + 0.5), dball)
            dball = np.append(dball, 0.0)
        z, ids = self._materialize(dball <= reach + self.br)
        r = np.abs(z)
        keep = (r <= math.tanh(reach / 2.0)) & (ids != self.walker)
        order = np.argsort(r[keep], kind="stable")
        z = z[keep][order]
        return ids[keep][order], np.column_stack([z.real, z.imag])

    def move(self, vid: int, rel: np.ndarray) -> float:
        q = complex(rel[0], rel[1])
        step = float(self._d0(q))
        mq = self._phi(q)
        self.bm = np.einsum("ij,njk->nik", mq, self.bm)
        big = np.abs(self.bm).max(axis=(1, 2))
        over = big > 1e100
        if over.any():
            self.bm[over] /= big[over][:, None, None]
            self.bls[over] += np.log(big[over])
        self.m = mq @ self.m
        s = abs(self.m).max()
        if s > 1e100:
            self.m /= s
            self.logscale += math.log(s)
        self.walker = vid
        return step

    @staticmethod
    def _phi(q: complex) -> np.ndarray:
        return np.array([[1.0, -q], [-np.conj(q), 1.0]]) / math.sqrt(1.0 - abs(q) ** 2)

    def jump(self, vid: int, where: np.ndarray):
        """Put the frame on vertex ``vid`` at start-chart position ``where``."""
        q = complex(where[0], where[1])
        target = self._phi(q)
        t = target @ np.linalg.inv(self.m)
        self.bm = np.einsum("ij,njk->nik", t, self.bm)
        self.m = target
        self.logscale = 0.0
        self.walker = vid

    def to_start(self, rel: np.ndarray) -> np.ndarray:
        inv = np.linalg.inv(self.m)
        z = rel[:, 0] + 1j * rel[:, 1]
        w = (inv[0, 0] * z + inv[0, 1]) / (inv[1, 0] * z + inv[1, 1])
        return np.column_stack([w.real, w.imag])

    def all_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Every point generated so far: ids and start-frame chart positions."""
        z, ids = self._materialize(np.ones(len(self.br), dtype=bool))
        return ids, self.to_start(np.column_stack([z.real, z.imag]))

    def displacement(self) -> float:
        # the start->walker map is [[a, b], [conj b, conj a]] with |a|^2 - |b|^2 = 1
        # and sends the start to b / conj(a), so sinh(d / 2) = |b|
        b = abs(self.m[0, 1])
        if b == 0.0:
            return 0.0
        log_b = self.logscale + math.log(b)
        if log_b < 300.0:
            return 2.0 * math.asinh(math.exp(log_b))
        return 2.0 * (log_b + math.log(2.0))


def _lazy_neighbors(env, hyperbolic: bool, reach: float):
    while True:
        ids, pts = env.candidates(reach)
        if len(ids) < 3:
            reach *= 1.5
            continue
        box = 1.0 if hyperbolic else 4.0 * reach
        vx, vy, lab, rho_max, exact = origin_cell(np.ascontiguousarray(pts[:, 0]),
                                                  np.ascontiguousarray(pts[:, 1]), hyperbolic, box)
        bounded = len(lab) > 0 and bool(np.all(lab >= 0)) and math.isfinite(rho_max)
        if bounded and (exact or 2.0 * rho_max < reach):
            nb = np.unique(lab)
            return ids[nb], pts[nb], reach
        cap = getattr(env, "max_reach", math.inf)
        if reach >= cap:
            raise _EnvironmentLost("Voronoi cell too large for the lazy sampler")
        reach = min(max(1.5 * reach, 2.05 * rho_max if math.isfinite(rho_max) else 0.0), cap)


def _run_lazy(space, lam: float, steps: int, seed, log: list | None = None):
    space = SpaceKind.parse(space)
    if not lam > 0:
        raise ValueError("intensity must be positive")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    env, reach = _make_env(space, lam, seq)
    rng = np.random.default_rng(np.random.SeedSequence(seq.entropy, spawn_key=tuple(seq.spawn_key) + (2**31,)))
    ids = [0]
    emb = [0.0]
    lens = []
    censored = False
    for _ in range(int(steps)):
        try:
            nb_ids, nb_pts, _ = _lazy_neighbors(env, space is HYP, reach)
        except _EnvironmentLost:
            censored = True
            break
        if log is not None:
            log.append((env.walker, np.sort(nb_ids)))
        k = int(rng.integers(len(nb_ids)))
        lens.append(env.move(int(nb_ids[k]), nb_pts[k]))
        ids.append(int(nb_ids[k]))
        emb.append(env.displacement())
    trace = WalkTrace(np.array(ids, dtype=np.int64), np.array(emb), None, np.array(lens),
                      censored, int(steps), seed if isinstance(seed, (int, np.integer)) else None)
    return trace, env


def srw_unbounded(space, lam: float, steps: int, seed) -> WalkTrace:
    """Simple random walk from the origin of a Palm Poisson process on the
    whole plane, with the process sampled on demand around the walker.

    Neighbors come from the Voronoi cell of the walker, computed from every
    point within twice the cell's radius, so they are exactly the Delaunay
    neighbors in the infinite process.  Vertex ids number points in order of
    generation (the start is 0); graph displacements are not available.
    The trace is censored only if a cell is too large for the sampler.
    """
    return _run_lazy(space, lam, steps, seed)[0]


def unbounded_traces(space, lam: float, steps: int, replicas: int, seed: int, start: int = 0) -> list[WalkTrace]:
    return [srw_unbounded(space, lam, steps, replica_seed(seed, r)) for r in range(start, start + replicas)]


# -- estimators ----------------------------------------------------------------

@dataclass(frozen=True)
class SpeedEstimate:
    mode: str
    n: int
    estimate: float
    ci_lo: float
    ci_hi: float
    censored_fraction: float
    replicas: int

    def to_json(self) -> dict:
        return {"mode": self.mode, "n": self.n, "estimate": self.estimate, "ci_lo": self.ci_lo,
                "ci_hi": self.ci_hi, "censored_fraction": self.censored_fraction,
                "replicas": self.replicas}


MIN_SPEED_REPLICAS = 30


def speed_estimate(traces: list[WalkTrace], mode: str = "embedded", n: int | None = None,
                   level: float = 0.95) -> SpeedEstimate:
    """Mean of ``displacement(n) / n`` over uncensored traces, with a normal CI."""
    if mode not in ("embedded", "graph"):
        raise ValueError(f"mode must be 'embedded' or 'graph', got {mode!r}")
    if not traces:
        raise ValueError("no traces")
    ok = [t for t in traces if not t.censored]
    frac = 1.0 - len(ok) / len(traces)
    if not ok:
        raise WalkRejected("every trace was censored; enlarge the window or use srw_unbounded")
    if n is None:
        n = ok[0].steps
    ok = [t for t in ok if t.length >= n]
    if len(ok) < MIN_SPEED_REPLICAS:
        raise WalkRejected(f"need at least {MIN_SPEED_REPLICAS} uncensored traces of length {n}, got {len(ok)}")
    if n <= 0:
        raise ValueError("n must be positive")
    x = np.array([t.displacement(n, mode) for t in ok]) / n
    est = float(x.mean())
    half = float(stats.norm.ppf(0.5 + level / 2.0) * x.std(ddof=1) / math.sqrt(len(x)))
    return SpeedEstimate(mode, int(n), est, est - half, est + half, frac, len(ok))


def scaling_exponent(traces: list[WalkTrace], ns, mode: str = "embedded"):
    """Least-squares slope of log E[displacement(n)] against log n."""
    ok = [t for t in traces if not t.censored and t.length >= max(ns)]
    if not ok:
        raise WalkRejected("no uncensored traces reach the largest n")
    means = np.array([np.mean([t.displacement(n, mode) for t in ok]) for n in ns])
    slope, intercept = np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(means), 1)
    return float(slope), means


def degree_bias_weight(net: EmbeddedNetwork, root_id: int) -> float:
    """``deg(root) / mean degree`` over the certified core."""
    if not net.certified[root_id]:
        raise ValueError(f"root {root_id} is not certified")
    core = certified_core(net)
    if not core.any():
        raise EmptyCoreError("no certified vertices")
    return float(net.degree[root_id] / net.degree[core].mean())


# -- graph balls -----------------------------------------------------------------

def _hops_from(net: EmbeddedNetwork, root: int, limit: int) -> np.ndarray:
    n = net.n_vertices
    hops = np.full(n, -1, dtype=np.int64)
    hops[root] = 0
    frontier = np.array([root])
    for h in range(1, limit + 1):
        nxt = np.concatenate([net.neighbors(v) for v in frontier]) if len(frontier) else np.zeros(0, int)
        nxt = np.unique(nxt)
        nxt = nxt[hops[nxt] < 0]
        hops[nxt] = h
        frontier = nxt
    return hops


def graph_ball_containment(net: EmbeddedNetwork, r_grid, t_grid, root: int | None = None) -> dict:
    """For one network: graph balls around ``root`` against metric balls.

    Returns ``size[R]``, ``radius[R]`` (largest metric distance from the
    root inside the graph ball), ``contained[R, t]`` and ``valid[R]``
    (every vertex within ``R - 1`` hops certified, so the ball is exact).
    """
    root = net.root if root is None else int(root)
    if root is None:
        raise ValueError("network has no root")
    r_grid = np.asarray(r_grid, dtype=int)
    t_grid = np.asarray(t_grid, dtype=float)
    hops = _hops_from(net, root, int(r_grid.max()) if len(r_grid) else 0)
    d = np.atleast_1d(geo.dist(net.space, net.points, net.points[root]))
    size = np.zeros(len(r_grid), dtype=np.int64)
    radius = np.zeros(len(r_grid))
    valid = np.zeros(len(r_grid), dtype=bool)
    for i, R in enumerate(r_grid):
        ball = (hops >= 0) & (hops <= R)
        inner = (hops >= 0) & (hops < R)
        valid[i] = bool(net.certified[inner].all())
        size[i] = int(ball.sum())
        radius[i] = float(d[ball].max())
    contained = radius[:, None] <= t_grid[None, :] * r_grid[:, None] + 1e-12
    return {"R": r_grid, "t": t_grid, "size": size, "radius": radius,
            "contained": contained, "valid": valid}


def _make_env(space: SpaceKind, lam: float, seq: np.random.SeedSequence):
    if space is EUC:
        return _EuclideanEnvironment(lam, seq), 3.0 / math.sqrt(lam)
    env = _HyperbolicEnvironment(lam, np.random.default_rng(seq))
    return env, min(env.r_gen, 2.5)


def lazy_graph_ball(space, lam: float, radius: int, seed, log: list | None = None):
    """Breadth-first search to ``radius`` hops from the origin of a Palm
    Poisson process on the whole plane, sampled on demand.

    Returns ``(hops, dist)`` over the discovered vertices: hop count and
    metric distance from the origin.  Neighbor sets are exact (see
    :func:`srw_unbounded`), so no window or certification is involved.
    ``log``, if given, receives ``(vertex, sorted neighbor ids)`` per expanded
    vertex and finally the sampler itself.
    """
    space = SpaceKind.parse(space)
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    env, reach = _make_env(space, lam, seq)
    pos = {0: np.zeros(2)}
    hops = {0: 0}
    frontier = [0]
    for h in range(1, int(radius) + 1):
        nxt = []
        for v in frontier:
            env.jump(v, pos[v])
            ids, rel, _ = _lazy_neighbors(env, space is HYP, reach)
            if log is not None:
                log.append((v, np.sort(ids)))
            where = env.to_start(rel)
            for i, w in zip(ids.tolist(), where):
                if i not in hops:
                    hops[i] = h
                    pos[i] = w
                    nxt.append(i)
        frontier = nxt
    if log is not None:
        log.append(env)
    keys = np.fromiter(hops.keys(), dtype=np.int64)
    hop = np.fromiter(hops.values(), dtype=np.int64)
    p = np.array([pos[k] for k in keys.tolist()])
    if space is HYP:
        r = np.hypot(p[:, 0], p[:, 1])
        if np.any(1.0 - r * r <= geo.CHART_GUARD):
            raise WalkRejected("graph ball reaches the precision limit of the disk chart")
    d = np.atleast_1d(geo.dist(space, p, np.zeros(2)))
    return hop, d


def lazy_ball_replica(space, lam: float, r_grid, t_grid, seed) -> tuple[np.ndarray, np.ndarray]:
    """``(size[R], contained[R, t])`` for one lazily sampled graph ball."""
    r_grid = np.asarray(r_grid, dtype=int)
    t_grid = np.asarray(t_grid, dtype=float)
    hop, d = lazy_graph_ball(space, lam, int(r_grid.max()), seed)
    size = np.zeros(len(r_grid))
    contained = np.zeros((len(r_grid), len(t_grid)), dtype=bool)
    for i, R in enumerate(r_grid):
        ball = hop <= R
        size[i] = ball.sum()
        contained[i] = d[ball].max() <= t_grid * R + 1e-12
    return size, contained


def lazy_ball_growth(space, lam: float, r_grid, t_grid, replicas: int, seed: int, start: int = 0) -> dict:
    """Same table as :func:`ball_growth_experiment`, from :func:`lazy_graph_ball`."""
    r_grid = np.asarray(r_grid, dtype=int)
    t_grid = np.asarray(t_grid, dtype=float)
    res = [lazy_ball_replica(space, lam, r_grid, t_grid, replica_seed(seed, r)) for r in range(start, start + replicas)]
    size = np.array([x[0] for x in res])
    contained = np.array([x[1] for x in res])
    return growth_table(r_grid, t_grid, size, contained, replicas, 0)


def growth_table(r_grid, t_grid, size, contained, replicas, discarded) -> dict:
    safe = np.maximum(r_grid, 1)
    return {
        "R": r_grid,
        "t": t_grid,
        "noncontainment": 1.0 - contained.mean(axis=0),
        "mean_size": size.mean(axis=0),
        "growth": np.where(r_grid > 0, (size ** (1.0 / safe)).mean(axis=0), np.nan),
        "growth_of_mean": np.where(r_grid > 0, size.mean(axis=0) ** (1.0 / safe), np.nan),
        "replicas": replicas,
        "discarded": discarded,
    }


def ball_growth_experiment(space, lam: float, window: float, r_grid, t_grid,
                           replicas: int, seed: int) -> dict:
    """Non-containment frequencies ``P[B_G(o,R) not in B(o,tR)]`` and
    ``|B_G(o,R)|^{1/R}`` over Palm replicas; replicas whose largest graph
    ball is not certified are discarded and counted."""
    r_grid = np.asarray(r_grid, dtype=int)
    t_grid = np.asarray(t_grid, dtype=float)
    rows = []
    discarded = 0
    for r in range(replicas):
        s = sample_palm_poisson(space, lam, window, replica_rng(seed, r))
        net = delaunay(s)
        if not net.certified[net.root]:
            discarded += 1
            continue
        res = graph_ball_containment(net, r_grid, t_grid)
        if not res["valid"].all():
            discarded += 1
            continue
        rows.append(res)
    if not rows:
        raise WalkRejected("certified core too small for the requested graph radius in every replica")
    contained = np.array([x["contained"] for x in rows])
    size = np.array([x["size"] for x in rows], dtype=float)
    return growth_table(r_grid, t_grid, size, contained, len(rows), discarded)


def trace_report(est: SpeedEstimate) -> str:
    return json.dumps(est.to_json(), sort_keys=True)
