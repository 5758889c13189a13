"""Command-line driver.

Configuration is one JSON document; command-line flags override its fields,
which override the defaults.  Every output directory gets a ``manifest.json``
holding the config hash, seed and tool version.

Exit codes: 0 success, 2 configuration error, 3 runtime rejection.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import amen, tess, walk
from . import geometry as geo
from .geometry import EUC, HYP, SpaceKind
from .pointproc import (RootFindingError, matched_poisson_params, read_sample, sample_kac_gaf, sample_palm_poisson,
                        sample_poisson, write_sample)
from .rng import replica_rng, replica_seed
from .svg import Panel, render

EXIT_OK, EXIT_CONFIG, EXIT_REJECTED = 0, 2, 3


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


REJECTIONS = (amen.ExperimentRejected, walk.WalkRejected, tess.EmptyCoreError, geo.ChartError, RootFindingError)


@dataclass
class ExperimentConfig:
    experiment: str | None = None
    space: str = "hyperbolic"
    process: str = "palm"
    lam: float = 1.0
    window_radius: float | None = None
    replicas: int = 10
    seed: int = 0
    steps: int = 2000
    ns: list = field(default_factory=list)
    mode: str = "embedded"
    deltas: list = field(default_factory=lambda: [0.1, 0.03, 0.01, 0.003])
    delta: float = 0.05
    estimator: str = "cluster"
    r_grid: list = field(default_factory=lambda: [2, 3, 4])
    t_grid: list = field(default_factory=lambda: [1.0, 1.5, 2.0, 3.0])
    transport: str = "f2"
    mc_points: int = 20000
    ball_points: int = 100
    degree: int = 1000
    kind: str = "pair"
    input: str | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        for k in data:
            if k not in names:
                raise ConfigError(k, "unknown field")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"not valid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "must be a JSON object")
        return cls.from_dict(data)

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    @property
    def space_kind(self) -> SpaceKind:
        return SpaceKind.parse(self.space)

    def window(self, euclidean: float = 30.0, hyperbolic: float = 6.0) -> float:
        if self.window_radius is not None:
            return float(self.window_radius)
        return euclidean if self.space_kind is EUC else hyperbolic

    def validate(self) -> None:
        try:
            space = SpaceKind.parse(self.space)
        except ValueError:
            raise ConfigError("space", f"expected 'euclidean' or 'hyperbolic', got {self.space!r}") from None

        def positive(name, value):
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
                raise ConfigError(name, f"must be positive, got {value!r}")

        def integer(name, value, low):
            if not isinstance(value, int) or isinstance(value, bool) or value < low:
                raise ConfigError(name, f"must be an integer >= {low}, got {value!r}")

        positive("lam", self.lam)
        positive("delta", self.delta)
        integer("replicas", self.replicas, 1)
        integer("seed", self.seed, 0)
        integer("steps", self.steps, 1)
        integer("mc_points", self.mc_points, 1)
        integer("ball_points", self.ball_points, 0)
        integer("degree", self.degree, 1)
        if self.window_radius is not None:
            positive("window_radius", self.window_radius)
            if space is HYP and self.window_radius > geo.MAX_HYPERBOLIC_WINDOW:
                raise ConfigError("window_radius", f"hyperbolic windows are capped at {geo.MAX_HYPERBOLIC_WINDOW}")
        for d in self.deltas:
            positive("deltas", d)
        if not self.deltas:
            raise ConfigError("deltas", "must not be empty")
        for n in self.ns:
            integer("ns", n, 1)
            if n > self.steps:
                raise ConfigError("ns", f"{n} exceeds steps={self.steps}")
        for r in self.r_grid:
            integer("r_grid", r, 1)
        if not self.r_grid:
            raise ConfigError("r_grid", "must not be empty")
        for t in self.t_grid:
            positive("t_grid", t)
        if self.experiment is not None and self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        if self.process not in ("poisson", "palm", "gaf"):
            raise ConfigError("process", f"expected poisson, palm or gaf, got {self.process!r}")
        if self.mode not in ("embedded", "graph"):
            raise ConfigError("mode", f"expected embedded or graph, got {self.mode!r}")
        if self.estimator not in ("cluster", "closed"):
            raise ConfigError("estimator", f"expected cluster or closed, got {self.estimator!r}")
        if self.transport not in amen.TRANSPORTS:
            raise ConfigError("transport", f"unknown transport {self.transport!r}; choose from {sorted(amen.TRANSPORTS)}")
        if self.kind not in ("gaf", "pv", "pair"):
            raise ConfigError("kind", f"expected gaf, pv or pair, got {self.kind!r}")


@dataclass(frozen=True)
class StatsRecord:
    estimator: str
    param: str
    estimate: float
    ci_lo: float
    ci_hi: float
    replicas: int
    discarded: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isnan(self.estimate) or self.ci_lo <= self.estimate <= self.ci_hi):
            raise ValueError(f"estimate {self.estimate} outside [{self.ci_lo}, {self.ci_hi}]")


def _rec(name, param, est: amen.Estimate, **extra) -> StatsRecord:
    return StatsRecord(name, str(param), est.estimate, est.ci_lo, est.ci_hi, est.replicas, est.discarded, extra)


def _ratio_estimate(sums, counts, discarded) -> amen.Estimate:
    """Pooled ratio sum(s)/sum(c) with a delta-method interval over replicas."""
    s = np.asarray(sums, dtype=float)
    c = np.asarray(counts, dtype=float)
    m = s.sum() / c.sum()
    n = len(s)
    if n > 1:
        se = math.sqrt(np.sum((s - m * c) ** 2) / (n * (n - 1))) / c.mean()
    else:
        se = math.inf
    return amen.Estimate(float(m), float(m - 1.96 * se), float(m + 1.96 * se), n, discarded)


def _binomial(p: float, n: int, discarded: int) -> amen.Estimate:
    h = 1.96 * math.sqrt(p * (1 - p) / n)
    return amen.Estimate(p, max(p - h, 0.0), min(p + h, 1.0), n, discarded)


# -- experiments: (replica function, reducer) ------------------------------------------

def _palm_net(cfg: ExperimentConfig, r: int) -> tess.EmbeddedNetwork:
    return tess.delaunay(sample_palm_poisson(cfg.space_kind, cfg.lam, cfg.window(), replica_rng(cfg.seed, r)))


def _core_sums(cfg, r, what):
    # stationary sample, fixed ball: see tess.ball_core
    w = cfg.window()
    net = tess.delaunay(sample_poisson(cfg.space_kind, cfg.lam, w, replica_rng(cfg.seed, r)))
    core = tess.ball_core(net, tess.core_radius_default(cfg.space_kind, w))
    if core is None or not core.any():
        return None
    if what == "degree":
        vals = net.degree[core]
    else:
        vals = tess.cell_areas(net)[0][core]
    return [float(np.sum(vals)), int(core.sum())]


def _reduce_core(name, param):
    def reduce(cfg, res):
        ok = [x for x in res if x is not None]
        if not ok:
            raise tess.EmptyCoreError("every replica had an empty certified core")
        est = _ratio_estimate([x[0] for x in ok], [x[1] for x in ok], len(res) - len(ok))
        return [_rec(name, param, est, vertices=int(sum(x[1] for x in ok)))]
    return reduce


def _speed_ns(cfg):
    return sorted(set(cfg.ns)) if cfg.ns else [cfg.steps]


def _speed_replica(cfg, r):
    if cfg.mode != "embedded":
        raise ConfigError("mode", "walks on the whole plane only have embedded displacements")
    t = walk.srw_unbounded(cfg.space_kind, cfg.lam, cfg.steps, replica_seed(cfg.seed, r))
    return [t.displacement(n) if t.length >= n else None for n in _speed_ns(cfg)]


def _speed_reduce(cfg, res):
    ns = _speed_ns(cfg)
    rows = [_rec("speed", n, e) for n, e in zip(ns, (
        amen.Estimate.from_samples([x[j] / n for x in res if x[j] is not None],
                                   sum(x[j] is None for x in res)) for j, n in enumerate(ns)))]
    full = np.array([x for x in res if all(v is not None for v in x)], dtype=float)
    if len(ns) > 1 and len(full) > 1:
        logn = np.log(np.asarray(ns, dtype=float))
        slope = float(np.polyfit(logn, np.log(full.mean(axis=0)), 1)[0])
        rng = np.random.default_rng(cfg.seed)
        boots = [np.polyfit(logn, np.log(full[rng.integers(0, len(full), len(full))].mean(axis=0)), 1)[0]
                 for _ in range(400)]
        lo, hi = np.percentile(boots, [2.5, 97.5])
        rows.append(StatsRecord("scaling_exponent", "slope", slope, float(min(lo, slope)), float(max(hi, slope)),
                                len(full), len(res) - len(full)))
    return rows


def _tail_window(cfg):
    return 2.0 * max(cfg.r_grid) + 1.0


def _tail_replica(cfg, r):
    w = _tail_window(cfg)
    if cfg.space_kind is HYP and w > geo.MAX_HYPERBOLIC_WINDOW:
        raise amen.ExperimentRejected(f"window {w} needed for R={max(cfg.r_grid)} exceeds the precision cap")
    s = sample_palm_poisson(cfg.space_kind, cfg.lam, w, replica_rng(cfg.seed, r))
    _, _, rmax, ok = tess.root_cell(cfg.space_kind, s.points, w, root=s.root)
    return float(rmax) if ok else None


def _tail_reduce(cfg, res):
    rho = np.array([x for x in res if x is not None])
    if len(rho) == 0:
        raise tess.EmptyCoreError("every replica was discarded")
    r_grid = np.sort(np.asarray(cfg.r_grid, dtype=float))
    space = cfg.space_kind
    shape = np.asarray(geo.ball_volume(space, r_grid)) * np.exp(
        -cfg.lam * np.asarray(geo.ball_volume(space, np.maximum(r_grid - 1.0, 0.0))))
    prob = np.array([np.mean(rho > R) for R in r_grid])
    c = prob[0] / shape[0]
    return [_rec("cell_diameter_tail", int(R), _binomial(float(p), len(rho), len(res) - len(rho)),
                 envelope=float(c * s)) for R, p, s in zip(r_grid, prob, shape)]


def _d1d2_replica(cfg, r):
    w = amen.checked_d1_window(cfg.space_kind, cfg.delta, cfg.window_radius)
    out = amen.d1_d2_replica(cfg.space_kind, cfg.delta, w, replica_rng(cfg.seed, r), cfg.ball_points)
    return None if out is None else list(out)


def _d1d2_reduce(cfg, res):
    w = amen.checked_d1_window(cfg.space_kind, cfg.delta, cfg.window_radius)
    s = amen.d1_d2_summary(cfg.space_kind, cfg.delta, res, None, w)
    rows = []
    for j, t in enumerate(s["t"]):
        p = float(s["gap_tail"][j])
        rows.append(_rec("d2_minus_d1_tail", repr(float(t)), _binomial(p, s["replicas"], s["discarded"]),
                         envelope=float(s["gap_envelope"][j]), d1_tail=float(s["d1_tail"][j]),
                         d1_closed_form=float(s["d1_closed_form"][j]), ks_statistic=s["ks_statistic"],
                         ks_pvalue=s["ks_pvalue"], ks_threshold=s["ks_threshold"],
                         ball_in_cell_ok=s["ball_in_cell_ok"], ball_in_cell_checked=s["ball_in_cell_checked"]))
    return rows


def _param_reduce(name):
    def reduce(cfg, res):
        return [StatsRecord(name, repr(r["delta"]), r["estimate"], r["ci_lo"], r["ci_hi"], r["replicas"],
                            r["discarded"]) for r in amen.param_rows(cfg.deltas, res)]
    return reduce


def _mtp_replica(cfg, r):
    out = amen.mtp_replica(cfg.space_kind, cfg.lam, cfg.window(10.0, 8.0), cfg.transport, cfg.seed, r)
    return None if out is None else list(out)


def _mtp_reduce(cfg, res):
    m = amen.mtp_summary(cfg.transport, res)
    return [_rec(f"mtp_{cfg.transport}", "sent", m.sent), _rec(f"mtp_{cfg.transport}", "received", m.received),
            _rec(f"mtp_{cfg.transport}", "difference", m.difference, agree=m.agree)]


def _iso_replica(cfg, r):
    try:
        b = amen.isoperimetric_upper_bound(_palm_net(cfg, r), seed=replica_rng(cfg.seed, r, 3))
    except tess.EmptyCoreError:
        return None
    return [b.bound, b.vertices]


def _iso_reduce(cfg, res):
    ok = [x for x in res if x is not None]
    e = amen.Estimate.from_samples([x[0] for x in ok], len(res) - len(ok))
    return [_rec("isoperimetric_upper_bound", "bound", e, mean_vertices=float(np.mean([x[1] for x in ok])))]


def _ball_replica(cfg, r):
    size, contained = walk.lazy_ball_replica(cfg.space_kind, cfg.lam, cfg.r_grid, cfg.t_grid,
                                             replica_seed(cfg.seed, r))
    return [size.tolist(), contained.tolist()]


def _ball_reduce(cfg, res):
    r_grid = np.asarray(cfg.r_grid, dtype=int)
    size = np.array([x[0] for x in res], dtype=float)
    contained = np.array([x[1] for x in res], dtype=bool)
    tab = walk.growth_table(r_grid, np.asarray(cfg.t_grid, dtype=float), size, contained, len(res), 0)
    rows = []
    for i, R in enumerate(r_grid):
        e = amen.Estimate.from_samples(size[:, i] ** (1.0 / R))
        extra = {"mean_size": float(tab["mean_size"][i])}
        for j, t in enumerate(cfg.t_grid):
            extra[f"noncontainment_t{t:g}"] = float(tab["noncontainment"][i, j])
        rows.append(_rec("ball_growth", int(R), e, **extra))
    return rows


EXPERIMENTS = {
    "speed": (_speed_replica, _speed_reduce),
    "degree": (lambda c, r: _core_sums(c, r, "degree"), _reduce_core("mean_degree", "core")),
    "cellvol": (lambda c, r: _core_sums(c, r, "area"), _reduce_core("mean_cell_volume", "core")),
    "tail": (_tail_replica, _tail_reduce),
    "d1d2": (_d1d2_replica, _d1d2_reduce),
    "percolation": (lambda c, r: amen.percolation_replica(c.space_kind, c.lam, c.window(45.0), c.deltas, c.seed, r,
                                                          c.estimator), _param_reduce("boundary_ratio")),
    "folner": (lambda c, r: amen.folner_replica(c.space_kind, c.lam, c.window(45.0), c.deltas, c.seed, r,
                                                c.mc_points), _param_reduce("folner_quotient")),
    "mtp": (_mtp_replica, _mtp_reduce),
    "isoperimetric": (_iso_replica, _iso_reduce),
    "ballgrowth": (_ball_replica, _ball_reduce),
}


def _run_replica(cfg_json: str, r: int):
    cfg = ExperimentConfig.from_json(cfg_json)
    return EXPERIMENTS[cfg.experiment][0](cfg, r)


# -- output helpers ------------------------------------------------------------------

def _write_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(out: Path, cfg: ExperimentConfig, files: list[str], **extra) -> None:
    data = {"config": json.loads(cfg.to_json()), "config_hash": cfg.hash, "seed": cfg.seed,
            "tool": "distlat", "version": __version__, "outputs": sorted(files)}
    data.update(extra)
    _write_json(out / "manifest.json", data)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def records_to_csv(records: list[StatsRecord]) -> str:
    extras = []
    for r in records:
        for k in r.extra:
            if k not in extras:
                extras.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["estimator", "param", "estimate", "ci_lo", "ci_hi", "replicas", "discarded"] + extras)
    for r in records:
        w.writerow([r.estimator, r.param] + [_fmt(x) for x in (r.estimate, r.ci_lo, r.ci_hi, r.replicas,
                                                                 r.discarded)]
                   + [_fmt(r.extra[k]) if k in r.extra else "" for k in extras])
    return buf.getvalue()


def _load_done(path: Path, cfg_hash: str) -> dict[int, object]:
    done = {}
    if not path.exists():
        return done
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                # a line cut short by an interruption
                continue
            if rec.get("config_hash") == cfg_hash:
                done[int(rec["replica"])] = rec["result"]
    return done


def run_experiment(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> list[StatsRecord]:
    """Run (or resume) ``cfg.experiment`` into ``out``."""
    if cfg.experiment is None:
        raise ConfigError("experiment", "required for run")
    out.mkdir(parents=True, exist_ok=True)
    man = out / "manifest.json"
    if man.exists():
        old = json.loads(man.read_text(encoding="utf-8")).get("config_hash")
        if old != cfg.hash:
            raise ConfigError("out", f"{out} holds results of a different config ({old})")
    _manifest(out, cfg, ["replicas.jsonl"], status="running")
    log = out / "replicas.jsonl"
    done = _load_done(log, cfg.hash)
    todo = [r for r in range(cfg.replicas) if r not in done]
    t0 = time.perf_counter()
    cfg_json = cfg.to_json()
    with open(log, "a", encoding="utf-8", newline="\n") as fh:
        def keep(r, result):
            done[r] = result
            fh.write(json.dumps({"config_hash": cfg.hash, "replica": r, "result": result}) + "\n")
            fh.flush()

        if jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for r, result in zip(todo, pool.map(_run_replica, [cfg_json] * len(todo), todo)):
                    keep(r, result)
        else:
            fn = EXPERIMENTS[cfg.experiment][0]
            for r in todo:
                keep(r, fn(cfg, r))
    results = [done[r] for r in range(cfg.replicas)]
    records = EXPERIMENTS[cfg.experiment][1](cfg, results)
    name = f"{cfg.experiment}.csv"
    (out / name).write_text(records_to_csv(records), encoding="utf-8", newline="\n")
    _manifest(out, cfg, [name, "replicas.jsonl"], status="complete",
              wall_clock=round(time.perf_counter() - t0, 3), resumed=cfg.replicas - len(todo))
    return records


# -- subcommands ---------------------------------------------------------------------

def _sample(cfg: ExperimentConfig, seed=None):
    seed = cfg.seed if seed is None else seed
    if cfg.process == "gaf":
        return sample_kac_gaf(cfg.degree, seed)
    if cfg.process == "palm":
        return sample_palm_poisson(cfg.space_kind, cfg.lam, cfg.window(), seed)
    return sample_poisson(cfg.space_kind, cfg.lam, cfg.window(), seed)


def cmd_sample(cfg: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    files = write_sample(_sample(cfg), out / "sample")
    _manifest(out, cfg, [p.name for p in files])
    return list(files)


def cmd_tessellate(cfg: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    s = read_sample(cfg.input) if cfg.input else _sample(cfg)
    net = tess.delaunay(s)
    p = tess.write_network(net, out / "network.json")
    _manifest(out, cfg, [p.name], vertices=net.n_vertices, edges=net.n_edges,
              certified=int(net.certified.sum()))
    return [p]


def cmd_walk(cfg: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    if cfg.window_radius is None:
        trace = walk.srw_unbounded(cfg.space_kind, cfg.lam, cfg.steps, cfg.seed)
    else:
        net = tess.delaunay(sample_palm_poisson(cfg.space_kind, cfg.lam, cfg.window_radius, cfg.seed))
        trace = walk.srw(net, net.root, cfg.steps, replica_rng(cfg.seed, 0, 4))
    p = out / "walk.csv"
    p.write_text(trace.to_csv(), encoding="utf-8", newline="\n")
    _manifest(out, cfg, [p.name], steps_completed=trace.length, censored=bool(trace.censored),
              final_displacement=float(trace.embedded[-1]))
    return [p]


def figure_panels(cfg: ExperimentConfig) -> list[Panel]:
    panels = []
    if cfg.kind in ("gaf", "pair"):
        s = sample_kac_gaf(cfg.degree, replica_rng(cfg.seed, 0, 5))
        panels.append(Panel(f"Kac polynomial roots, degree {cfg.degree}", tess.delaunay(s),
                            {"kind": "gaf", "degree": cfg.degree, "expected_count": cfg.degree / 2.0}))
    if cfg.kind in ("pv", "pair"):
        lam, radius = matched_poisson_params(cfg.degree)
        s = sample_poisson(HYP, lam, radius, replica_rng(cfg.seed, 0, 6))
        panels.append(Panel(f"Poisson, intensity 1/(4 pi), radius {radius:.4f}", tess.delaunay(s),
                            {"kind": "pv", "lambda": lam, "radius": radius,
                             "expected_count": lam * float(geo.ball_volume(HYP, radius))}))
    return panels


def cmd_figure(cfg: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    panels = figure_panels(cfg)
    p = out / f"figure_{cfg.kind}.svg"
    p.write_text(render(panels), encoding="utf-8", newline="\n")
    _manifest(out, cfg, [p.name], counts={x.meta["kind"]: x.net.n_vertices for x in panels})
    return [p]


def cmd_run(cfg: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    records = run_experiment(cfg, out, jobs)
    for r in records:
        print(f"{r.estimator} {r.param}: {r.estimate:.6g} [{r.ci_lo:.6g}, {r.ci_hi:.6g}] "
              f"replicas={r.replicas} discarded={r.discarded}")
    return [out / f"{cfg.experiment}.csv"]


COMMANDS = {"sample": cmd_sample, "tessellate": cmd_tessellate, "walk": cmd_walk, "run": cmd_run,
            "figure": cmd_figure}


# -- argument parsing ----------------------------------------------------------------

def _list_of(kind):
    def parse(text):
        return [kind(x) for x in text.split(",") if x.strip()]
    return parse


_FLAG_TYPES = {"lam": float, "window_radius": float, "replicas": int, "steps": int, "delta": float,
               "mc_points": int, "ball_points": int, "degree": int, "ns": _list_of(int),
               "deltas": _list_of(float), "r_grid": _list_of(int), "t_grid": _list_of(float)}


_FLAG_HELP = {
    "space": "euclidean or hyperbolic",
    "process": "palm, poisson or gaf",
    "lam": "intensity of the Poisson process",
    "window_radius": "sampling window radius (hyperbolic: at most 12); walk: omit for the lazy walker",
    "replicas": "number of independent replicas",
    "steps": "random-walk steps",
    "ns": "comma-separated step counts at which speed is read",
    "mode": "displacement mode for speed: embedded",
    "deltas": "comma-separated coarse intensities for percolation and folner",
    "delta": "coarse intensity for d1d2",
    "estimator": "percolation boundary ratio: cluster or closed",
    "r_grid": "comma-separated radii (tail, ballgrowth)",
    "t_grid": "comma-separated containment factors t (ballgrowth)",
    "transport": "mass-transport function: adjacent, f1, f2 or f3",
    "mc_points": "Monte Carlo points per Folner quotient",
    "ball_points": "points checked per replica in d1d2's ball-in-cell test",
    "degree": "Kac polynomial degree (gaf process, figure)",
    "input": "sample path (without extension) for tessellate",
}


def _common(suppress: bool) -> argparse.ArgumentParser:
    d = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=d, help="JSON config file")
    p.add_argument("--seed", type=int, default=d, help="master seed (overrides the config)")
    p.add_argument("--jobs", type=int, default=d, help="replica-parallel worker processes")
    p.add_argument("--out", default=d, help="output directory")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distlat", parents=[_common(False)],
                                     description="Delaunay networks on Poisson and GAF samples")
    parser.add_argument("--version", action="version", version=f"distlat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[_common(True)])
        if name == "run":
            sp.add_argument("experiment", nargs="?", default=argparse.SUPPRESS, help=", ".join(EXPERIMENTS))
        if name == "figure":
            sp.add_argument("kind", nargs="?", default=argparse.SUPPRESS, help="gaf, pv or pair")
        for f in dataclasses.fields(ExperimentConfig):
            if f.name in ("seed", "experiment", "kind"):
                continue
            sp.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=argparse.SUPPRESS,
                            type=_FLAG_TYPES.get(f.name, str), help=_FLAG_HELP.get(f.name))
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        cfg = ExperimentConfig.from_json(text)
        data = dataclasses.asdict(cfg)
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for k, v in vars(args).items():
        if k in names and v is not None:
            data[k] = v
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        jobs = args.jobs or 1
        if jobs < 1:
            raise ConfigError("jobs", "must be >= 1")
        out = Path(args.out or "out")
        COMMANDS[args.command](cfg, out, jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except REJECTIONS as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    return EXIT_OK


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
