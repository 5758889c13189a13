"""Point process samplers: Poisson, its Palm version, and Kac-polynomial GAF zeros."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import geometry as geo
from ._aberth import aberth
from .geometry import EUC, HYP, SpaceKind
from .rng import as_generator

COINCIDENCE_TOL = 1e-12


@dataclass(frozen=True)
class ProcessKind:
    name: str
    lam: float | None = None
    degree: int | None = None

    POISSON = "poisson"
    PALM_POISSON = "palm_poisson"
    KAC_GAF = "kac_gaf"

    def __post_init__(self):
        if self.name in (self.POISSON, self.PALM_POISSON):
            if self.lam is None or not self.lam > 0:
                raise ValueError(f"intensity must be positive, got {self.lam!r}")
        elif self.name == self.KAC_GAF:
            if self.degree is None or int(self.degree) < 1:
                raise ValueError(f"degree must be >= 1, got {self.degree!r}")
        else:
            raise ValueError(f"unknown process kind {self.name!r}")

    @classmethod
    def poisson(cls, lam: float) -> "ProcessKind":
        return cls(cls.POISSON, float(lam))

    @classmethod
    def palm_poisson(cls, lam: float) -> "ProcessKind":
        return cls(cls.PALM_POISSON, float(lam))

    @classmethod
    def kac_gaf(cls, degree: int) -> "ProcessKind":
        return cls(cls.KAC_GAF, None, int(degree))


@dataclass(frozen=True)
class PointSample:
    space: SpaceKind
    points: np.ndarray
    window_radius: float
    kind: ProcessKind
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float).reshape(-1, 2))
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "space", SpaceKind.parse(self.space))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def is_palm(self) -> bool:
        return self.kind.name == ProcessKind.PALM_POISSON

    @property
    def root(self) -> int | None:
        """Index of the point at the origin for Palm samples."""
        if not self.is_palm:
            return None
        return int(self.meta.get("root", self.count - 1))

    def sidecar(self) -> dict:
        w = self.window_radius
        return {
            "space": self.space.value,
            "kind": self.kind.name,
            "lambda": self.kind.lam,
            "degree": self.kind.degree,
            "window_radius": None if w is None or not math.isfinite(w) else float(w),
            "seed": self.seed,
            "count": self.count,
        }


def _check_window(space: SpaceKind, window_radius: float) -> None:
    if not window_radius >= 0:
        raise ValueError(f"window radius must be nonnegative, got {window_radius!r}")
    if space is HYP and window_radius > geo.MAX_HYPERBOLIC_WINDOW:
        raise geo.ChartError(
            f"hyperbolic window {window_radius} exceeds the precision cap {geo.MAX_HYPERBOLIC_WINDOW}")


def drop_coincident(points: np.ndarray, tol: float = COINCIDENCE_TOL) -> np.ndarray:
    """Remove all but the first of any points closer than ``tol`` in the chart."""
    if len(points) < 2:
        return points
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return points
    keep = np.ones(len(points), dtype=bool)
    keep[np.maximum(pairs[:, 0], pairs[:, 1])] = False
    return points[keep]


def sample_radii(space: SpaceKind, window_radius: float, u: np.ndarray) -> np.ndarray:
    """Metric radii with density proportional to the volume element, from uniforms."""
    if space is EUC:
        return window_radius * np.sqrt(u)
    # cosh r = 1 + u (cosh R - 1), i.e. sinh(r/2) = sqrt(u) sinh(R/2)
    return 2.0 * np.arcsinh(np.sqrt(u) * math.sinh(window_radius / 2.0))


def poisson_points(space, lam: float, window_radius: float, rng) -> np.ndarray:
    """Chart coordinates of a Poisson process of intensity ``lam`` in B(o, R)."""
    space = SpaceKind.parse(space)
    rng = as_generator(rng)
    mean = lam * geo.ball_volume(space, window_radius)
    n = int(rng.poisson(mean))
    r = sample_radii(space, window_radius, rng.random(n))
    theta = rng.random(n) * (2.0 * math.pi)
    rho = r if space is EUC else np.tanh(r / 2.0)
    pts = np.column_stack([rho * np.cos(theta), rho * np.sin(theta)])
    return drop_coincident(pts)


def sample_poisson(space, lam: float, window_radius: float, seed) -> PointSample:
    space = SpaceKind.parse(space)
    kind = ProcessKind.poisson(lam)
    _check_window(space, float(window_radius))
    pts = poisson_points(space, lam, float(window_radius), seed)
    return PointSample(space, pts, float(window_radius), kind,
                       seed if isinstance(seed, (int, np.integer)) else None)


def palmify(sample: PointSample) -> PointSample:
    """Adjoin the origin (Slivnyak: the Palm version of a Poisson process)."""
    if sample.kind.name == ProcessKind.PALM_POISSON:
        raise ValueError("sample is already a Palm sample")
    if sample.kind.name != ProcessKind.POISSON:
        raise ValueError("palmify is defined for Poisson samples")
    pts = sample.points
    if len(pts):
        near = np.hypot(pts[:, 0], pts[:, 1]) <= COINCIDENCE_TOL
        pts = pts[~near]
    pts = np.vstack([pts, np.zeros((1, 2))])
    return replace(sample, points=pts, kind=ProcessKind.palm_poisson(sample.kind.lam),
                   meta={**sample.meta, "root": len(pts) - 1})


def sample_palm_poisson(space, lam: float, window_radius: float, seed) -> PointSample:
    return palmify(sample_poisson(space, lam, window_radius, seed))


class RootFindingError(RuntimeError):
    def __init__(self, message, failed):
        super().__init__(message)
        self.failed = failed


def poly_roots(coeffs, tol: float = 1e-10, max_iter: int = 500) -> np.ndarray:
    """All roots (with multiplicity) of ``sum coeffs[k] z^k``.

    Every root is certified by its backward error
    ``|p(z)| / sum |a_k| |z|^k <= tol``; otherwise ``RootFindingError``
    lists the offending indices.
    """
    a = np.asarray(coeffs, dtype=np.complex128).ravel()
    nz = np.flatnonzero(a)
    if len(nz) == 0 or nz[-1] == 0:
        raise ValueError("polynomial must have degree >= 1 with nonzero leading coefficient")
    a = a[: nz[-1] + 1]
    low = int(nz[0])  # roots at exactly zero
    core = a[low:]
    if len(core) == 1:
        roots = np.zeros(0, dtype=complex)
    elif len(core) == 2:
        roots = np.array([-core[0] / core[1]])
    else:
        roots, berr, _ = aberth(core, max_iter, tol)
        failed = np.flatnonzero(~(berr <= tol))
        if len(failed):
            raise RootFindingError(
                f"{len(failed)} roots failed the backward-error certificate", failed)
    return np.concatenate([np.zeros(low, dtype=complex), roots])


def kac_coefficients(degree: int, rng) -> np.ndarray:
    """i.i.d. standard complex Gaussians (E|a|^2 = 1)."""
    rng = as_generator(rng)
    re = rng.standard_normal(degree + 1)
    im = rng.standard_normal(degree + 1)
    return (re + 1j * im) / math.sqrt(2.0)


def sample_kac_gaf(degree: int, seed) -> PointSample:
    """Roots inside the unit disk of a Kac polynomial, as hyperbolic chart points."""
    kind = ProcessKind.kac_gaf(degree)
    a = kac_coefficients(int(degree), seed)
    z = poly_roots(a)
    inside = z[(1.0 - np.abs(z) ** 2) > geo.CHART_GUARD]
    pts = drop_coincident(np.column_stack([inside.real, inside.imag]))
    return PointSample(HYP, pts, math.inf, kind,
                       seed if isinstance(seed, (int, np.integer)) else None)


GAF_INTENSITY = 1.0 / (4.0 * math.pi)


def matched_poisson_params(degree: int) -> tuple[float, float]:
    """Intensity and window radius of a hyperbolic Poisson process matching
    the Kac GAF of this degree (``degree / 2`` points expected)."""
    if int(degree) < 1:
        raise ValueError("degree must be >= 1")
    lam = GAF_INTENSITY
    return lam, geo.inverse_ball_volume(HYP, (degree / 2.0) / lam)


# -- serialization ---------------------------------------------------------

def points_to_csv(points: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for x, y in np.asarray(points, dtype=float):
        w.writerow([repr(float(x)), repr(float(y))])
    return buf.getvalue()


def write_sample(sample: PointSample, path) -> tuple[Path, Path]:
    """Write ``<path>.csv`` and ``<path>.json``."""
    path = Path(path)
    csv_path = path.with_suffix(".csv")
    json_path = path.with_suffix(".json")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        fh.write(points_to_csv(sample.points))
    with open(json_path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(sample.sidecar(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def read_sample(path) -> PointSample:
    path = Path(path)
    with open(path.with_suffix(".json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    with open(path.with_suffix(".csv"), newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["x", "y"]:
        raise ValueError("point CSV must start with header x,y")
    pts = np.array([[float(x), float(y)] for x, y in rows[1:]], dtype=float).reshape(-1, 2)
    if len(pts) != meta["count"]:
        raise ValueError("sidecar count does not match CSV rows")
    name = meta["kind"]
    kind = ProcessKind(name, meta.get("lambda"), meta.get("degree"))
    w = meta.get("window_radius")
    extra = {}
    if name == ProcessKind.PALM_POISSON:
        d = np.hypot(pts[:, 0], pts[:, 1])
        extra["root"] = int(np.argmin(d))
    return PointSample(SpaceKind.parse(meta["space"]), pts, math.inf if w is None else float(w),
                       kind, meta.get("seed"), extra)
