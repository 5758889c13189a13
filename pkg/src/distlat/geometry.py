"""Constant-curvature plane geometry in a single chart.

The Euclidean plane uses ordinary coordinates.  The hyperbolic plane
(curvature -1) uses the Poincare disk, where metric balls are Euclidean
disks; that is what lets the Delaunay code run on chart coordinates.

Functions accept a single point ``(x, y)`` or an ``(n, 2)`` array.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# 1 - |z|^2 must stay above this in the disk chart.
CHART_GUARD = 1e-12
# Largest hyperbolic window radius used for sampling.
MAX_HYPERBOLIC_WINDOW = 12.0


class SpaceKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"

    @classmethod
    def parse(cls, value) -> "SpaceKind":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        aliases = {"euc": "euclidean", "e": "euclidean", "r2": "euclidean",
                   "hyp": "hyperbolic", "h": "hyperbolic", "h2": "hyperbolic"}
        try:
            return cls(aliases.get(v, v))
        except ValueError:
            raise ValueError(f"unknown space {value!r}") from None


EUC = SpaceKind.EUCLIDEAN
HYP = SpaceKind.HYPERBOLIC


class ChartError(ValueError):
    """A point is too close to the boundary of the disk chart."""


class DegenerateCircleError(ValueError):
    """Three points are collinear; no circumcircle."""


class UnboundedWitnessError(ValueError):
    """The chart circumdisk leaves the unit disk, so it is not a hyperbolic ball."""


class PolygonError(ValueError):
    pass


def _as_points(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape[-1] != 2:
        raise ValueError(f"points must have trailing dimension 2, got shape {a.shape}")
    return a


def check_chart(space: SpaceKind, p) -> np.ndarray:
    a = _as_points(p)
    if space is HYP:
        slack = 1.0 - np.sum(a * a, axis=-1)
        if np.any(~(slack > CHART_GUARD)):
            raise ChartError("point outside the precision-guarded disk chart")
    return a


def dist(space, p, q):
    """Geodesic distance.  Broadcasts over leading dimensions."""
    space = SpaceKind.parse(space)
    p = check_chart(space, p)
    q = check_chart(space, q)
    d = p - q
    e = np.sqrt(np.sum(d * d, axis=-1))
    if space is EUC:
        return e if e.ndim else float(e)
    # arccosh(1 + 2|p-q|^2/((1-|p|^2)(1-|q|^2))) written via asinh for small distances
    den = np.sqrt((1.0 - np.sum(p * p, axis=-1)) * (1.0 - np.sum(q * q, axis=-1)))
    out = 2.0 * np.arcsinh(e / den)
    return out if out.ndim else float(out)


def radius_to_chart(space: SpaceKind, r):
    """Chart radius of the metric circle of radius ``r`` about the origin."""
    space = SpaceKind.parse(space)
    return np.asarray(r, dtype=float) if space is EUC else np.tanh(np.asarray(r, dtype=float) / 2.0)


def chart_to_radius(space: SpaceKind, rho):
    space = SpaceKind.parse(space)
    return np.asarray(rho, dtype=float) if space is EUC else 2.0 * np.arctanh(np.asarray(rho, dtype=float))


def ball_volume(space, r):
    """Area of a metric ball of radius r: pi r^2, or 2 pi (cosh r - 1)."""
    space = SpaceKind.parse(space)
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("radius must be nonnegative")
    if space is EUC:
        out = math.pi * r_arr * r_arr
    else:
        # 2 pi (cosh r - 1) = 4 pi sinh^2(r/2), no cancellation at small r
        out = 4.0 * math.pi * np.sinh(r_arr / 2.0) ** 2
    return out if out.ndim else float(out)


def inverse_ball_volume(space, a):
    space = SpaceKind.parse(space)
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr < 0):
        raise ValueError("area must be nonnegative")
    if space is EUC:
        out = np.sqrt(a_arr / math.pi)
    else:
        out = 2.0 * np.arcsinh(np.sqrt(a_arr / (4.0 * math.pi)))
    return out if out.ndim else float(out)


def _mobius(z: np.ndarray, a: complex) -> np.ndarray:
    return (z - a) / (1.0 - np.conj(a) * z)


def _to_complex(p) -> np.ndarray:
    a = _as_points(p)
    return a[..., 0] + 1j * a[..., 1]


def _to_xy(z) -> np.ndarray:
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1)


def geodesic_midpoint(space, p, q):
    space = SpaceKind.parse(space)
    p = check_chart(space, p)
    q = check_chart(space, q)
    if space is EUC:
        return 0.5 * (p + q)
    zp = _to_complex(p)
    zq = _to_complex(q)
    w = _mobius(zq, zp)
    aw = np.abs(w)
    d = 2.0 * np.arctanh(np.minimum(aw, 1.0 - 1e-17))
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(aw > 0, w / np.where(aw > 0, aw, 1.0), 0.0)
    m = np.tanh(d / 4.0) * unit
    back = (m + zp) / (1.0 + np.conj(zp) * m)
    return _to_xy(back)


def euclidean_circumcircle(p1, p2, p3):
    """Circumcenter and radius of three chart points (Euclidean)."""
    ax, ay = float(p1[0]), float(p1[1])
    bx, by = float(p2[0]) - ax, float(p2[1]) - ay
    cx, cy = float(p3[0]) - ax, float(p3[1]) - ay
    d = 2.0 * (bx * cy - by * cx)
    scale = max(bx * bx + by * by, cx * cx + cy * cy)
    if scale == 0.0 or abs(d) <= 1e-14 * scale:
        raise DegenerateCircleError("collinear points have no circumcircle")
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return np.array([ax + ux, ay + uy]), math.hypot(ux, uy)


def chart_disk_to_hyperbolic(center, radius):
    """Convert a chart disk inside the unit disk to hyperbolic center and radius."""
    c = np.asarray(center, dtype=float)
    nc = math.hypot(c[0], c[1])
    lo, hi = nc - radius, nc + radius
    if hi >= 1.0 - 1e-15:
        raise UnboundedWitnessError("chart disk is not contained in the unit disk")
    s1 = 2.0 * math.atanh(lo)
    s2 = 2.0 * math.atanh(hi)
    mid = 0.5 * (s1 + s2)
    rad = 0.5 * (s2 - s1)
    if nc == 0.0:
        return np.zeros(2), rad
    return math.tanh(mid / 2.0) * c / nc, rad


def hyperbolic_disk_to_chart(center, radius):
    """Inverse of :func:`chart_disk_to_hyperbolic`."""
    c = np.asarray(center, dtype=float)
    nc = math.hypot(c[0], c[1])
    s = 2.0 * math.atanh(nc)
    lo = math.tanh((s - radius) / 2.0)
    hi = math.tanh((s + radius) / 2.0)
    if nc == 0.0:
        return np.zeros(2), hi
    return 0.5 * (lo + hi) * c / nc, 0.5 * (hi - lo)


def nearest_sites(space, sites, queries, k: int = 1):
    """Indices and distances of the ``k`` nearest sites to each query.

    Hyperbolic balls are chart disks, so the exact search is a chart
    k-d tree query followed by a disk query sized from the candidates.
    """
    from scipy.spatial import cKDTree

    space = SpaceKind.parse(space)
    sites = check_chart(space, np.asarray(sites, dtype=float).reshape(-1, 2))
    queries = check_chart(space, np.asarray(queries, dtype=float).reshape(-1, 2))
    if len(sites) < k:
        raise ValueError(f"need at least {k} sites")
    tree = cKDTree(sites)
    d, idx = tree.query(queries, k=k)
    d = d.reshape(len(queries), k)
    idx = idx.reshape(len(queries), k)
    if space is EUC:
        return idx, d
    hd = dist(HYP, sites[idx], queries[:, None, :])
    reach = hd.max(axis=1) * (1.0 + 1e-12) + 1e-15
    nq = np.hypot(queries[:, 0], queries[:, 1])
    s = 2.0 * np.arctanh(nq)
    lo = np.tanh((s - reach) / 2.0)
    hi = np.tanh((s + reach) / 2.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(nq[:, None] > 0, queries / np.where(nq > 0, nq, 1.0)[:, None], 0.0)
    centers = 0.5 * (lo + hi)[:, None] * u
    centers[nq == 0] = 0.0
    radii = 0.5 * (hi - lo)
    out_i = np.empty((len(queries), k), dtype=np.int64)
    out_d = np.empty((len(queries), k))
    for j, cand in enumerate(tree.query_ball_point(centers, radii * (1.0 + 1e-9) + 1e-15)):
        cand = np.asarray(cand, dtype=np.int64)
        dj = dist(HYP, sites[cand], queries[j])
        order = np.lexsort((cand, dj))[:k]
        out_i[j] = cand[order]
        out_d[j] = dj[order]
    return out_i, out_d


def circumcircle(space, p1, p2, p3):
    """Metric circle through three points: ``(center, radius)``."""
    space = SpaceKind.parse(space)
    for p in (p1, p2, p3):
        check_chart(space, p)
    c, r = euclidean_circumcircle(p1, p2, p3)
    if space is EUC:
        return c, r
    return chart_disk_to_hyperbolic(c, r)


def to_klein(p) -> np.ndarray:
    """Poincare disk -> Beltrami-Klein disk; hyperbolic geodesics become chords."""
    a = _as_points(p)
    s = np.sum(a * a, axis=-1, keepdims=True)
    return 2.0 * a / (1.0 + s)


def from_klein(k) -> np.ndarray:
    a = _as_points(k)
    s = np.sum(a * a, axis=-1, keepdims=True)
    return a / (1.0 + np.sqrt(np.maximum(1.0 - s, 0.0)))


def hyperbolic_triangle_area(a, b, c):
    """Area from side lengths (hyperbolic L'Huilier formula, angle defect)."""
    a, b, c = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    s = 0.5 * (a + b + c)
    t = (np.tanh(s / 2.0) * np.tanh(np.maximum(s - a, 0.0) / 2.0)
         * np.tanh(np.maximum(s - b, 0.0) / 2.0) * np.tanh(np.maximum(s - c, 0.0) / 2.0))
    out = 4.0 * np.arctan(np.sqrt(np.maximum(t, 0.0)))
    return out if out.ndim else float(out)


def hyperbolic_angles(a, b, c):
    """Interior angles opposite sides a, b, c (hyperbolic law of cosines)."""
    def ang(x, y, z):
        cosv = (math.cosh(y) * math.cosh(z) - math.cosh(x)) / (math.sinh(y) * math.sinh(z))
        return math.acos(min(1.0, max(-1.0, cosv)))

    return ang(a, b, c), ang(b, c, a), ang(c, a, b)


@dataclass(frozen=True)
class GeodesicPolygon:
    vertices: np.ndarray
    space: SpaceKind

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float).reshape(-1, 2))
        object.__setattr__(self, "space", SpaceKind.parse(self.space))


def _straight_coords(space: SpaceKind, pts: np.ndarray) -> np.ndarray:
    return pts if space is EUC else to_klein(pts)


def _segments_cross(p, q, r, s) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p, q, r), orient(p, q, s)
    d3, d4 = orient(r, s, p), orient(r, s, q)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def is_simple(poly: GeodesicPolygon) -> bool:
    v = _straight_coords(poly.space, poly.vertices)
    n = len(v)
    if n < 3:
        return False
    for i in range(n):
        if np.allclose(v[i], v[(i + 1) % n], rtol=0, atol=1e-15):
            return False
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                return False
    return True


def polygon_area(poly: GeodesicPolygon, check: bool = True) -> float:
    """Signed area, positive for counterclockwise vertex order."""
    pts = poly.vertices
    if check and not is_simple(poly):
        raise PolygonError("polygon is not simple")
    if poly.space is EUC:
        x, y = pts[:, 0], pts[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    check_chart(HYP, pts)
    # signed fan from vertex 0; orientation read off Klein coordinates
    k = to_klein(pts)
    p0 = pts[0]
    b = pts[1:-1]
    c = pts[2:]
    sa = dist(HYP, b, c)
    sb = dist(HYP, np.broadcast_to(p0, c.shape), c)
    sc = dist(HYP, np.broadcast_to(p0, b.shape), b)
    areas = np.atleast_1d(hyperbolic_triangle_area(sa, sb, sc))
    kb, kc = k[1:-1] - k[0], k[2:] - k[0]
    sign = np.sign(kb[:, 0] * kc[:, 1] - kb[:, 1] * kc[:, 0])
    return float(np.sum(sign * areas))


@dataclass(frozen=True)
class Isometry:
    """Orientation-preserving isometry ``z -> e^{i angle} phi_a(z)``, optionally
    precomposed with complex conjugation.

    ``phi_a`` is ``z - a`` in the plane and the disk automorphism
    ``(z - a) / (1 - conj(a) z)`` in the Poincare chart; ``a`` is the point
    sent to the origin.
    """

    space: SpaceKind
    angle: float = 0.0
    shift: tuple = (0.0, 0.0)
    flip: bool = False

    def _matrix(self) -> np.ndarray:
        a = complex(self.shift[0], self.shift[1])
        e = complex(math.cos(self.angle), math.sin(self.angle))
        if self.space is EUC:
            return np.array([[e, -e * a], [0.0, 1.0]], dtype=complex)
        return np.array([[e, -e * a], [-a.conjugate(), 1.0]], dtype=complex)

    @classmethod
    def _from_matrix(cls, space: SpaceKind, m: np.ndarray, flip: bool) -> "Isometry":
        m = m / m[1, 1]
        e = m[0, 0]
        a = -m[0, 1] / e
        return cls(space, float(np.angle(e)), (float(a.real), float(a.imag)), flip)

    @property
    def translation(self) -> np.ndarray:
        """Euclidean translation part (applied before the rotation)."""
        return -np.asarray(self.shift, dtype=float)

    def apply(self, p) -> np.ndarray:
        z = _to_complex(check_chart(self.space, p))
        if self.flip:
            z = np.conj(z)
        m = self._matrix()
        w = (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])
        return _to_xy(w)

    def compose(self, other: "Isometry") -> "Isometry":
        """``self`` after ``other``."""
        if other.space is not self.space:
            raise ValueError("cannot compose isometries of different spaces")
        m_other = other._matrix()
        if self.flip:
            m_other = np.conj(m_other)
        return Isometry._from_matrix(self.space, self._matrix() @ m_other, self.flip != other.flip)

    def inverse(self) -> "Isometry":
        m = np.linalg.inv(self._matrix())
        if self.flip:
            m = np.conj(m)
        return Isometry._from_matrix(self.space, m, self.flip)


def identity(space) -> Isometry:
    return Isometry(SpaceKind.parse(space))


def isometry_to_origin(space, p) -> Isometry:
    space = SpaceKind.parse(space)
    p = check_chart(space, p)
    return Isometry(space, 0.0, (float(p[0]), float(p[1])), False)


def rotation(space, angle: float) -> Isometry:
    return Isometry(SpaceKind.parse(space), float(angle))


def translation_along_x(space, length: float) -> Isometry:
    """Isometry moving the origin a distance ``length`` along the positive x axis."""
    space = SpaceKind.parse(space)
    target = float(length) if space is EUC else math.tanh(float(length) / 2.0)
    return Isometry(space, 0.0, (-target, 0.0))
