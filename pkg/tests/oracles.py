"""Independent brute-force references used by the tests.

Nothing here calls into the package's triangulation or predicates.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, minimize_scalar


def hyp_dist(p, q):
    """arccosh form of the Poincare-disk distance."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    num = 2.0 * np.sum((p - q) ** 2, axis=-1)
    den = (1.0 - np.sum(p * p, axis=-1)) * (1.0 - np.sum(q * q, axis=-1))
    return np.arccosh(1.0 + num / den)


def _empty_interval(points, i, j):
    """Exact interval of bisector parameters t whose disk leaves every point outside.

    Centers run along the bisector, c(t) = m + t * perp(b - a), through
    points i and j.  Point k is outside the disk at c(t) iff
    |m - p_k|^2 - |m - a|^2 + 2 t perp . (m - p_k) >= 0, linear in t.
    Returns ``(lo, hi)`` with ``None`` for an open end, or ``None`` if empty.
    """
    P = [(Fraction(float(x)), Fraction(float(y))) for x, y in np.asarray(points, float)]
    a, b = P[i], P[j]
    m = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    perp = (a[1] - b[1], b[0] - a[0])
    r2 = (m[0] - a[0]) ** 2 + (m[1] - a[1]) ** 2
    lo, hi = None, None
    for k, p in enumerate(P):
        if k in (i, j):
            continue
        A = (m[0] - p[0]) ** 2 + (m[1] - p[1]) ** 2 - r2
        B = 2 * (perp[0] * (m[0] - p[0]) + perp[1] * (m[1] - p[1]))
        if B == 0:
            if A < 0:
                return None
        elif B > 0:
            lo = -A / B if lo is None else max(lo, -A / B)
        else:
            hi = -A / B if hi is None else min(hi, -A / B)
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi


def witness_exists(points, i, j, hyperbolic):
    """Is there a metric ball with points i, j on its boundary and no point inside?

    Hyperbolic disks are the chart disks inside the unit disk, so the
    hyperbolic case also needs the empty interval to meet the set of t whose
    disk fits in the chart; that set is an interval because the reach
    |c(t)| + radius(t) is convex in t.
    """
    iv = _empty_interval(points, i, j)
    if iv is None:
        return False
    if not hyperbolic:
        return True
    pts = np.asarray(points, float)
    a, b = pts[i], pts[j]
    m = 0.5 * (a + b)
    perp = np.array([a[1] - b[1], b[0] - a[0]])
    h2 = float(np.sum((m - a) ** 2))
    reach = lambda t: np.linalg.norm(m + t * perp) + math.sqrt(h2 + t * t * (perp @ perp))
    t0 = minimize_scalar(reach, bracket=(-1.0, 1.0), tol=1e-14).x
    if reach(t0) >= 1.0:
        return False
    span = 1.0
    while reach(t0 - span) < 1.0 or reach(t0 + span) < 1.0:
        span *= 2.0
    ta = brentq(lambda t: reach(t) - 1.0, t0 - span, t0)
    tb = brentq(lambda t: reach(t) - 1.0, t0, t0 + span)
    lo = -math.inf if iv[0] is None else float(iv[0])
    hi = math.inf if iv[1] is None else float(iv[1])
    return max(lo, ta) < min(hi, tb)


def brute_force_delaunay_edges(points, hyperbolic=False):
    n = len(points)
    return {(i, j) for i, j in itertools.combinations(range(n), 2)
            if witness_exists(points, i, j, hyperbolic)}


def exhaustive_edge_isoperimetry(n, edges):
    """min over nonempty S with vol(S) <= vol(V)/2 of |boundary(S)| / vol(S)."""
    deg = np.zeros(n, int)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    total = deg.sum()
    best = math.inf
    for mask in range(1, 1 << n):
        s = [(mask >> v) & 1 for v in range(n)]
        vol = sum(deg[v] for v in range(n) if s[v])
        if vol == 0 or 2 * vol > total:
            continue
        cut = sum(1 for a, b in edges if s[a] != s[b])
        best = min(best, cut / vol)
    return best
