"""Voronoi cell of the origin by half-plane clipping.

In the Beltrami-Klein chart the hyperbolic bisector of the origin and a
point with Poincare coordinates q is the straight line ``k . q = |q|^2``;
in the plane the bisector of 0 and q is ``k . q = |q|^2 / 2``.  Either way
the cell of the origin is a convex polygon cut out by half-planes, which
this kernel computes directly (no triangulation).
"""

import math

import numpy as np

from ._jit import njit


@njit(cache=True)
def _clip(px, py, lab, m, ax, ay, c, label, ox, oy, olab):
    """Clip polygon (px, py)[:m] by a*x <= c.  Edge i runs from vertex i to i+1
    and carries lab[i].  Writes into (ox, oy, olab); returns new size."""
    k = 0
    for i in range(m):
        j = (i + 1) % m
        si = ax * px[i] + ay * py[i] - c
        sj = ax * px[j] + ay * py[j] - c
        if si <= 0.0:
            ox[k] = px[i]
            oy[k] = py[i]
            olab[k] = lab[i]
            k += 1
            if sj > 0.0:
                t = si / (si - sj)
                ox[k] = px[i] + t * (px[j] - px[i])
                oy[k] = py[i] + t * (py[j] - py[i])
                olab[k] = label
                k += 1
        elif sj <= 0.0:
            t = si / (si - sj)
            ox[k] = px[i] + t * (px[j] - px[i])
            oy[k] = py[i] + t * (py[j] - py[i])
            olab[k] = lab[i]
            k += 1
    return k


@njit(cache=True)
def origin_cell(qx, qy, hyperbolic, box):
    """Cell of the origin among points (qx, qy), which must be sorted by
    increasing distance from the origin.

    Returns ``(vx, vy, labels, rho_max, exact)``: polygon vertices (Klein
    coordinates for the hyperbolic case), the index of the point whose
    bisector carries each edge (negative for the bounding box), the largest
    metric distance from the origin to a cell vertex, and whether the
    supplied points provably determine the cell.
    """
    n = qx.shape[0]
    cap = n + 8
    px = np.empty(cap)
    py = np.empty(cap)
    lab = np.empty(cap, dtype=np.int64)
    ox = np.empty(cap)
    oy = np.empty(cap)
    olab = np.empty(cap, dtype=np.int64)
    px[0], py[0], lab[0] = -box, -box, -1
    px[1], py[1], lab[1] = box, -box, -2
    px[2], py[2], lab[2] = box, box, -3
    px[3], py[3], lab[3] = -box, box, -4
    m = 4
    rho_max = np.inf
    exact = False
    for j in range(n):
        q2 = qx[j] * qx[j] + qy[j] * qy[j]
        if hyperbolic:
            c = q2
            dq = 2.0 * math.atanh(math.sqrt(q2))
        else:
            c = 0.5 * q2
            dq = math.sqrt(q2)
        if 2.0 * rho_max < dq:
            exact = True
            break
        m = _clip(px, py, lab, m, qx[j], qy[j], c, j, ox, oy, olab)
        for i in range(m):
            px[i] = ox[i]
            py[i] = oy[i]
            lab[i] = olab[i]
        # metric radius of the current polygon (infinite while the box still shows)
        bounded = True
        for i in range(m):
            if lab[i] < 0:
                bounded = False
        if bounded:
            r2 = 0.0
            for i in range(m):
                v2 = px[i] * px[i] + py[i] * py[i]
                if v2 > r2:
                    r2 = v2
            if hyperbolic:
                if r2 >= 1.0:
                    rho_max = np.inf
                else:
                    rho_max = math.atanh(math.sqrt(r2))
            else:
                rho_max = math.sqrt(r2)
    return px[:m].copy(), py[:m].copy(), lab[:m].copy(), rho_max, exact
