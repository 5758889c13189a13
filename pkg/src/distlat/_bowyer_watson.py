"""Incremental Bowyer-Watson triangulation kernel.

Triangles are stored as counterclockwise vertex triples.  The convex hull
is closed off with ghost triangles ``(x, y, -1)`` whose hull edge ``x -> y``
has the exterior on its left, so every point insertion is a cavity
retriangulation with no special cases and no finite super-triangle.
"""

import numpy as np

from ._jit import njit
from .predicates import incircle, orient2d

GHOST = -1


@njit(cache=True)
def _conflict(tri, t, xs, ys, px, py):
    a = tri[t, 0]
    b = tri[t, 1]
    c = tri[t, 2]
    if c == GHOST:
        o = orient2d(xs[a], ys[a], xs[b], ys[b], px, py)
        if o > 0:
            return True
        if o < 0:
            return False
        # collinear with the hull edge: in conflict only strictly inside the segment
        d1 = (px - xs[a]) * (xs[b] - xs[a]) + (py - ys[a]) * (ys[b] - ys[a])
        d2 = (px - xs[b]) * (xs[a] - xs[b]) + (py - ys[b]) * (ys[a] - ys[b])
        return d1 > 0.0 and d2 > 0.0
    return incircle(xs[a], ys[a], xs[b], ys[b], xs[c], ys[c], px, py) > 0


@njit(cache=True)
def _locate(tri, nbr, start, xs, ys, px, py):
    """Visibility walk; returns a triangle in conflict with p (or -1)."""
    t = start
    steps = 0
    limit = 4 * tri.shape[0] + 100
    while steps < limit:
        steps += 1
        if tri[t, 2] == GHOST:
            return t
        moved = False
        k0 = steps % 3
        for kk in range(3):
            k = (k0 + kk) % 3
            a = tri[t, (k + 1) % 3]
            b = tri[t, (k + 2) % 3]
            if orient2d(xs[a], ys[a], xs[b], ys[b], px, py) < 0:
                t = nbr[t, k]
                moved = True
                break
        if not moved:
            return t
    return -1


@njit(cache=True)
def _set_nbr_by_opposite(tri, nbr, t, opp, value):
    for k in range(3):
        if tri[t, k] == opp:
            nbr[t, k] = value
            return


@njit(cache=True)
def _replace_nbr(nbr, t, old, new):
    for k in range(3):
        if nbr[t, k] == old:
            nbr[t, k] = new
            return


@njit(cache=True)
def triangulate(xs, ys, order):
    """Triangulate points inserted in ``order``.

    Returns ``(tri, nbr, alive, status)``; ``status`` is 0 on success,
    1 if all points are collinear, 2 if a duplicate point was met.
    """
    n = xs.shape[0]
    cap = 4 * n + 64
    tri = np.full((cap, 3), -2, dtype=np.int64)
    nbr = np.full((cap, 3), -1, dtype=np.int64)
    alive = np.zeros(cap, dtype=np.bool_)
    if n < 3:
        return tri[:0], nbr[:0], alive[:0], 1

    # find a non-degenerate seed triangle
    i0 = order[0]
    i1 = order[1]
    k2 = -1
    for k in range(2, n):
        if orient2d(xs[i0], ys[i0], xs[i1], ys[i1], xs[order[k]], ys[order[k]]) != 0:
            k2 = k
            break
    if k2 < 0:
        return tri[:0], nbr[:0], alive[:0], 1
    i2 = order[k2]
    if orient2d(xs[i0], ys[i0], xs[i1], ys[i1], xs[i2], ys[i2]) < 0:
        i1, i2 = i2, i1
    seq = np.empty(n - 3, dtype=np.int64)
    m = 0
    for k in range(2, n):
        if k != k2:
            seq[m] = order[k]
            m += 1

    tri[0, 0], tri[0, 1], tri[0, 2] = i0, i1, i2
    tri[1, 0], tri[1, 1], tri[1, 2] = i1, i0, GHOST
    tri[2, 0], tri[2, 1], tri[2, 2] = i2, i1, GHOST
    tri[3, 0], tri[3, 1], tri[3, 2] = i0, i2, GHOST
    # real triangle: opposite i0 is edge (i1,i2) -> ghost 2, etc.
    nbr[0, 0], nbr[0, 1], nbr[0, 2] = 2, 3, 1
    # ghost (y, x, -1): opp y -> edge (x,-1); opp x -> edge (-1,y); opp -1 -> real
    nbr[1, 0], nbr[1, 1], nbr[1, 2] = 3, 2, 0
    nbr[2, 0], nbr[2, 1], nbr[2, 2] = 1, 3, 0
    nbr[3, 0], nbr[3, 1], nbr[3, 2] = 2, 1, 0
    alive[:4] = True
    n_used = 4

    free = np.empty(cap, dtype=np.int64)
    n_free = 0
    in_cav = np.zeros(cap, dtype=np.int64)
    tested = np.zeros(cap, dtype=np.int64)
    stack = np.empty(cap, dtype=np.int64)
    cav = np.empty(cap, dtype=np.int64)
    be_u = np.empty(cap, dtype=np.int64)
    be_v = np.empty(cap, dtype=np.int64)
    be_out = np.empty(cap, dtype=np.int64)
    be_from = np.empty(cap, dtype=np.int64)
    new_ids = np.empty(cap, dtype=np.int64)
    start_of = np.full(n + 1, -1, dtype=np.int64)
    end_of = np.full(n + 1, -1, dtype=np.int64)
    last = 0
    stamp = 0

    for s in range(seq.shape[0]):
        p = seq[s]
        px = xs[p]
        py = ys[p]
        stamp += 1
        t0 = _locate(tri, nbr, last, xs, ys, px, py)
        if t0 < 0 or not _conflict(tri, t0, xs, ys, px, py):
            # a walk ending in a non-conflicting triangle only happens for duplicates
            return tri[:n_used], nbr[:n_used], alive[:n_used], 2

        # grow the cavity
        n_cav = 0
        n_be = 0
        sp = 0
        stack[sp] = t0
        sp += 1
        in_cav[t0] = stamp
        while sp > 0:
            sp -= 1
            t = stack[sp]
            cav[n_cav] = t
            n_cav += 1
            for k in range(3):
                u = nbr[t, k]
                if in_cav[u] == stamp:
                    continue
                if tested[u] != stamp and _conflict(tri, u, xs, ys, px, py):
                    in_cav[u] = stamp
                    stack[sp] = u
                    sp += 1
                else:
                    tested[u] = stamp
                    be_u[n_be] = tri[t, (k + 1) % 3]
                    be_v[n_be] = tri[t, (k + 2) % 3]
                    be_out[n_be] = u
                    be_from[n_be] = t
                    n_be += 1

        # a boundary edge may have been recorded before its far side joined the cavity
        m = 0
        for e in range(n_be):
            if in_cav[be_out[e]] != stamp:
                be_u[m] = be_u[e]
                be_v[m] = be_v[e]
                be_out[m] = be_out[e]
                be_from[m] = be_from[e]
                m += 1
        n_be = m

        for e in range(n_be):
            if n_free > 0:
                n_free -= 1
                t = free[n_free]
            else:
                t = n_used
                n_used += 1
            new_ids[e] = t
            u = be_u[e]
            v = be_v[e]
            if u == GHOST:
                tri[t, 0], tri[t, 1], tri[t, 2] = v, p, GHOST
            elif v == GHOST:
                tri[t, 0], tri[t, 1], tri[t, 2] = p, u, GHOST
            else:
                tri[t, 0], tri[t, 1], tri[t, 2] = u, v, p
            alive[t] = True
            nbr[t, 0] = -1
            nbr[t, 1] = -1
            nbr[t, 2] = -1
            iu = n if u == GHOST else u
            iv = n if v == GHOST else v
            start_of[iu] = t
            end_of[iv] = t

        for e in range(n_be):
            t = new_ids[e]
            u = be_u[e]
            v = be_v[e]
            out = be_out[e]
            iu = n if u == GHOST else u
            iv = n if v == GHOST else v
            # across (u, v): the old outside triangle
            _set_nbr_by_opposite(tri, nbr, t, p, out)
            _replace_nbr(nbr, out, be_from[e], t)
            # across (v, p): new triangle whose boundary edge starts at v
            _set_nbr_by_opposite(tri, nbr, t, u, start_of[iv])
            # across (p, u): new triangle whose boundary edge ends at u
            _set_nbr_by_opposite(tri, nbr, t, v, end_of[iu])

        # cavity slots are recycled only after linking so ids stay unambiguous
        for c in range(n_cav):
            t = cav[c]
            alive[t] = False
            free[n_free] = t
            n_free += 1

        for e in range(n_be):
            u = be_u[e]
            v = be_v[e]
            start_of[n if u == GHOST else u] = -1
            end_of[n if v == GHOST else v] = -1
            if tri[new_ids[e], 2] != GHOST:
                last = new_ids[e]

    return tri[:n_used], nbr[:n_used], alive[:n_used], 0


@njit(cache=True)
def _lex_less(a0, a1, b0, b1):
    return a0 < b0 or (a0 == b0 and a1 < b1)


@njit(cache=True)
def cocircular_tiebreak(tri, nbr, alive, xs, ys):
    """Flip cocircular diagonals until each uses the lexicographically
    smallest sorted endpoint pair.  Returns the number of flips."""
    flips = 0
    changed = True
    while changed:
        changed = False
        for t in range(tri.shape[0]):
            if not alive[t] or tri[t, 2] == GHOST:
                continue
            for i in range(3):
                u = nbr[t, i]
                if u < 0 or tri[u, 2] == GHOST:
                    continue
                p = tri[t, i]
                a = tri[t, (i + 1) % 3]
                b = tri[t, (i + 2) % 3]
                j = 0
                for k in range(3):
                    if nbr[u, k] == t:
                        j = k
                w = tri[u, j]
                if incircle(xs[p], ys[p], xs[a], ys[a], xs[b], ys[b], xs[w], ys[w]) != 0:
                    continue
                c0, c1 = min(a, b), max(a, b)
                d0, d1 = min(p, w), max(p, w)
                if not _lex_less(d0, d1, c0, c1):
                    continue
                # flip (a, b) -> (p, w)
                ia_t = (i + 1) % 3
                ib_t = (i + 2) % 3
                ia_u = 0
                ib_u = 0
                for k in range(3):
                    if tri[u, k] == a:
                        ia_u = k
                    if tri[u, k] == b:
                        ib_u = k
                n_pa = nbr[t, ib_t]   # across (p, a)
                n_bp = nbr[t, ia_t]   # across (b, p)
                n_aw = nbr[u, ib_u]   # across (a, w)
                n_wb = nbr[u, ia_u]   # across (w, b)
                tri[t, 0], tri[t, 1], tri[t, 2] = p, a, w
                nbr[t, 0], nbr[t, 1], nbr[t, 2] = n_aw, u, n_pa
                tri[u, 0], tri[u, 1], tri[u, 2] = w, b, p
                nbr[u, 0], nbr[u, 1], nbr[u, 2] = n_bp, t, n_wb
                _replace_nbr(nbr, n_aw, u, t)
                _replace_nbr(nbr, n_bp, t, u)
                flips += 1
                changed = True
                break
    return flips


def hilbert_order(xs, ys, bits=16):
    """Indices sorting points along a Hilbert curve (spatially coherent insertion)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = xs.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    lo_x, lo_y = xs.min(), ys.min()
    span = max(xs.max() - lo_x, ys.max() - lo_y, 1e-300)
    side = (1 << bits) - 1
    x = np.minimum((xs - lo_x) / span * side, side).astype(np.int64)
    y = np.minimum((ys - lo_y) / span * side, side).astype(np.int64)
    d = np.zeros(n, dtype=np.int64)
    s = 1 << (bits - 1)
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        # rotate quadrant
        flip = ry == 0
        swap_r = flip & (rx == 1)
        x = np.where(swap_r, side - x, x)
        y = np.where(swap_r, side - y, y)
        x, y = np.where(flip, y, x), np.where(flip, x, y)
        s >>= 1
    return np.argsort(d, kind="stable").astype(np.int64)
