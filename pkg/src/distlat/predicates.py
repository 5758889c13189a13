"""Adaptive orientation and in-circle predicates.

A floating-point filter answers almost every query; when the rounding
error bound cannot certify the sign the determinant is re-evaluated with
floating-point expansions (exact sums of doubles), so the returned sign
is always the sign of the exact determinant of the input doubles.
"""

import numpy as np

from ._jit import njit

_EPS = np.finfo(np.float64).eps / 2.0
_SPLITTER = 134217729.0  # 2^27 + 1
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


@njit(cache=True)
def _two_sum(a, b):
    x = a + b
    bv = x - a
    av = x - bv
    return x, (a - av) + (b - bv)


@njit(cache=True)
def _split(a):
    c = _SPLITTER * a
    big = c - a
    hi = c - big
    return hi, a - hi


@njit(cache=True)
def _two_product(a, b):
    x = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = x - ahi * bhi - alo * bhi - ahi * blo
    return x, alo * blo - err


@njit(cache=True)
def _grow(e, b):
    out = np.empty(e.shape[0] + 1)
    n = 0
    q = b
    for i in range(e.shape[0]):
        q, h = _two_sum(q, e[i])
        if h != 0.0:
            out[n] = h
            n += 1
    if q != 0.0 or n == 0:
        out[n] = q
        n += 1
    return out[:n]


@njit(cache=True)
def _exp_sum(e, f):
    h = e.copy()
    for i in range(f.shape[0]):
        h = _grow(h, f[i])
    return h


@njit(cache=True)
def _scale(e, b):
    out = np.empty(2 * e.shape[0])
    n = 0
    q, h = _two_product(e[0], b)
    if h != 0.0:
        out[n] = h
        n += 1
    for i in range(1, e.shape[0]):
        p1, p0 = _two_product(e[i], b)
        s, h = _two_sum(q, p0)
        if h != 0.0:
            out[n] = h
            n += 1
        q, h = _two_sum(p1, s)
        if h != 0.0:
            out[n] = h
            n += 1
    if q != 0.0 or n == 0:
        out[n] = q
        n += 1
    return out[:n]


@njit(cache=True)
def _exp_mul(e, f):
    acc = _scale(e, f[0])
    for i in range(1, f.shape[0]):
        acc = _exp_sum(acc, _scale(e, f[i]))
    return acc


@njit(cache=True)
def _diff(a, b):
    x, y = _two_sum(a, -b)
    out = np.empty(2)
    out[0] = y
    out[1] = x
    return out


@njit(cache=True)
def _neg(e):
    return -e


@njit(cache=True)
def _sign(e):
    for i in range(e.shape[0] - 1, -1, -1):
        if e[i] > 0.0:
            return 1
        if e[i] < 0.0:
            return -1
    return 0


@njit(cache=True)
def orient2d_exact(ax, ay, bx, by, cx, cy):
    acx = _diff(ax, cx)
    acy = _diff(ay, cy)
    bcx = _diff(bx, cx)
    bcy = _diff(by, cy)
    left = _exp_mul(acx, bcy)
    right = _exp_mul(acy, bcx)
    return _sign(_exp_sum(left, _neg(right)))


@njit(cache=True)
def orient2d(ax, ay, bx, by, cx, cy):
    """Sign of det[[ax-cx, ay-cy], [bx-cx, by-cy]]: +1 if a, b, c turn left."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) > _CCW_BOUND * detsum:
        return 1 if det > 0.0 else -1
    return orient2d_exact(ax, ay, bx, by, cx, cy)


@njit(cache=True)
def incircle_exact(ax, ay, bx, by, cx, cy, dx, dy):
    adx = _diff(ax, dx)
    ady = _diff(ay, dy)
    bdx = _diff(bx, dx)
    bdy = _diff(by, dy)
    cdx = _diff(cx, dx)
    cdy = _diff(cy, dy)
    alift = _exp_sum(_exp_mul(adx, adx), _exp_mul(ady, ady))
    blift = _exp_sum(_exp_mul(bdx, bdx), _exp_mul(bdy, bdy))
    clift = _exp_sum(_exp_mul(cdx, cdx), _exp_mul(cdy, cdy))
    bc = _exp_sum(_exp_mul(bdx, cdy), _neg(_exp_mul(cdx, bdy)))
    ca = _exp_sum(_exp_mul(cdx, ady), _neg(_exp_mul(adx, cdy)))
    ab = _exp_sum(_exp_mul(adx, bdy), _neg(_exp_mul(bdx, ady)))
    det = _exp_sum(_exp_mul(alift, bc), _exp_mul(blift, ca))
    det = _exp_sum(det, _exp_mul(clift, ab))
    return _sign(det)


@njit(cache=True)
def incircle(ax, ay, bx, by, cx, cy, dx, dy):
    """+1 if d lies strictly inside the circle through counterclockwise a, b, c;
    -1 if outside; 0 if cocircular."""
    adx = ax - dx
    bdx = bx - dx
    cdx = cx - dx
    ady = ay - dy
    bdy = by - dy
    cdy = cy - dy
    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady
    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    if abs(det) > _ICC_BOUND * permanent:
        return 1 if det > 0.0 else -1
    return incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)
