"""Aberth-Ehrlich simultaneous root iteration."""

import math

import numpy as np

from ._jit import njit


@njit(cache=True)
def _newton_ratio(a, z):
    """Return (p(z)/p'(z), backward error) for coefficients a[0..n] (a[k] * z^k).

    Evaluates the reversed polynomial outside the unit circle so nothing
    overflows at high degree.
    """
    n = a.shape[0] - 1
    az = abs(z)
    if az <= 1.0:
        p = a[n]
        dp = 0.0 + 0.0j
        s = abs(a[n])
        for k in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + a[k]
            s = s * az + abs(a[k])
        if dp == 0.0:
            return complex(np.inf), abs(p) / s
        return p / dp, abs(p) / s
    w = 1.0 / z
    aw = abs(w)
    q = a[0]
    dq = 0.0 + 0.0j
    s = abs(a[0])
    for k in range(1, n + 1):
        dq = dq * w + q
        q = q * w + a[k]
        s = s * aw + abs(a[k])
    # p'/p = w (n - w q'/q)
    if q == 0.0:
        return 0.0 + 0.0j, 0.0
    denom = w * (n - w * dq / q)
    if denom == 0.0:
        return complex(np.inf), abs(q) / s
    return 1.0 / denom, abs(q) / s


@njit(cache=True)
def _initial_guesses(a, offset):
    """Points on circles whose radii come from the Newton polygon of log|a_k|."""
    n = a.shape[0] - 1
    logs = np.empty(n + 1)
    for k in range(n + 1):
        m = abs(a[k])
        logs[k] = math.log(m) if m > 0.0 else -np.inf
    # upper convex hull of (k, log|a_k|)
    hull = np.empty(n + 1, dtype=np.int64)
    h = 0
    for k in range(n + 1):
        if logs[k] == -np.inf:
            continue
        while h >= 2:
            i, j = hull[h - 2], hull[h - 1]
            # drop j if it lies on or below the chord i -> k
            if (logs[j] - logs[i]) * (k - i) <= (logs[k] - logs[i]) * (j - i):
                h -= 1
            else:
                break
        hull[h] = k
        h += 1
    z = np.empty(n, dtype=np.complex128)
    pos = 0
    for s in range(h - 1):
        i, j = hull[s], hull[s + 1]
        m = j - i
        r = math.exp((logs[i] - logs[j]) / m)
        for t in range(m):
            ang = 2.0 * math.pi * t / m + 2.0 * math.pi * s / n + offset
            z[pos] = r * complex(math.cos(ang), math.sin(ang))
            pos += 1
    return z


@njit(cache=True)
def aberth(a, max_iter, tol):
    """Roots of sum a[k] z^k (a[n] != 0, a[0] != 0).

    Returns ``(roots, backward_errors, iterations)``.
    """
    n = a.shape[0] - 1
    z = _initial_guesses(a, 0.4)
    done = np.zeros(n, dtype=np.bool_)
    berr = np.full(n, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        n_done = 0
        for i in range(n):
            if done[i]:
                n_done += 1
                continue
            ratio, be = _newton_ratio(a, z[i])
            berr[i] = be
            if be <= tol * 1e-2:
                done[i] = True
                n_done += 1
                continue
            acc = 0.0 + 0.0j
            for j in range(n):
                if j != i:
                    acc += 1.0 / (z[i] - z[j])
            step = ratio / (1.0 - ratio * acc)
            z[i] = z[i] - step
            if abs(step) <= 4e-16 * abs(z[i]):
                done[i] = True
        if n_done == n:
            break
    # two polishing sweeps on every root
    for _ in range(2):
        for i in range(n):
            ratio, be = _newton_ratio(a, z[i])
            if be == 0.0:
                continue
            acc = 0.0 + 0.0j
            for j in range(n):
                if j != i:
                    acc += 1.0 / (z[i] - z[j])
            cand = z[i] - ratio / (1.0 - ratio * acc)
            _, be2 = _newton_ratio(a, cand)
            if be2 <= be:
                z[i] = cand
    for i in range(n):
        _, berr[i] = _newton_ratio(a, z[i])
    return z, berr, it
