"""Vertex-star extraction from the triangle/neighbor arrays."""

import numpy as np

from ._jit import njit
from ._bowyer_watson import GHOST


@njit(cache=True)
def vertex_stars(tri, nbr, alive, n):
    """Counterclockwise incident triangles of each vertex.

    Returns ``(indptr, star, closed)``.  Vertices whose star meets a ghost
    triangle (hull vertices) get ``closed = False`` and an empty star.
    """
    first_t = np.full(n, -1, dtype=np.int64)
    first_i = np.zeros(n, dtype=np.int64)
    for t in range(tri.shape[0]):
        if not alive[t] or tri[t, 2] == GHOST:
            continue
        for i in range(3):
            v = tri[t, i]
            if first_t[v] < 0:
                first_t[v] = t
                first_i[v] = i
    counts = np.zeros(n, dtype=np.int64)
    closed = np.zeros(n, dtype=np.bool_)
    for v in range(n):
        t = first_t[v]
        if t < 0:
            continue
        i = first_i[v]
        c = 0
        ok = True
        while True:
            c += 1
            u = nbr[t, (i + 1) % 3]
            if tri[u, 2] == GHOST:
                ok = False
                break
            if u == first_t[v]:
                break
            t = u
            for k in range(3):
                if tri[t, k] == v:
                    i = k
            if c > n + 3:
                ok = False
                break
        if ok:
            closed[v] = True
            counts[v] = c
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + counts[v]
    star = np.empty(indptr[n], dtype=np.int64)
    for v in range(n):
        if not closed[v]:
            continue
        t = first_t[v]
        i = first_i[v]
        pos = indptr[v]
        for _ in range(counts[v]):
            star[pos] = t
            pos += 1
            t = nbr[t, (i + 1) % 3]
            for k in range(3):
                if tri[t, k] == v:
                    i = k
    return indptr, star, closed
