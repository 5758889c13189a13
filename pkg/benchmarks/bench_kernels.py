"""Time the numba kernels against the plain-Python fallback.

Each path runs in its own interpreter (the switch is read at import), on the
same inputs, and the script checks that both produce identical results.

    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time


def _timed(fn, repeat):
    fn()  # warm-up (compilation for the numba path)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def worker(quick: bool) -> dict:
    import numpy as np

    from distlat._jit import HAVE_NUMBA
    from distlat.pointproc import kac_coefficients, poly_roots, sample_palm_poisson
    from distlat.tess import delaunay, root_cell
    from distlat.walk import srw

    n_pts = 2.0 if quick else 4.0
    euc = sample_palm_poisson("euclidean", 1.0, 12.0 if quick else 25.0, 1)
    hyp = sample_palm_poisson("hyperbolic", 1.0, n_pts + 2.0, 2)
    coeffs = kac_coefficients(60 if quick else 200, 3)
    net = delaunay(euc)
    steps = 2000 if quick else 20000

    def digest(*arrays):
        h = hashlib.sha256()
        for a in arrays:
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()[:16]

    res = {"numba": HAVE_NUMBA}
    t, d = _timed(lambda: delaunay(euc), 3)
    res["delaunay_euclidean"] = (t, digest(d.edges), d.n_vertices)
    t, d = _timed(lambda: delaunay(hyp), 3)
    res["delaunay_hyperbolic"] = (t, digest(d.edges), d.n_vertices)
    t, c = _timed(lambda: root_cell("hyperbolic", hyp.points, hyp.window_radius, root=hyp.root), 3)
    res["origin_cell"] = (t, digest(c[0], c[1]), len(c[1]))
    t, z = _timed(lambda: np.sort_complex(poly_roots(coeffs)), 3)
    res["aberth_roots"] = (t, digest(np.round(z, 9)), len(z))
    t, w = _timed(lambda: srw(net, net.root, steps, 4), 3)
    res["walk_kernel"] = (t, digest(w.vertex_ids), w.length)
    return res


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--quick", action="store_true", help="small inputs")
    p.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = p.parse_args()
    if args.worker:
        print(json.dumps(worker(args.quick)))
        return 0
    runs = {}
    for label, flag in (("numba", "0"), ("python", "1")):
        env = dict(os.environ, DISTLAT_DISABLE_NUMBA=flag)
        cmd = [sys.executable, __file__, "--worker"] + (["--quick"] if args.quick else [])
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        runs[label] = json.loads(out.stdout.strip().splitlines()[-1])
    if not runs["numba"]["numba"]:
        print("numba is not importable; both columns use the fallback")
    print(f"{'kernel':22s} {'size':>7s} {'numba s':>10s} {'python s':>10s} {'speedup':>8s}  same")
    ok = True
    for key in runs["numba"]:
        if key == "numba":
            continue
        tn, hn, size = runs["numba"][key]
        tp, hp, _ = runs["python"][key]
        ok &= hn == hp
        print(f"{key:22s} {size:7d} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f}  {'yes' if hn == hp else 'NO'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
