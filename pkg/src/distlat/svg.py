"""SVG rendering of Poincare-disk samples and their tessellations."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .geometry import HYP
from .tess import EmbeddedNetwork, _voronoi_vertices

PANEL = 520.0
RADIUS = 240.0


@dataclass
class Panel:
    title: str
    net: EmbeddedNetwork
    meta: dict = field(default_factory=dict)


def _xy(p, ox: float) -> tuple[float, float]:
    # chart y points up, screen y points down
    return ox + PANEL / 2 + RADIUS * float(p[0]), PANEL / 2 - RADIUS * float(p[1])


def _geodesic_path(p, q, ox: float) -> str:
    """Path data for the geodesic from p to q (chart coordinates)."""
    x1, y1 = _xy(p, ox)
    x2, y2 = _xy(q, ox)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    cross = p[0] * q[1] - p[1] * q[0]
    if abs(cross) < 1e-12 * max(1.0, float(p @ p + q @ q)):
        return f"M{x1:.2f},{y1:.2f}L{x2:.2f},{y2:.2f}"
    # circle through p, q orthogonal to the unit circle: c.p = (|p|^2 + 1)/2, same for q
    a = np.array([p, q])
    c = np.linalg.solve(a, 0.5 * np.array([p @ p + 1.0, q @ q + 1.0]))
    r = math.sqrt(max(c @ c - 1.0, 0.0)) * RADIUS
    cx, cy = _xy(c, ox)
    turn = (x1 - cx) * (y2 - cy) - (y1 - cy) * (x2 - cx)
    sweep = 1 if turn > 0 else 0
    return f"M{x1:.2f},{y1:.2f}A{r:.2f},{r:.2f} 0 0 {sweep} {x2:.2f},{y2:.2f}"


def voronoi_walls(net: EmbeddedNetwork) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairs of metric Voronoi vertices joined by a wall, each wall once."""
    if net.star is None or len(net.triangles) == 0:
        return []
    vv = _voronoi_vertices(net)
    ok = net.tri_valid if net.space is HYP else np.ones(len(net.triangles), dtype=bool)
    seen = set()
    out = []
    for v in range(net.n_vertices):
        if not net.star_closed[v]:
            continue
        ring = net.star[net.star_indptr[v]:net.star_indptr[v + 1]]
        for i in range(len(ring)):
            a, b = int(ring[i]), int(ring[(i + 1) % len(ring)])
            key = (min(a, b), max(a, b))
            if a == b or key in seen or not (ok[a] and ok[b]):
                continue
            seen.add(key)
            out.append((vv[a], vv[b]))
    return out


def render(panels: list[Panel]) -> str:
    width = PANEL * len(panels)
    meta = [dict(p.meta, title=p.title, count=int(p.net.n_vertices)) for p in panels]
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{PANEL + 30:.0f}" '
        f'viewBox="0 0 {width:.0f} {PANEL + 30:.0f}">',
        f"<metadata>{escape(json.dumps(meta, sort_keys=True))}</metadata>",
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for k, panel in enumerate(panels):
        ox = k * PANEL
        net = panel.net
        parts.append(f'<g id="panel-{k}" data-count="{net.n_vertices}">')
        parts.append(f'<circle cx="{ox + PANEL / 2:.2f}" cy="{PANEL / 2:.2f}" r="{RADIUS:.2f}" '
                     'fill="none" stroke="black" stroke-width="1"/>')
        walls = "".join(_geodesic_path(a, b, ox) for a, b in voronoi_walls(net))
        if walls:
            parts.append(f'<path class="voronoi" d="{walls}" fill="none" stroke="#3070b0" stroke-width="0.4"/>')
        edges = "".join(_geodesic_path(net.points[a], net.points[b], ox) for a, b in net.edges)
        if edges:
            parts.append(f'<path class="delaunay" d="{edges}" fill="none" stroke="#b04030" stroke-width="0.3"/>')
        for p in net.points:
            x, y = _xy(p, ox)
            parts.append(f'<circle class="site" cx="{x:.2f}" cy="{y:.2f}" r="1.2" fill="black"/>')
        parts.append(f'<text x="{ox + PANEL / 2:.2f}" y="{PANEL + 20:.0f}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{escape(panel.title)}</text>')
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
