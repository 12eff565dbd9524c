"""Distance-sphere contour extraction on 2-d fields (marching squares).

Contours of the bilinear node interpolant at iso-value r. Vertices lie on
grid edges, where the interpolant is linear, so every emitted vertex
satisfies the iso-value equation to rounding error. Chains are oriented so
the region {f < r} lies on the left; saddle cells are resolved by the
interpolated cell-center value. Output is nonempty iff min f < r <= max f
over the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedDimensionError
from .field import DistanceField

# corner bits: A=(0,0)->1, B=(1,0)->2, C=(1,1)->4, D=(0,1)->8
# edges per cell: b=bottom, r=right, t=top, l=left
_SEGMENTS = {
    1: (("b", "l"),),
    2: (("r", "b"),),
    3: (("r", "l"),),
    4: (("t", "r"),),
    6: (("t", "b"),),
    7: (("t", "l"),),
    8: (("l", "t"),),
    9: (("b", "t"),),
    11: (("r", "t"),),
    12: (("l", "r"),),
    13: (("b", "r"),),
    14: (("l", "b"),),
}
_SADDLE_5 = {True: (("b", "r"), ("t", "l")), False: (("b", "l"), ("t", "r"))}
_SADDLE_10 = {True: (("l", "b"), ("r", "t")), False: (("r", "b"), ("l", "t"))}


@dataclass(frozen=True)
class SpherePolylines:
    """Contour chains of one distance sphere."""

    radius: float
    chains: tuple[np.ndarray, ...]  # each (k, 2) vertex array
    closed: tuple[bool, ...]

    def lengths(self) -> list[float]:
        out = []
        for verts, closed in zip(self.chains, self.closed):
            seg = np.diff(verts, axis=0)
            total = float(np.sqrt((seg**2).sum(axis=1)).sum())
            if closed and len(verts) > 1:
                total += float(np.linalg.norm(verts[0] - verts[-1]))
            out.append(total)
        return out

    def total_length(self) -> float:
        return float(sum(self.lengths()))


def _cell_edges(cx: int, cy: int) -> dict[str, tuple[str, int, int]]:
    return {
        "b": ("H", cx, cy),
        "t": ("H", cx, cy + 1),
        "l": ("V", cx, cy),
        "r": ("V", cx + 1, cy),
    }


def extract_sphere(field: DistanceField, r: float) -> SpherePolylines:
    """Marching-squares contour of the node interpolant at iso-value r."""
    if field.d != 2:
        raise UnsupportedDimensionError("sphere extraction requires d = 2")
    if r < 0:
        raise DomainError("radius must be nonnegative")
    v = field.values
    h = field.h
    inside = v < r

    a = inside[:-1, :-1]
    b = inside[1:, :-1]
    c = inside[1:, 1:]
    d = inside[:-1, 1:]
    case = a * 1 + b * 2 + c * 4 + d * 8
    active = np.argwhere((case != 0) & (case != 15))

    # one crossing point per edge, keyed by edge id
    points: dict[tuple[str, int, int], tuple[float, float]] = {}

    def edge_point(edge):
        pt = points.get(edge)
        if pt is None:
            kind, ix, iy = edge
            if kind == "H":
                va, vb = v[ix, iy], v[ix + 1, iy]
                t = (r - va) / (vb - va)
                pt = ((ix + t) * h, iy * h)
            else:
                va, vb = v[ix, iy], v[ix, iy + 1]
                t = (r - va) / (vb - va)
                pt = (ix * h, (iy + t) * h)
            points[edge] = pt
        return pt

    next_edge: dict[tuple, tuple] = {}
    has_incoming: set[tuple] = set()
    for cx, cy in active:
        k = int(case[cx, cy])
        if k == 5:
            center = (v[cx, cy] + v[cx + 1, cy] + v[cx + 1, cy + 1] + v[cx, cy + 1]) / 4.0
            segs = _SADDLE_5[bool(center < r)]
        elif k == 10:
            center = (v[cx, cy] + v[cx + 1, cy] + v[cx + 1, cy + 1] + v[cx, cy + 1]) / 4.0
            segs = _SADDLE_10[bool(center < r)]
        else:
            segs = _SEGMENTS[k]
        edges = _cell_edges(int(cx), int(cy))
        for frm, to in segs:
            e1, e2 = edges[frm], edges[to]
            next_edge[e1] = e2
            has_incoming.add(e2)

    chains: list[np.ndarray] = []
    closed: list[bool] = []
    visited: set[tuple] = set()

    # open chains start on edges with no incoming segment (domain boundary)
    for start in sorted(e for e in next_edge if e not in has_incoming):
        walk = [start]
        e = start
        while e in next_edge:
            e = next_edge[e]
            walk.append(e)
        visited.update(walk)
        chains.append(np.array([edge_point(e) for e in walk]))
        closed.append(False)

    # remaining segments form closed loops
    for start in sorted(e for e in next_edge if e not in visited):
        if start in visited:
            continue
        walk = [start]
        e = next_edge[start]
        while e != start:
            walk.append(e)
            e = next_edge[e]
        visited.update(walk)
        chains.append(np.array([edge_point(e) for e in walk]))
        closed.append(True)

    return SpherePolylines(radius=float(r), chains=tuple(chains), closed=tuple(closed))


def iso_residuals(field: DistanceField, poly: SpherePolylines) -> float:
    """Max |interpolated f(vertex) - r| over all chain vertices (bilinear interpolation)."""
    worst = 0.0
    n = field.nodes_per_axis
    h = field.h
    for verts in poly.chains:
        if len(verts) == 0:
            continue
        gx = np.clip(verts[:, 0] / h, 0, n - 1 - 1e-12)
        gy = np.clip(verts[:, 1] / h, 0, n - 1 - 1e-12)
        ix = np.minimum(gx.astype(int), n - 2)
        iy = np.minimum(gy.astype(int), n - 2)
        fx = gx - ix
        fy = gy - iy
        v = field.values
        val = (
            v[ix, iy] * (1 - fx) * (1 - fy)
            + v[ix + 1, iy] * fx * (1 - fy)
            + v[ix, iy + 1] * (1 - fx) * fy
            + v[ix + 1, iy + 1] * fx * fy
        )
        worst = max(worst, float(np.abs(val - poly.radius).max()))
    return worst
