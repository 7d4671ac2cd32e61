"""Recovery of a simple polygon from a self-intersecting boundary.

``repair_to_simple`` computes the planar arrangement induced by the
polygon's edges (crossings become nodes, edges get split), walks its
faces, and keeps the bounded face of greatest area.  Inputs that are
already simple pass through untouched apart from orientation.

Intended for boundaries whose self-overlap is an artifact of coarse
sampling: resampling a curve with sub-sample-width features can fold
the polyline locally, and dropping everything but the dominant face
seals those folds.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import (
    DEFAULT_GEOM_TOL,
    Polygon,
    PolygonError,
    is_simple,
    point_segment_distance,
    polygon_scale,
    signed_area,
)

__all__ = ["DegenerateFaceError", "face_walks", "repair_to_simple"]


def face_walks(pts: np.ndarray, edges) -> list[list[int]]:
    """Boundary walks of every face of a plane graph, one per face.

    ``edges`` lists undirected node pairs; coordinates come from ``pts``.
    Uses the rotation system induced by the embedding: the dart after
    (u, w) is the clockwise predecessor of the reversed dart around w.
    Bounded faces come out counterclockwise, the outer face clockwise; a
    face whose closure pinches at a node repeats that node in its walk.
    """
    outgoing: dict[int, list[int]] = {}
    for u, w in edges:
        outgoing.setdefault(u, []).append(w)
        outgoing.setdefault(w, []).append(u)
    order: dict[int, dict[int, int]] = {}
    for u, targets in outgoing.items():
        ang = np.arctan2(pts[targets, 1] - pts[u, 1], pts[targets, 0] - pts[u, 0])
        targets[:] = [targets[k] for k in np.argsort(ang)]
        order[u] = {w: k for k, w in enumerate(targets)}

    walks: list[list[int]] = []
    seen: set[tuple[int, int]] = set()
    for e in sorted(tuple(sorted(e)) for e in edges):
        for dart in (e, e[::-1]):
            if dart in seen:
                continue
            walk = []
            u, w = dart
            while (u, w) not in seen:
                seen.add((u, w))
                walk.append(u)
                ring = outgoing[w]
                u, w = w, ring[order[w][u] - 1]
            walks.append(walk)
    return walks


class DegenerateFaceError(PolygonError):
    """The arrangement has no usable bounded face."""


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # lower id wins so original vertices beat crossing points
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


def _candidate_edge_pairs(a: np.ndarray, b: np.ndarray, pad: float) -> np.ndarray:
    xmin = np.minimum(a[:, 0], b[:, 0]) - pad
    xmax = np.maximum(a[:, 0], b[:, 0]) + pad
    ymin = np.minimum(a[:, 1], b[:, 1]) - pad
    ymax = np.maximum(a[:, 1], b[:, 1]) + pad
    overlap = (
        (xmin[:, None] <= xmax[None, :])
        & (xmin[None, :] <= xmax[:, None])
        & (ymin[:, None] <= ymax[None, :])
        & (ymin[None, :] <= ymax[:, None])
    )
    ii, jj = np.nonzero(np.triu(overlap, k=1))
    return np.column_stack([ii, jj])


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _project_param(q, a, b) -> float:
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return 0.0
    return min(1.0, max(0.0, float((q - a) @ d) / dd))


def _simple_loops(nodes: list[int]) -> list[list[int]]:
    """Split a closed node walk at repeated nodes into simple loops."""
    loops = []
    stack: list[int] = []
    pos: dict[int, int] = {}
    for node in nodes + nodes[:1]:
        if node in pos:
            start = pos[node]
            loop = stack[start:]
            if len(loop) >= 3:
                loops.append(loop)
            for dropped in loop:
                if dropped in pos and pos[dropped] >= start:
                    del pos[dropped]
            del stack[start:]
        pos[node] = len(stack)
        stack.append(node)
    if len(stack) > 3:
        loops.append(stack[:-1])
    return loops


def _loop_area(coords: np.ndarray, loop: list[int]) -> float:
    v = coords[loop]
    w = np.roll(v, -1, axis=0)
    return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def repair_to_simple(p: Polygon, geom_tol: float = DEFAULT_GEOM_TOL) -> Polygon:
    """Largest bounded face of the polygon's self-arrangement, oriented CCW.

    Already-simple input is returned as-is (reversed if clockwise).  A face
    whose boundary pinches at a node cannot be a simple polygon, so its
    enclosed slivers are filled: the result is the largest simple loop
    traced by the face walks, which always covers the largest face.  Raises
    :class:`DegenerateFaceError` when every bounded face is thinner than
    geom_tol * scale**2 or fails the simplicity test after snapping.
    """
    if is_simple(p, geom_tol):
        return p if signed_area(p) > 0.0 else Polygon(p.vertices[::-1])

    n = p.n
    scale = polygon_scale(p)
    snap = geom_tol * scale
    v = p.vertices
    a = v
    b = np.roll(v, -1, axis=0)

    coords = [tuple(pt) for pt in v]
    splits: dict[int, list[tuple[float, int]]] = {k: [] for k in range(n)}

    def add_point(pt) -> int:
        coords.append((float(pt[0]), float(pt[1])))
        return len(coords) - 1

    for i, j in _candidate_edge_pairs(a, b, snap):
        ai, bi = a[i], b[i]
        aj, bj = a[j], b[j]
        d1 = _orient(aj, bj, ai)
        d2 = _orient(aj, bj, bi)
        d3 = _orient(ai, bi, aj)
        d4 = _orient(ai, bi, bj)
        if (d1 > 0.0) != (d2 > 0.0) and d1 != d2 and (d3 > 0.0) != (d4 > 0.0) and d3 != d4:
            t = d1 / (d1 - d2)
            if 0.0 < t < 1.0:
                x = ai + t * (bi - ai)
                pid = add_point(x)
                splits[i].append((t, pid))
                splits[j].append((d3 / (d3 - d4), pid))
                continue
        # T-junctions and near-touches: an endpoint lying on the other edge
        for q, qid in ((aj, j), (bj, (j + 1) % n)):
            if point_segment_distance(q, ai, bi) <= snap:
                splits[i].append((_project_param(q, ai, bi), qid))
        for q, qid in ((ai, i), (bi, (i + 1) % n)):
            if point_segment_distance(q, aj, bj) <= snap:
                splits[j].append((_project_param(q, aj, bj), qid))

    pts = np.array(coords)
    m = len(pts)

    # Snap-round: cluster points within snap distance; lowest id represents.
    uf = _UnionFind(m)
    if snap > 0.0 and m > 1:
        cell = {}
        inv = 1.0 / snap
        keys = np.floor(pts * inv).astype(np.int64)
        for pid, key in enumerate(map(tuple, keys)):
            cell.setdefault(key, []).append(pid)
        for (cx, cy), members in cell.items():
            neighbors = []
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    neighbors.extend(cell.get((cx + dx, cy + dy), ()))
            for pid in members:
                pq = pts[pid]
                for other in neighbors:
                    if other > pid and np.hypot(*(pts[other] - pq)) <= snap:
                        uf.union(pid, other)
    rep = np.array([uf.find(k) for k in range(m)])

    # Split every original edge at its recorded points, snapped.
    edges: set[frozenset[int]] = set()
    for k in range(n):
        stations = [(0.0, int(rep[k])), (1.0, int(rep[(k + 1) % n]))]
        stations += [(t, int(rep[pid])) for t, pid in splits[k]]
        stations.sort(key=lambda s: s[0])
        for (_, u), (_, w) in zip(stations, stations[1:]):
            if u != w:
                edges.add(frozenset((u, w)))

    if not edges:
        raise DegenerateFaceError("arrangement collapsed to nothing")

    candidates: list[tuple[float, int, list[int]]] = []
    for walk in face_walks(pts, [tuple(e) for e in edges]):
        for loop in _simple_loops(walk):
            area = _loop_area(pts, loop)
            if area > 0.0:
                candidates.append((area, min(loop), loop))

    if not candidates:
        raise DegenerateFaceError("no bounded face with positive area")

    # Greatest area wins; exact ties go to the face holding the lowest node
    # id, so symmetric arrangements resolve deterministically.
    candidates.sort(key=lambda c: (-c[0], c[1]))
    min_area = geom_tol * scale * scale
    for area, _, loop in candidates:
        if area <= min_area:
            break
        out = Polygon(pts[loop])
        if is_simple(out, geom_tol):
            return out if signed_area(out) > 0.0 else Polygon(out.vertices[::-1])
    raise DegenerateFaceError(
        f"no face exceeds area {min_area:.3g} and passes the simplicity test"
    )
