"""Planar polygon primitives: predicates, pair distances, and the expansion order.

Coordinates are float64 throughout.  Tolerances named ``geom_tol`` are
relative: predicates scale them by a local feature size (the bounding box
diagonal for distance tests, edge-length products for turning tests), so a
single knob behaves sensibly across polygon scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_GEOM_TOL",
    "Polygon",
    "PolygonError",
    "ToleranceProfile",
    "WindingError",
    "cumulative_arclength",
    "dominates",
    "edge_lengths",
    "edge_vectors",
    "interdistance_functional",
    "is_convex",
    "is_simple",
    "pair_arc_lengths",
    "pair_indices",
    "pairwise_distances",
    "perimeter",
    "point_segment_distance",
    "polygon_scale",
    "rot90",
    "segment_distance",
    "signed_area",
    "turning_angles",
]

DEFAULT_GEOM_TOL = 1e-9


class PolygonError(ValueError):
    """Vertex data violates the closed-polygon invariants."""


class WindingError(ValueError):
    """Turn signs are uniform but the boundary winds more than once.

    Raised by :func:`is_convex` so that multiply-wound (hence non-simple)
    input is reported as a distinct failure instead of a false positive.
    """


@dataclass(frozen=True)
class ToleranceProfile:
    """Residual thresholds shared across the pipeline.

    eq_tol      equality-row residuals (bar rows, pin rows, stress loads)
    strut_tol   inequality slack; also the blocked-decision threshold
    length_tol  allowed edge-length drift along a trajectory
    geom_tol    relative tolerance for geometric predicates and snapping
    """

    eq_tol: float = 1e-8
    strut_tol: float = 1e-9
    length_tol: float = 1e-7
    geom_tol: float = DEFAULT_GEOM_TOL

    def __post_init__(self):
        for name in ("eq_tol", "strut_tol", "length_tol", "geom_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class Polygon:
    """Closed planar polyline: vertex ``n - 1`` connects back to vertex 0.

    Vertices are stored as a read-only float64 array of shape (n, 2) with
    n >= 3, finite coordinates, and nonzero edge lengths.  Vertex indices
    are cyclic modulo n everywhere in this package.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[1] != 2:
            raise PolygonError(f"vertices must form an (n, 2) array, got shape {v.shape}")
        if v.shape[0] < 3:
            raise PolygonError(f"a polygon needs at least 3 vertices, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise PolygonError("vertex coordinates must be finite")
        if np.min(np.hypot(*(np.roll(v, -1, axis=0) - v).T)) == 0.0:
            raise PolygonError("consecutive vertices must be distinct")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Polygon(n={self.n})"


def rot90(v: np.ndarray) -> np.ndarray:
    """Counterclockwise quarter turn: (x, y) -> (-y, x).  Works on (..., 2)."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def edge_vectors(p: Polygon) -> np.ndarray:
    return np.roll(p.vertices, -1, axis=0) - p.vertices


def edge_lengths(p: Polygon) -> np.ndarray:
    """Length of edge k = (k, k+1 mod n), for k = 0 .. n-1."""
    e = edge_vectors(p)
    return np.hypot(e[:, 0], e[:, 1])


def perimeter(p: Polygon) -> float:
    return float(edge_lengths(p).sum())


def cumulative_arclength(p: Polygon) -> np.ndarray:
    """Boundary arc length from vertex 0 to vertex k; entry n is the perimeter."""
    out = np.zeros(p.n + 1)
    np.cumsum(edge_lengths(p), out=out[1:])
    return out


def signed_area(p: Polygon) -> float:
    v = p.vertices
    w = np.roll(v, -1, axis=0)
    return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def polygon_scale(p: Polygon) -> float:
    """Bounding box diagonal, the reference length for relative tolerances."""
    v = p.vertices
    ext = v.max(axis=0) - v.min(axis=0)
    return max(float(np.hypot(ext[0], ext[1])), 1e-300)


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (ii, jj) enumerating all vertex pairs with i < j."""
    ii, jj = np.triu_indices(n, k=1)
    return ii.astype(np.intp), jj.astype(np.intp)


def pairwise_distances(p: Polygon) -> np.ndarray:
    """Full symmetric (n, n) matrix of vertex distances."""
    v = p.vertices
    d = v[:, None, :] - v[None, :, :]
    return np.hypot(d[..., 0], d[..., 1])


def pair_arc_lengths(p: Polygon) -> np.ndarray:
    """(n, n) matrix of shorter-side boundary arc length between vertex pairs."""
    cum = cumulative_arclength(p)
    fwd = np.abs(cum[:p.n, None] - cum[None, :p.n])
    return np.minimum(fwd, cum[p.n] - fwd)


def interdistance_functional(p: Polygon) -> float:
    """Sum of |p_i - p_j| over unordered vertex pairs.

    Strictly monotone under the expansion order: if q dominates p and some
    pair distance strictly grows, the value strictly grows.
    """
    d = pairwise_distances(p)
    return float(np.sum(d[np.triu_indices(p.n, k=1)]))


def dominates(p: Polygon, q: Polygon, slack: float = 0.0) -> bool:
    """True when every pair distance of ``q`` is >= the one in ``p`` minus ``slack``.

    This is the partial order "q is an expansion of p".  Polygons must have
    equal vertex counts.
    """
    if p.n != q.n:
        raise ValueError(f"vertex counts differ: {p.n} vs {q.n}")
    dp = pairwise_distances(p)
    dq = pairwise_distances(q)
    iu = np.triu_indices(p.n, k=1)
    return bool(np.all(dp[iu] <= dq[iu] + slack))


def turning_angles(p: Polygon) -> np.ndarray:
    """Signed exterior angle at each vertex (positive = left turn)."""
    e = edge_vectors(p)
    prev = np.roll(e, 1, axis=0)
    cross = prev[:, 0] * e[:, 1] - prev[:, 1] * e[:, 0]
    dot = np.einsum("ij,ij->i", prev, e)
    return np.arctan2(cross, dot)


def is_convex(p: Polygon, geom_tol: float = DEFAULT_GEOM_TOL) -> bool:
    """Convex position test; straight vertices (zero turn) are permitted.

    A turn counts as zero when |cross| <= geom_tol * |e_prev| * |e_next|,
    so geom_tol acts as an angle threshold.  Expects a simple boundary;
    uniform turn signs with total turning beyond one loop raise
    :class:`WindingError` instead of returning a wrong answer.
    """
    e = edge_vectors(p)
    prev = np.roll(e, 1, axis=0)
    cross = prev[:, 0] * e[:, 1] - prev[:, 1] * e[:, 0]
    lens = np.hypot(e[:, 0], e[:, 1])
    straight = np.abs(cross) <= geom_tol * np.roll(lens, 1) * lens
    signs = np.sign(cross)
    signs[straight] = 0.0
    if np.any(signs > 0) and np.any(signs < 0):
        return False
    total = float(np.sum(turning_angles(p)))
    if abs(abs(total) - 2.0 * math.pi) > 1e-6:
        raise WindingError(f"total turning {total:.6f} is not one full loop; boundary is not simple")
    return True


def point_segment_distance(pt, a, b) -> float:
    pt = np.asarray(pt, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    dd = float(d @ d)
    t = 0.0 if dd == 0.0 else min(1.0, max(0.0, float((pt - a) @ d) / dd))
    return float(np.hypot(*(pt - (a + t * d))))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segment_distance(a, b, c, d) -> float:
    """Distance between segments [a, b] and [c, d]; zero if they cross."""
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if (o1 * o2 < 0.0) and (o3 * o4 < 0.0):
        return 0.0
    return min(
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
    )


def _point_segment_distance_matrix(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # pts: (m, 2) broadcast against segments a, b: (k, 2) -> result (m, k)
    d = b - a
    dd = np.einsum("kj,kj->k", d, d)
    dd = np.where(dd == 0.0, 1.0, dd)
    w = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("mkj,kj->mk", w, d) / dd[None, :], 0.0, 1.0)
    closest = a[None, :, :] + t[..., None] * d[None, :, :]
    diff = pts[:, None, :] - closest
    return np.hypot(diff[..., 0], diff[..., 1])


def is_simple(p: Polygon, geom_tol: float = DEFAULT_GEOM_TOL) -> bool:
    """No two non-adjacent edges cross or come within geom_tol * scale.

    Adjacent edges must meet only at their shared vertex: a fold-back onto
    the previous edge (near-zero vertex angle) fails the test.
    """
    n = p.n
    tol_d = geom_tol * polygon_scale(p)
    v = p.vertices
    a = v
    b = np.roll(v, -1, axis=0)

    # Fold-back test at each vertex (adjacent edge pairs).
    e = edge_vectors(p)
    prev = np.roll(e, 1, axis=0)
    cross = prev[:, 0] * e[:, 1] - prev[:, 1] * e[:, 0]
    dot = np.einsum("ij,ij->i", prev, e)
    lens = np.hypot(e[:, 0], e[:, 1])
    prev_lens = np.roll(lens, 1)
    folded = (np.abs(cross) <= tol_d * np.maximum(lens, prev_lens)) & (dot < 0.0)
    if np.any(folded):
        return False

    # Proper crossings between all edge pairs.
    def orient_grid(pa, pb, pc):
        # pa, pb: (n,2) per row; pc: (n,2) per column -> (n, n)
        return (pb[:, None, 0] - pa[:, None, 0]) * (pc[None, :, 1] - pa[:, None, 1]) - (
            pb[:, None, 1] - pa[:, None, 1]
        ) * (pc[None, :, 0] - pa[:, None, 0])

    o1 = orient_grid(a, b, a)
    o2 = orient_grid(a, b, b)
    proper = (o1 * o2 < 0.0) & (o1.T * o2.T < 0.0)

    da = _point_segment_distance_matrix(a, a, b)
    db = _point_segment_distance_matrix(b, a, b)
    dmin = np.minimum(np.minimum(da, db), np.minimum(da.T, db.T))
    dmin = np.where(proper, 0.0, dmin)

    if n == 3:
        return True
    k = np.arange(n)
    diff = np.abs(k[:, None] - k[None, :])
    nonadj = (diff != 1) & (diff != n - 1) & (k[:, None] < k[None, :])
    return bool(np.min(dmin[nonadj]) > tol_d)
