"""Bar-and-strut frameworks, equilibrium stresses, and piecewise-linear lifts.

A framework places rigid bars on a polygon's boundary edges and struts
(members that may only grow) on separated vertex pairs.  A stress assigns
a coefficient to every member; it is an equilibrium stress when the member
forces cancel at every vertex.  Such a stress over a planar embedding
lifts to a continuous piecewise-affine surface whose gradient jumps across
each edge encode the stresses; positive stress on an edge makes the crease
convex.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .arrangement import face_walks
from .geometry import (
    DEFAULT_GEOM_TOL,
    Polygon,
    ToleranceProfile,
    is_convex,
    point_segment_distance,
    polygon_scale,
    rot90,
)

__all__ = [
    "Dichotomy",
    "Framework",
    "Lift",
    "LiftReport",
    "PlanarEmbedding",
    "RigidityMatrix",
    "StressCertificate",
    "apply_stress_load",
    "blocked_stress_dichotomy_check",
    "build_embedding",
    "build_rigidity_matrix",
    "evaluate_lift",
    "is_equilibrium_stress",
    "maxwell_lift",
    "member_loads",
    "verify_lift",
]


def _normalize_pairs(pairs, n: int, *, forbid) -> tuple[tuple[int, int], ...]:
    out = []
    for i, j in pairs:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pair ({i},{j}) out of range for {n} vertices")
        if i == j:
            raise ValueError(f"pair ({i},{i}) links a vertex to itself")
        pair = (i, j) if i < j else (j, i)
        if pair in forbid:
            raise ValueError(f"pair {pair} is already a bar")
        out.append(pair)
    dedup = sorted(set(out))
    if len(dedup) != len(out):
        raise ValueError("duplicate pairs")
    return tuple(dedup)


@dataclass(frozen=True)
class Framework:
    """Polygon boundary bars plus a set of strut pairs.

    Bars are the n cyclic edges, derived from the polygon.  Struts are
    unordered vertex pairs, stored sorted, disjoint from the bars.
    """

    polygon: Polygon
    struts: tuple = ()
    bars: tuple = field(init=False)

    def __post_init__(self):
        n = self.polygon.n
        bars = tuple((k, (k + 1) % n) if k + 1 < n else (0, n - 1) for k in range(n))
        object.__setattr__(self, "bars", bars)
        object.__setattr__(
            self, "struts", _normalize_pairs(self.struts, n, forbid=set(bars))
        )

    @property
    def n(self) -> int:
        return self.polygon.n


@dataclass(frozen=True)
class RigidityMatrix:
    """Dense matrix of first-order member length derivatives.

    Row for pair (i, j) dotted with a flat velocity vector v (2n entries,
    x then y per vertex) yields (p_i - p_j) . (v_i - v_j).  Bars occupy
    the first rows, struts the rest.
    """

    framework: Framework
    rows: np.ndarray

    @property
    def bar_rows(self) -> np.ndarray:
        return self.rows[: len(self.framework.bars)]

    @property
    def strut_rows(self) -> np.ndarray:
        return self.rows[len(self.framework.bars) :]


def build_rigidity_matrix(f: Framework) -> RigidityMatrix:
    p = f.polygon.vertices
    members = list(f.bars) + list(f.struts)
    rows = np.zeros((len(members), 2 * f.n))
    for r, (i, j) in enumerate(members):
        d = p[i] - p[j]
        rows[r, 2 * i : 2 * i + 2] = d
        rows[r, 2 * j : 2 * j + 2] = -d
    rows.setflags(write=False)
    return RigidityMatrix(f, rows)


@dataclass(frozen=True)
class StressCertificate:
    """Signed bar coefficients and nonnegative strut coefficients.

    ``norm`` is the l1 mass of the strut part; a certificate is only
    meaningful when it is positive (``is_trivial`` flags the zero case).
    """

    framework: Framework
    omega: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float, copy=True)
        t = np.array(self.t, dtype=float, copy=True)
        if omega.shape != (len(self.framework.bars),):
            raise ValueError("omega must assign one coefficient per bar")
        if t.shape != (len(self.framework.struts),):
            raise ValueError("t must assign one coefficient per strut")
        if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(t))):
            raise ValueError("stress coefficients must be finite")
        if np.any(t < 0.0):
            raise ValueError("strut coefficients must be nonnegative")
        omega.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "t", t)

    @property
    def norm(self) -> float:
        return float(np.sum(self.t))

    @property
    def is_trivial(self) -> bool:
        return self.norm == 0.0


def member_loads(polygon: Polygon, pairs, sigma) -> np.ndarray:
    """Net force at each vertex: vertex i receives sigma_ij (p_i - p_j).

    Accepts arbitrary signed coefficients; this is the transpose action of
    the rigidity matrix, computed by direct accumulation rather than
    through the matrix so the two routes can be checked against each other.
    """
    p = polygon.vertices
    loads = np.zeros_like(p)
    for (i, j), s in zip(pairs, np.asarray(sigma, dtype=float)):
        pull = s * (p[i] - p[j])
        loads[i] += pull
        loads[j] -= pull
    return loads


def apply_stress_load(f: Framework, s: StressCertificate) -> np.ndarray:
    """Per-vertex load of a certificate over bars and struts together."""
    if s.framework.bars != f.bars or s.framework.struts != f.struts:
        raise ValueError("certificate indexed against a different framework")
    members = list(f.bars) + list(f.struts)
    sigma = np.concatenate([s.omega, s.t])
    return member_loads(f.polygon, members, sigma)


def is_equilibrium_stress(f: Framework, s: StressCertificate, tol: float = 1e-8) -> bool:
    loads = apply_stress_load(f, s)
    return float(np.max(np.hypot(loads[:, 0], loads[:, 1]))) <= tol


class Dichotomy(enum.Enum):
    CONVEX = "convex"
    ON_BOUNDARY = "on_boundary"
    VIOLATION = "violation"


def blocked_stress_dichotomy_check(
    f: Framework,
    s: StressCertificate,
    tols: ToleranceProfile = ToleranceProfile(),
) -> Dichotomy:
    """Classify a blocked configuration against its certificate.

    A valid certificate forces one of two geometric situations: the
    polygon is in convex position, or every stressed strut's segment runs
    along the boundary (a straight run of edges).  Anything else reports
    VIOLATION, meaning the certificate or the numerics are bad.
    """
    if s.is_trivial:
        raise ValueError("certificate carries no strut mass")
    if not is_equilibrium_stress(f, s, tols.eq_tol):
        raise ValueError("certificate loads exceed the equilibrium tolerance")
    if is_convex(f.polygon, tols.geom_tol):
        return Dichotomy.CONVEX
    p = f.polygon.vertices
    n = f.polygon.n
    near = tols.geom_tol * polygon_scale(f.polygon)
    for (i, j), ti in zip(f.struts, s.t):
        if ti <= tols.strut_tol:
            continue
        for lam in np.linspace(0.0, 1.0, 64):
            q = (1.0 - lam) * p[i] + lam * p[j]
            if all(
                point_segment_distance(q, p[k], p[(k + 1) % n]) > near
                for k in range(n)
            ):
                return Dichotomy.VIOLATION
    return Dichotomy.ON_BOUNDARY


@dataclass(frozen=True)
class PlanarEmbedding:
    """Plane graph with stressed edges and caller-supplied faces.

    ``edges`` holds (u, w, sigma) with u < w; ``faces`` are node cycles,
    bounded ones counterclockwise and the ``outer`` one clockwise.  Every
    edge must appear in exactly two face boundaries, once per direction.
    """

    points: np.ndarray
    edges: tuple
    faces: tuple
    outer: int

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must form an (m, 2) array")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        edges = tuple(
            (int(u), int(w), float(sig)) if u < w else (int(w), int(u), float(sig))
            for u, w, sig in self.edges
        )
        object.__setattr__(self, "edges", edges)
        faces = tuple(tuple(int(v) for v in cyc) for cyc in self.faces)
        object.__setattr__(self, "faces", faces)
        if not (0 <= self.outer < len(faces)):
            raise ValueError("outer face index out of range")
        if len(pts) - len(edges) + len(faces) != 2:
            raise ValueError(
                f"V - E + F = {len(pts)} - {len(edges)} + {len(faces)} != 2"
            )
        darts = {}
        for fi, cyc in enumerate(faces):
            if len(cyc) < 3:
                raise ValueError("face cycles need at least 3 nodes")
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                if (a, b) in darts:
                    raise ValueError(f"dart {a}->{b} appears in two faces")
                darts[(a, b)] = fi
        known = {(u, w) for u, w, _ in edges}
        for a, b in darts:
            if (min(a, b), max(a, b)) not in known:
                raise ValueError(f"face dart {a}->{b} is not an embedding edge")
        for u, w, _ in edges:
            if (u, w) not in darts or (w, u) not in darts:
                raise ValueError(f"edge ({u},{w}) missing from the face double cover")
        object.__setattr__(self, "_dart_face", darts)

    def face_of_dart(self, u: int, w: int) -> int:
        return self._dart_face[(u, w)]

    def node_loads(self) -> np.ndarray:
        loads = np.zeros_like(self.points)
        for u, w, sig in self.edges:
            pull = sig * (self.points[u] - self.points[w])
            loads[u] += pull
            loads[w] -= pull
        return loads


@dataclass(frozen=True)
class Lift:
    """Per-face affine maps: value over face F is gradients[F] . x + offsets[F]."""

    gradients: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        g = np.array(self.gradients, dtype=float, copy=True)
        c = np.array(self.offsets, dtype=float, copy=True)
        if g.ndim != 2 or g.shape[1] != 2 or c.shape != (g.shape[0],):
            raise ValueError("need (F, 2) gradients and (F,) offsets")
        g.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "gradients", g)
        object.__setattr__(self, "offsets", c)


def maxwell_lift(e: PlanarEmbedding, eq_tol: float = 1e-8, order: str = "forward") -> Lift:
    """Continuous piecewise-affine lift of an equilibrium stress.

    The outer face is pinned to zero and the dual graph is traversed from
    it; crossing the edge (i, j) with stress sigma adds
    ``sigma * rot90(p_j - p_i)`` to the gradient of the face left of the
    walk, with offsets chosen so values agree across the edge.  Raises
    when the stress is not in equilibrium or when some dual cycle closes
    inconsistently, which signals bad face data.

    ``order`` picks the dual-traversal schedule ("forward" breadth-first
    or "reverse" depth-first over reversed boundaries); the result must
    not depend on it.
    """
    loads = e.node_loads()
    worst = float(np.max(np.hypot(loads[:, 0], loads[:, 1]))) if len(loads) else 0.0
    if worst > eq_tol:
        raise ValueError(f"stress is not in equilibrium: max node load {worst:.3g}")
    if order not in ("forward", "reverse"):
        raise ValueError("order must be 'forward' or 'reverse'")

    nf = len(e.faces)
    gradients = np.zeros((nf, 2))
    offsets = np.zeros(nf)
    sigma_of = {(u, w): sig for u, w, sig in e.edges}
    known = {e.outer}
    queue = deque([e.outer])
    scale = float(np.max(np.abs(e.points))) + 1.0
    closure_tol = 1e3 * eq_tol * scale
    while queue:
        fi = queue.popleft() if order == "forward" else queue.pop()
        cyc = e.faces[fi]
        darts = list(zip(cyc, cyc[1:] + cyc[:1]))
        if order == "reverse":
            darts = darts[::-1]
        for i, j in darts:
            other = e.face_of_dart(j, i)
            sig = sigma_of[(i, j) if i < j else (j, i)]
            jump = sig * rot90(e.points[j] - e.points[i])
            grad = gradients[fi] - jump
            off = (gradients[fi] - grad) @ e.points[i] + offsets[fi]
            if other in known:
                if (
                    np.max(np.abs(grad - gradients[other])) > closure_tol
                    or abs(off - offsets[other]) > closure_tol
                ):
                    raise ValueError(
                        f"dual cycle closes inconsistently at faces {fi}/{other}"
                    )
                continue
            mismatch = abs((grad - gradients[fi]) @ e.points[j] + (off - offsets[fi]))
            if mismatch > closure_tol:
                raise ValueError(
                    f"edge ({i},{j}) cannot carry a continuous lift: {mismatch:.3g}"
                )
            gradients[other] = grad
            offsets[other] = off
            known.add(other)
            queue.append(other)
    if len(known) != nf:
        raise ValueError("dual graph is disconnected; embedding is invalid")
    return Lift(gradients, offsets)


@dataclass(frozen=True)
class LiftReport:
    ok: bool
    max_continuity_residual: float
    max_jump_residual: float
    outer_is_zero: bool
    violations: tuple


def verify_lift(e: PlanarEmbedding, lift: Lift, tol: float = 1e-12) -> LiftReport:
    """Check continuity, gradient jumps, and the outer-face pin."""
    violations = []
    max_cont = 0.0
    max_jump = 0.0
    for u, w, sig in e.edges:
        left = e.face_of_dart(u, w)
        right = e.face_of_dart(w, u)
        jump_vec = (
            lift.gradients[left]
            - lift.gradients[right]
            - sig * rot90(e.points[w] - e.points[u])
        )
        jump = float(np.max(np.abs(jump_vec)))
        max_jump = max(max_jump, jump)
        if jump > tol:
            violations.append(("jump", (u, w), jump))
        for node in (u, w):
            vals = [
                lift.gradients[fc] @ e.points[node] + lift.offsets[fc]
                for fc in (left, right)
            ]
            cont = abs(vals[0] - vals[1])
            max_cont = max(max_cont, cont)
            if cont > tol:
                violations.append(("continuity", (u, w, node), cont))
    outer_zero = (
        float(np.max(np.abs(lift.gradients[e.outer]))) == 0.0
        and lift.offsets[e.outer] == 0.0
    )
    if not outer_zero:
        violations.append(("outer", e.outer, float(np.max(np.abs(lift.gradients[e.outer])))))
    return LiftReport(
        ok=not violations,
        max_continuity_residual=max_cont,
        max_jump_residual=max_jump,
        outer_is_zero=outer_zero,
        violations=tuple(violations),
    )


def _point_in_loop(pt, loop_pts) -> bool:
    # even-odd ray crossing, boundary points counted inside
    x, y = pt
    inside = False
    m = len(loop_pts)
    for k in range(m):
        x1, y1 = loop_pts[k]
        x2, y2 = loop_pts[(k + 1) % m]
        if point_segment_distance(pt, (x1, y1), (x2, y2)) < 1e-12:
            return True
        if (y1 > y) != (y2 > y):
            t = (y - y1) / (y2 - y1)
            if x < x1 + t * (x2 - x1):
                inside = not inside
    return inside


def evaluate_lift(e: PlanarEmbedding, lift: Lift, points) -> np.ndarray:
    """Lift values at query points; points outside every bounded face get 0."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(len(pts))
    for k, q in enumerate(pts):
        for fi, cyc in enumerate(e.faces):
            if fi == e.outer:
                continue
            if _point_in_loop(q, e.points[list(cyc)]):
                out[k] = lift.gradients[fi] @ q + lift.offsets[fi]
                break
    return out if out.size > 1 else float(out[0])


def build_embedding(polygon: Polygon, omega, chords, chord_stress) -> PlanarEmbedding:
    """Plane embedding of a convexly-positioned polygon with stressed chords.

    Boundary edge k carries omega[k].  Chords (vertex pairs) may cross
    each other; crossings are subdivided and the sub-edge stress is scaled
    by full-length / sub-length so the transmitted force is unchanged.
    Chords crossing boundary edges are not supported.
    """
    p = polygon.vertices
    n = polygon.n
    chords = [tuple(sorted((int(i), int(j)))) for i, j in chords]
    chord_stress = [float(s) for s in chord_stress]
    if len(chords) != len(chord_stress):
        raise ValueError("one stress per chord required")
    boundary = {tuple(sorted((k, (k + 1) % n))) for k in range(n)}
    if len(set(chords)) != len(chords) or any(c in boundary for c in chords):
        raise ValueError("chords must be distinct non-boundary pairs")

    coords = [tuple(v) for v in p]
    tol = 1e-12 * polygon_scale(polygon)

    def node_at(pt) -> int:
        for k, q in enumerate(coords):
            if math.hypot(pt[0] - q[0], pt[1] - q[1]) <= tol:
                return k
        coords.append((float(pt[0]), float(pt[1])))
        return len(coords) - 1

    # collect crossing points on each chord
    stations: list[list[tuple[float, int]]] = [
        [(0.0, i), (1.0, j)] for (i, j) in chords
    ]
    for a in range(len(chords)):
        i1, j1 = chords[a]
        for b in range(a + 1, len(chords)):
            i2, j2 = chords[b]
            if len({i1, j1, i2, j2}) < 4:
                continue
            d1 = _cross(p[i2], p[j2], p[i1])
            d2 = _cross(p[i2], p[j2], p[j1])
            d3 = _cross(p[i1], p[j1], p[i2])
            d4 = _cross(p[i1], p[j1], p[j2])
            if (d1 > 0) != (d2 > 0) and (d3 > 0) != (d4 > 0) and d1 != d2 and d3 != d4:
                t = d1 / (d1 - d2)
                x = p[i1] + t * (p[j1] - p[i1])
                pid = node_at(x)
                stations[a].append((t, pid))
                stations[b].append((d3 / (d3 - d4), pid))

    pts = np.array(coords)
    edges: list[tuple[int, int, float]] = []
    for k in range(n):
        u, w = k, (k + 1) % n
        edges.append((min(u, w), max(u, w), float(omega[k])))
    for (i, j), sig, st in zip(chords, chord_stress, stations):
        st.sort(key=lambda s: s[0])
        full = float(np.hypot(*(p[i] - p[j])))
        for (ta, ua), (tb, ub) in zip(st, st[1:]):
            if ua == ub:
                continue
            sub = float(np.hypot(*(pts[ua] - pts[ub])))
            edges.append((min(ua, ub), max(ua, ub), sig * full / sub))

    walks = face_walks(pts, [(u, w) for u, w, _ in edges])
    faces = []
    outer = None
    for walk in walks:
        if len(set(walk)) != len(walk):
            raise ValueError("embedding face pinches; chords unsupported here")
        v = pts[walk]
        area = 0.5 * float(
            np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        )
        if area < 0.0:
            if outer is not None:
                raise ValueError("two unbounded faces; chords cross the boundary?")
            outer = len(faces)
        faces.append(tuple(walk))
    if outer is None:
        raise ValueError("no outer face found")
    return PlanarEmbedding(pts, tuple(edges), tuple(faces), outer)


def _cross(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
