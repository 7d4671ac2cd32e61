"""Unfolding flow: Euler steps on the expansion field, with length projection.

Each accepted step solves for expansion velocities at the current polygon,
moves the vertices, and projects the edge lengths back onto the ORIGINAL
targets, so length drift never accumulates across steps.  Guards keep every
accepted snapshot simple, keep every pairwise distance from shrinking, and
keep the interdistance sum strictly climbing; a violated guard halves the
step instead of failing the run.

Vertices sitting on a straight stretch of the boundary need special care.
A pair whose chord equals the boundary arc between its ends is pinned at
its maximum, so no expansive motion can grow it, and keeping it as a strut
would freeze the growth objective at zero.  The LP therefore runs on the
QUOTIENT polygon with such passive vertices removed: the tight chord turns
into a quotient bar (rate pinned to zero), and the solved velocities are
extended back to the passive vertices by arclength-affine interpolation.
For a straight run that extension is the run's rigid motion, and the
growth rate of any pair (k, j) with k interior to a run interpolates the
rates at the run's endpoints, so the extended field is expansive with the
same margin the quotient LP certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._accel import project_pairs
from .geometry import (
    Polygon,
    ToleranceProfile,
    edge_lengths,
    interdistance_functional,
    is_convex,
    is_simple,
    pair_arc_lengths,
    pairwise_distances,
)
from .rigidity import Framework
from .solver import Blocked, ExpansionProblem, default_struts, solve_infinitesimal_expansion

__all__ = [
    "FLOW_TOLERANCES",
    "FlowConfig",
    "ProjectionError",
    "StepDiagnostics",
    "Trajectory",
    "TrajectoryReport",
    "project_edge_lengths",
    "reparameterize_by_E",
    "step",
    "unfold",
    "verify_trajectory",
]

# the flow works with a looser angle threshold than exact geometry: a
# polygon is treated as convex once its reflex signal drops below 1e-4
FLOW_TOLERANCES = ToleranceProfile(geom_tol=1e-4)

# relative chord-deficit band below which a pair counts as exactly tight.
# Must sit well under geom_tol squared: the deficit grows like the square
# of the bend height, so a vertex passivated at this band is straight to
# about 1e-5 of scale, far inside what is_convex at 1e-4 treats as flat.
_TIGHT_BAND = 1e-10

# per-step shrink allowance on any vertex pair.  A pair's step change is
# h * rate - h^2 * curvature, so whenever the solved rate is throttled by a
# nearly tight chord the quadratic term wins at moderate h and the pair
# bleeds; accepting those bleeds drains the dominance budget a nanometer at
# a time until no step is acceptable at all.  Rejecting them instead drives
# h under the break-even size, where every pair grows
_BLEED_FLOOR = 1e-12

# projection residual used inside the flow; must sit well under the bleed
# floor or the projector's own noise would trip it
_STEP_PROJ_TOL = 1e-13


class ProjectionError(RuntimeError):
    """Edge-length projection did not reach its residual target."""


@dataclass(frozen=True)
class FlowConfig:
    """Step-size policy and stopping rules for :func:`unfold`.

    ``stop`` is "convex" (halt as soon as the polygon tests convex) or
    "max_steps" (keep integrating until blocked or out of steps).
    """

    h0: float = 0.02
    min_step: float = 1e-9
    max_step: float = 0.2
    max_steps: int = 5000
    tolerances: ToleranceProfile = FLOW_TOLERANCES
    strut_rule: str = "nonadjacent"
    stop: str = "convex"

    def __post_init__(self):
        if not (0.0 < self.min_step <= self.h0 <= self.max_step):
            raise ValueError(
                f"need 0 < min_step <= h0 <= max_step, got "
                f"{self.min_step!r} / {self.h0!r} / {self.max_step!r}"
            )
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.stop not in ("convex", "max_steps"):
            raise ValueError(f"unknown stop mode {self.stop!r}")


@dataclass(frozen=True)
class StepDiagnostics:
    """One snapshot's bookkeeping.

    ``eps`` is the LP growth rate solved at this snapshot (NaN when no
    solve happened there, e.g. on resampled frames).  ``min_pair_growth``
    compares against the previous snapshot; snapshot 0 records 0.
    """

    step: int
    time: float
    status: str
    eps: float
    E: float
    max_length_residual: float
    min_pair_growth: float
    simple: bool


@dataclass(frozen=True)
class Trajectory:
    snapshots: tuple
    diagnostics: tuple

    def __post_init__(self):
        snaps = tuple((float(t), poly) for t, poly in self.snapshots)
        diags = tuple(self.diagnostics)
        if not snaps:
            raise ValueError("a trajectory needs at least one snapshot")
        if len(diags) != len(snaps):
            raise ValueError("one diagnostics record per snapshot required")
        n = snaps[0][1].n
        for _, poly in snaps:
            if poly.n != n:
                raise ValueError("all snapshots must share the vertex count")
        times = [t for t, _ in snaps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")
        object.__setattr__(self, "snapshots", snaps)
        object.__setattr__(self, "diagnostics", diags)

    @property
    def times(self) -> tuple:
        return tuple(t for t, _ in self.snapshots)

    @property
    def polygons(self) -> tuple:
        return tuple(poly for _, poly in self.snapshots)

    @property
    def final(self) -> Polygon:
        return self.snapshots[-1][1]

    @property
    def status(self) -> str:
        return self.diagnostics[-1].status

    @property
    def succeeded(self) -> bool:
        return self.status == "convex"


def project_edge_lengths(p: Polygon, targets, tol: float = 1e-10, max_iters: int = 1000) -> Polygon:
    """Pull every edge length onto its target by cyclic symmetric correction.

    Raises :class:`ProjectionError` when the worst residual still exceeds
    ``tol`` after ``max_iters`` sweeps; the caller is expected to retry
    from a less distorted configuration (smaller step).  The default sweep
    budget is sized for nearly straight vertex chains, where corrections
    travel one edge per sweep and convergence takes a few hundred passes.
    """
    targets = np.asarray(targets, dtype=float).ravel()
    n = p.n
    if targets.shape != (n,):
        raise ValueError(f"need one target per edge, got {targets.shape} for n={n}")
    if not np.all(np.isfinite(targets)) or np.any(targets <= 0.0):
        raise ValueError("edge targets must be positive and finite")
    if tol <= 0.0 or max_iters < 1:
        raise ValueError("tol must be positive and max_iters at least 1")
    pts = p.vertices.copy()
    ii = np.arange(n, dtype=np.intp)
    jj = np.concatenate([np.arange(1, n, dtype=np.intp), [0]])
    sweeps, resid = project_pairs(pts, ii, jj, targets, tol, max_iters)
    if resid > tol:
        raise ProjectionError(
            f"edge projection stuck at residual {resid:.3e} after {sweeps} sweeps"
        )
    try:
        return Polygon(pts)
    except ValueError as exc:
        raise ProjectionError(f"projection collapsed an edge: {exc}") from exc


def step(p: Polygon, v, h: float, targets=None, proj_tol: float = 1e-10) -> Polygon:
    """Euler update ``p + h v`` followed by projection onto edge targets."""
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"step size must be positive and finite, got {h!r}")
    v = np.asarray(v, dtype=float)
    if v.shape != (p.n, 2) or not np.all(np.isfinite(v)):
        raise ValueError("velocities must be a finite (n, 2) array")
    if targets is None:
        targets = edge_lengths(p)
    try:
        moved = Polygon(p.vertices + h * v)
    except ValueError as exc:
        raise ProjectionError(f"step collapsed an edge before projection: {exc}") from exc
    return project_edge_lengths(moved, targets, tol=proj_tol)


def _active_struts(p: Polygon, struts, band: float = _TIGHT_BAND):
    """Drop pairs whose chord already equals the boundary arc between them.

    The chord of such a pair is pinned at its maximum, so requiring it to
    grow would freeze the LP's growth objective at zero forever.
    """
    chords = pairwise_distances(p)
    arcs = pair_arc_lengths(p)
    keep = []
    for i, j in struts:
        if arcs[i, j] - chords[i, j] > band * arcs[i, j]:
            keep.append((i, j))
    return tuple(keep)


def _passive_vertices(p: Polygon, band: float = _TIGHT_BAND) -> np.ndarray:
    """Boolean mask of vertices whose two edges are chord-tight around them."""
    pts = p.vertices
    el = edge_lengths(p)
    n = p.n
    mask = np.zeros(n, dtype=bool)
    for k in range(n):
        arc = el[(k - 1) % n] + el[k]
        chord = float(np.hypot(*(pts[(k + 1) % n] - pts[(k - 1) % n])))
        mask[k] = arc - chord <= band * arc
    return mask


def _quotient_keep(p: Polygon, band: float = _TIGHT_BAND) -> np.ndarray:
    """Vertices that still carry a corner after peeling straight runs.

    Peeling repeats on the reduced polygon: a vertex can be chord-tight
    only compositely, its own corner looking bent while the run around it
    is straight end to end, and such vertices surface one layer at a time.
    """
    keep = np.arange(p.n)
    while keep.size > 3:
        q = Polygon(p.vertices[keep]) if keep.size < p.n else p
        passive = _passive_vertices(q, band)
        if not passive.any():
            break
        nxt = keep[~passive]
        if nxt.size < 3:
            break
        keep = nxt
    return keep


def _prolong(p: Polygon, keep: np.ndarray, v_kept: np.ndarray) -> np.ndarray:
    """Extend quotient velocities to passive vertices, affinely in arclength.

    On an exactly straight run this is the run's rigid motion, so intra-run
    distances keep rate zero while every pair into the run interpolates the
    endpoint rates.
    """
    n = p.n
    m = keep.size
    if m == n:
        return v_kept
    el = edge_lengths(p)
    v = np.zeros((n, 2))
    v[keep] = v_kept
    for idx in range(m):
        a = int(keep[idx])
        b = int(keep[(idx + 1) % m])
        span = (b - a) % n
        if span <= 1:
            continue
        total = sum(el[(a + t) % n] for t in range(span))
        s = 0.0
        for t in range(1, span):
            s += el[(a + t - 1) % n]
            k = (a + t) % n
            v[k] = v[a] + (s / total) * (v[b] - v[a])
    return v


def unfold(p: Polygon, cfg: FlowConfig = FlowConfig()) -> Trajectory:
    """Integrate the expansion field until the polygon reaches convex position.

    The returned trajectory ends with status "convex" on success; "blocked"
    (stuck nonconvex with a stress certificate), "stalled" (no acceptable
    step at min_step), or "max_steps" are the failure states, always spelled
    out in the final diagnostics record.
    """
    tols = cfg.tolerances
    if not is_simple(p, tols.geom_tol):
        raise ValueError("unfold requires a simple polygon")
    targets = edge_lengths(p)
    default_struts(p, cfg.strut_rule)  # fail fast on an unknown rule

    snaps = [(0.0, p)]
    diags = [
        StepDiagnostics(
            step=0, time=0.0, status="start", eps=float("nan"),
            E=interdistance_functional(p), max_length_residual=0.0,
            min_pair_growth=0.0, simple=True,
        )
    ]
    dist_max = pairwise_distances(p)
    E_now = diags[0].E
    h = cfg.h0
    time = 0.0
    seed = None
    warm = None
    prev_key = None

    def seal(status: str):
        diags[-1] = replace(diags[-1], status=status)
        return Trajectory(tuple(snaps), tuple(diags))

    for step_no in range(1, cfg.max_steps + 1):
        if cfg.stop == "convex" and is_convex(p, tols.geom_tol):
            return seal("convex")
        keep = _quotient_keep(p)
        if keep.size < 3:
            return seal("convex" if is_convex(p, tols.geom_tol) else "blocked")
        quotient = Polygon(p.vertices[keep])
        active = _active_struts(quotient, default_struts(quotient, cfg.strut_rule))
        if not active:
            return seal("convex" if is_convex(p, tols.geom_tol) else "blocked")
        # the warm basis only fits when the working set it came from can be
        # reproduced, which needs the same quotient and strut universe
        key = (tuple(keep), active)
        if key != prev_key:
            seed = None
            warm = None
        prev_key = key
        problem = ExpansionProblem(Framework(quotient, struts=active))
        res = solve_infinitesimal_expansion(
            problem, tols, seed_struts=seed, warm=warm
        )
        seed = res.diagnostics.working_set
        warm = res.diagnostics.warm
        if isinstance(res, Blocked):
            diags[-1] = replace(diags[-1], eps=res.eps_star)
            return seal("convex" if is_convex(p, tols.geom_tol) else "blocked")
        diags[-1] = replace(diags[-1], eps=res.eps)
        velocities = _prolong(p, keep, res.velocities)

        accepted = None
        dist_now = pairwise_distances(p)
        h_try = h
        while h_try >= cfg.min_step:
            try:
                q = step(p, velocities, h_try, targets, proj_tol=_STEP_PROJ_TOL)
            except ProjectionError:
                h_try *= 0.5
                continue
            dist_q = pairwise_distances(q)
            growth = float(np.min(dist_q - dist_max))
            bleed = float(np.min(dist_q - dist_now))
            E_q = interdistance_functional(q)
            if (
                growth < -tols.strut_tol
                or bleed < -_BLEED_FLOOR
                or E_q <= E_now
                or not is_simple(q, tols.geom_tol)
            ):
                h_try *= 0.5
                continue
            accepted = (q, dist_q, E_q, bleed)
            break
        if accepted is None:
            return seal("stalled")

        q, dist_q, E_q, bleed = accepted
        clean = h_try == h
        time += h_try
        p = q
        np.maximum(dist_max, dist_q, out=dist_max)
        snaps.append((time, p))
        diags.append(
            StepDiagnostics(
                step=step_no,
                time=time,
                status="stepped",
                eps=float("nan"),
                E=E_q,
                max_length_residual=float(np.max(np.abs(edge_lengths(p) - targets))),
                min_pair_growth=bleed,
                simple=True,
            )
        )
        E_now = E_q
        h = min(h_try * 1.5, cfg.max_step) if clean else h_try

    return seal("max_steps")


@dataclass(frozen=True)
class TrajectoryReport:
    ok: bool
    claimed_success: bool
    final_convex: bool
    max_length_drift: float
    min_dominance_margin: float
    all_simple: bool
    violations: tuple


def verify_trajectory(traj: Trajectory, tolerances: ToleranceProfile = FLOW_TOLERANCES) -> TrajectoryReport:
    """Independent recheck of a finished trajectory.

    Edge lengths at every snapshot are compared against snapshot 0; the
    dominance check covers EVERY ordered snapshot pair via a running
    elementwise maximum (so a dip below any earlier snapshot is caught, not
    just a dip below the immediate predecessor); simplicity is retested per
    snapshot; and a success claim requires the last snapshot to be convex.
    """
    polys = traj.polygons
    violations = []

    base = edge_lengths(polys[0])
    drift = 0.0
    for k, poly in enumerate(polys):
        d = float(np.max(np.abs(edge_lengths(poly) - base)))
        if d > drift:
            drift = d
        if d > tolerances.length_tol:
            violations.append(("lengths", f"snapshot {k} drifts {d:.3e}"))

    margin = math.inf
    running = pairwise_distances(polys[0])
    for k, poly in enumerate(polys[1:], start=1):
        dist = pairwise_distances(poly)
        worst = float(np.min(dist - running))
        if worst < margin:
            margin = worst
        if worst < -tolerances.strut_tol:
            violations.append(("dominance", f"snapshot {k} shrinks a pair by {-worst:.3e}"))
        np.maximum(running, dist, out=running)
    if len(polys) == 1:
        margin = 0.0

    all_simple = True
    for k, poly in enumerate(polys):
        if not is_simple(poly, tolerances.geom_tol):
            all_simple = False
            violations.append(("simplicity", f"snapshot {k} is not simple"))

    final_convex = is_convex(polys[-1], tolerances.geom_tol)
    if traj.succeeded and not final_convex:
        violations.append(("final_convex", "success claimed but final snapshot is not convex"))

    return TrajectoryReport(
        ok=not violations,
        claimed_success=traj.succeeded,
        final_convex=final_convex,
        max_length_drift=drift,
        min_dominance_margin=margin,
        all_simple=all_simple,
        violations=tuple(violations),
    )


def _interp_bisect(pa: np.ndarray, pb: np.ndarray, level: float) -> np.ndarray:
    """Vertex blend between two snapshots whose interdistance sum hits level."""
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pts = (1.0 - mid) * pa + mid * pb
        if interdistance_functional(Polygon(pts)) < level:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return (1.0 - lam) * pa + lam * pb


def reparameterize_by_E(traj: Trajectory) -> Trajectory:
    """Resample so the interdistance sum grows affinely in time over [0, 1].

    Keeps the snapshot count; interior frames are piecewise-linear vertex
    blends between the bracketing originals, each solved (by bisection on
    the blend parameter) to land exactly on its evenly spaced E level.
    Endpoints are carried over unchanged.  Raises when E is not strictly
    increasing along the input.
    """
    polys = traj.polygons
    E_vals = np.array([interdistance_functional(q) for q in polys])
    if len(polys) < 2 or np.any(np.diff(E_vals) <= 0.0):
        raise ValueError("E must be strictly increasing along the trajectory")

    m = len(polys)
    levels = np.linspace(E_vals[0], E_vals[-1], m)
    times = np.linspace(0.0, 1.0, m)
    base = edge_lengths(polys[0])

    new_polys = [polys[0]]
    for j in range(1, m - 1):
        a = int(np.searchsorted(E_vals, levels[j], side="right") - 1)
        a = min(max(a, 0), m - 2)
        new_polys.append(
            Polygon(_interp_bisect(polys[a].vertices, polys[a + 1].vertices, float(levels[j])))
        )
    new_polys.append(polys[-1])

    snaps = []
    diags = []
    prev_dist = None
    for j, (t, poly) in enumerate(zip(times, new_polys)):
        dist = pairwise_distances(poly)
        if j == 0:
            status = "start"
            growth = 0.0
        elif j == m - 1:
            status = traj.status
            growth = float(np.min(dist - prev_dist))
        else:
            status = "resampled"
            growth = float(np.min(dist - prev_dist))
        snaps.append((float(t), poly))
        diags.append(
            StepDiagnostics(
                step=j,
                time=float(t),
                status=status,
                eps=float("nan"),
                E=interdistance_functional(poly),
                max_length_residual=float(np.max(np.abs(edge_lengths(poly) - base))),
                min_pair_growth=growth,
                simple=is_simple(poly, FLOW_TOLERANCES.geom_tol),
            )
        )
        prev_dist = dist
    return Trajectory(tuple(snaps), tuple(diags))
