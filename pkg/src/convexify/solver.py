"""Infinitesimal expansion LP: velocities that grow every strut, or a dual
stress certificate proving no such velocities exist.

The program maximizes a uniform margin eps subject to: boundary edges keep
their length to first order (bar rows = 0), every strut's length rate is
at least eps, one vertex is pinned and one edge direction is pinned (kills
the rigid-motion kernel exactly), and velocity components live in a box.
A strictly positive optimum yields an Expansion.  An optimum at zero is a
blocked configuration; the row duals then assemble into an equilibrium
stress with nonnegative strut part, returned as Blocked.

Two independent routes produce the certificate: simplex row duals (primary)
and a Farkas feasibility program over the bar-motion null space (fallback).
Both are validated by recomputing vertex loads from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Polygon, ToleranceProfile, polygon_scale, rot90
from .rigidity import (
    Framework,
    StressCertificate,
    apply_stress_load,
    build_rigidity_matrix,
)
from .simplex import solve_equality_form

__all__ = [
    "Blocked",
    "CertificateReport",
    "Expansion",
    "ExpansionProblem",
    "ExpansionReport",
    "NumericalFailure",
    "SolveDiagnostics",
    "default_struts",
    "solve_infinitesimal_expansion",
    "validate_certificate",
    "validate_expansion",
]

_MAX_ROUNDS = 60
_ADD_BATCH = 64


class NumericalFailure(RuntimeError):
    """The LP or its dual extraction failed; neither branch can be trusted."""


def default_struts(p: Polygon, rule: str = "nonadjacent") -> tuple:
    """All vertex pairs at cyclic index distance >= 2.

    Both accepted names describe the same set: a pair separated by at
    least two full edges in each cyclic direction is exactly a pair of
    nonadjacent vertices.
    """
    if rule not in ("nonadjacent", "two_edges_apart"):
        raise ValueError(f"unknown strut rule {rule!r}")
    n = p.n
    return tuple(
        (i, j)
        for i in range(n)
        for j in range(i + 2, n)
        if not (i == 0 and j == n - 1)
    )


@dataclass(frozen=True)
class ExpansionProblem:
    """Framework plus pinning spec and velocity box bound."""

    framework: Framework
    pin_vertex: int = 0
    pin_edge: int = 0
    bound: float = 1.0

    def __post_init__(self):
        n = self.framework.n
        if not (0 <= self.pin_edge < n):
            raise ValueError("pinned edge index out of range")
        ends = (self.pin_edge, (self.pin_edge + 1) % n)
        if self.pin_vertex not in ends:
            raise ValueError("pinned vertex must be an endpoint of the pinned edge")
        if not (self.bound > 0.0 and np.isfinite(self.bound)):
            raise ValueError("velocity bound must be positive and finite")

    @property
    def pin_other(self) -> int:
        ends = (self.pin_edge, (self.pin_edge + 1) % self.framework.n)
        return ends[1] if self.pin_vertex == ends[0] else ends[0]


@dataclass(frozen=True)
class SolveDiagnostics:
    lp_iterations: int
    rounds: int
    working_set: tuple
    warm: tuple | None


@dataclass(frozen=True)
class Expansion:
    velocities: np.ndarray
    eps: float
    diagnostics: SolveDiagnostics

    def __post_init__(self):
        v = np.array(self.velocities, dtype=float, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "velocities", v)


@dataclass(frozen=True)
class Blocked:
    certificate: StressCertificate
    eps_star: float
    diagnostics: SolveDiagnostics


def _strut_rates(p: Polygon, pairs, v: np.ndarray) -> np.ndarray:
    pts = p.vertices
    if not len(pairs):
        return np.zeros(0)
    ii = np.fromiter((a for a, _ in pairs), dtype=np.intp, count=len(pairs))
    jj = np.fromiter((b for _, b in pairs), dtype=np.intp, count=len(pairs))
    return np.einsum("ij,ij->i", pts[ii] - pts[jj], v[ii] - v[jj])


def _assemble(p: Polygon, working, problem: ExpansionProblem):
    pts = p.vertices
    n = p.n
    w = len(working)
    nv = 2 * n + 1 + w
    rows = n + 1 + w
    A = np.zeros((rows, nv))
    for k in range(n):
        d = pts[k] - pts[(k + 1) % n]
        A[k, 2 * k : 2 * k + 2] = d
        A[k, 2 * ((k + 1) % n) : 2 * ((k + 1) % n) + 2] = -d
    other = problem.pin_other
    A[n, 2 * other : 2 * other + 2] = rot90(pts[other] - pts[problem.pin_vertex])
    for s, (i, j) in enumerate(working):
        d = pts[i] - pts[j]
        r = n + 1 + s
        A[r, 2 * i : 2 * i + 2] = d
        A[r, 2 * j : 2 * j + 2] = -d
        A[r, 2 * n] = -1.0
        A[r, 2 * n + 1 + s] = -1.0
    scale = polygon_scale(p)
    eps_max = 8.0 * scale * problem.bound
    lower = np.concatenate(
        [np.full(2 * n, -problem.bound), [0.0], np.zeros(w)]
    )
    upper = np.concatenate(
        [np.full(2 * n, problem.bound), [eps_max], np.full(w, 2.0 * eps_max)]
    )
    pv = problem.pin_vertex
    lower[2 * pv : 2 * pv + 2] = 0.0
    upper[2 * pv : 2 * pv + 2] = 0.0
    c = np.zeros(nv)
    c[2 * n] = 1.0
    return A, np.zeros(rows), c, lower, upper


def _seed_working(p: Polygon, struts, seed) -> list:
    n = p.n
    sset = set(struts)
    base = {s for s in struts if (s[1] - s[0]) % n == 2 or (s[0] - s[1]) % n == 2}
    if seed is not None:
        base.update(s for s in seed if s in sset)
    if len(base) < min(len(struts), 3 * n):
        pts = p.vertices
        chord = np.array([np.hypot(*(pts[i] - pts[j])) for i, j in struts])
        lengths = np.hypot(*np.diff(np.vstack([pts, pts[:1]]), axis=0).T)
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        total = cum[-1]
        fwd = np.array([cum[j] - cum[i] for i, j in struts])
        arc = np.minimum(fwd, total - fwd)
        ratio = chord / np.maximum(arc, 1e-300)
        for k in np.argsort(ratio, kind="stable")[: 3 * n]:
            base.add(struts[int(k)])
    return sorted(base)


def _omega_lstsq(framework: Framework, t: np.ndarray) -> np.ndarray:
    p = framework.polygon.vertices
    n = framework.n
    bar_cols = np.zeros((2 * n, n))
    for k, (i, j) in enumerate(framework.bars):
        d = p[i] - p[j]
        bar_cols[2 * i : 2 * i + 2, k] = d
        bar_cols[2 * j : 2 * j + 2, k] = -d
    target = np.zeros(2 * n)
    for (i, j), ts in zip(framework.struts, t):
        d = ts * (p[i] - p[j])
        target[2 * i : 2 * i + 2] -= d
        target[2 * j : 2 * j + 2] += d
    omega, *_ = np.linalg.lstsq(bar_cols, target, rcond=None)
    return omega


def _certificate_from_duals(framework, working, duals, tolerances):
    n = framework.n
    t_work = -duals[n + 1 :]
    t = np.zeros(len(framework.struts))
    index = {s: k for k, s in enumerate(framework.struts)}
    for s, tv in zip(working, t_work):
        t[index[s]] = tv
    t = np.maximum(t, 0.0)
    mass = float(t.sum())
    if mass <= 1e-9:
        return None
    t /= mass
    omega = _omega_lstsq(framework, t)
    cert = StressCertificate(framework, omega, t)
    report = validate_certificate(framework, cert, tolerances)
    return cert if report.ok else None


def _certificate_by_farkas(framework: Framework, tolerances) -> StressCertificate:
    """Feasibility program: nonnegative unit-mass strut stress whose load is
    balanced by some bar stress.  Existence is the dual side of a blocked
    optimum, derived independently of the primal tableau."""
    matrix = build_rigidity_matrix(framework)
    bar_rows = matrix.bar_rows
    _, sv, vh = np.linalg.svd(bar_rows)
    rank = int(np.sum(sv > sv[0] * max(bar_rows.shape) * 1e-13)) if sv.size else 0
    null = vh[rank:]
    strut_cols = matrix.strut_rows.T  # load of unit stress on strut s is col s
    S = len(framework.struts)
    N = null @ strut_cols
    A = np.vstack([N, np.ones((1, S))])
    b = np.concatenate([np.zeros(len(N)), [1.0]])
    res = solve_equality_form(A, b, np.zeros(S), np.zeros(S), np.ones(S))
    if res.status != "optimal":
        raise NumericalFailure(
            "blocked optimum reported but no equilibrium stress could be built"
        )
    t = np.maximum(res.x, 0.0)
    t /= t.sum()
    omega = _omega_lstsq(framework, t)
    cert = StressCertificate(framework, omega, t)
    report = validate_certificate(framework, cert, tolerances)
    if not report.ok:
        raise NumericalFailure(
            f"certificate fails validation on both routes: {report.violations}"
        )
    return cert


def solve_infinitesimal_expansion(
    problem: ExpansionProblem,
    tolerances: ToleranceProfile = ToleranceProfile(),
    *,
    mode: str = "active_set",
    seed_struts=None,
    warm=None,
):
    """Expansion velocities or a Blocked certificate for one framework.

    ``mode`` "full" puts every strut row in the program at once;
    "active_set" starts from a small working set and adds violated struts
    until none remain, which answers identically (a relaxed program only
    overestimates eps, and the loop exits with no strut below the margin).
    ``seed_struts`` preloads the working set; ``warm`` is a (basis,
    vstatus) pair from a previous solve over the same working set.
    """
    if mode not in ("full", "active_set"):
        raise ValueError(f"unknown mode {mode!r}")
    framework = problem.framework
    struts = framework.struts
    if not struts:
        raise ValueError("strut set must be nonempty")
    p = framework.polygon

    if mode == "full":
        working = sorted(struts)
    else:
        working = _seed_working(p, struts, seed_struts)

    strut_tol = tolerances.strut_tol
    iterations = 0
    for round_no in range(1, _MAX_ROUNDS + 1):
        A, b, c, lower, upper = _assemble(p, working, problem)
        res = solve_equality_form(A, b, c, lower, upper, warm=warm)
        warm = None
        iterations += res.iterations
        if res.status != "optimal":
            raise NumericalFailure(f"LP did not converge ({res.status})")
        n = p.n
        v = res.x[: 2 * n].reshape(n, 2)
        eps = float(res.objective)
        diag = SolveDiagnostics(
            lp_iterations=iterations,
            rounds=round_no,
            working_set=tuple(working),
            warm=(res.basis, res.vstatus),
        )
        if eps <= strut_tol:
            cert = _certificate_from_duals(framework, working, res.duals, tolerances)
            if cert is None:
                cert = _certificate_by_farkas(framework, tolerances)
            return Blocked(certificate=cert, eps_star=eps, diagnostics=diag)
        rates = _strut_rates(p, struts, v)
        short = rates < eps - 0.5 * strut_tol
        wset = set(working)
        in_working = np.fromiter(
            (s in wset for s in struts), dtype=bool, count=len(struts)
        )
        viol = np.nonzero(short & ~in_working)[0]
        if viol.size == 0:
            return Expansion(velocities=v, eps=eps, diagnostics=diag)
        order = viol[np.argsort(rates[viol], kind="stable")]
        for k in order[:_ADD_BATCH]:
            working.append(struts[int(k)])
        working.sort()
    raise NumericalFailure("active-set loop failed to settle")


@dataclass(frozen=True)
class ExpansionReport:
    ok: bool
    max_bar_residual: float
    pin_residual: float
    min_strut_margin: float
    max_speed: float
    violations: tuple


def validate_expansion(
    problem: ExpansionProblem,
    expansion: Expansion,
    tolerances: ToleranceProfile = ToleranceProfile(),
) -> ExpansionReport:
    """Recompute every constraint from scratch, independent of the solver."""
    framework = problem.framework
    p = framework.polygon
    v = np.asarray(expansion.velocities, dtype=float)
    if v.shape != (p.n, 2):
        raise ValueError("velocity array shape mismatch")
    violations = []
    bar_rates = _strut_rates(p, framework.bars, v)
    max_bar = float(np.max(np.abs(bar_rates)))
    if max_bar > tolerances.eq_tol:
        violations.append(("bars", max_bar))
    pin_v = float(np.max(np.abs(v[problem.pin_vertex])))
    edge = p.vertices[problem.pin_other] - p.vertices[problem.pin_vertex]
    pin_row = abs(float(v[problem.pin_other] @ rot90(edge)))
    pin_res = max(pin_v, pin_row)
    if pin_res > tolerances.eq_tol:
        violations.append(("pin", pin_res))
    rates = _strut_rates(p, framework.struts, v)
    margin = float(np.min(rates)) - (expansion.eps - tolerances.strut_tol)
    if margin < 0.0:
        violations.append(("struts", margin))
    speed = float(np.max(np.abs(v)))
    if speed > problem.bound + tolerances.eq_tol:
        violations.append(("box", speed))
    if expansion.eps <= tolerances.strut_tol:
        violations.append(("eps", expansion.eps))
    return ExpansionReport(
        ok=not violations,
        max_bar_residual=max_bar,
        pin_residual=pin_res,
        min_strut_margin=margin,
        max_speed=speed,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class CertificateReport:
    ok: bool
    t_min: float
    t_mass: float
    max_load: float
    violations: tuple


def validate_certificate(
    framework: Framework,
    cert: StressCertificate,
    tolerances: ToleranceProfile = ToleranceProfile(),
) -> CertificateReport:
    """Nonnegativity, unit strut mass, and vertex equilibrium, recomputed."""
    violations = []
    t_min = float(np.min(cert.t)) if len(cert.t) else 0.0
    if t_min < 0.0:
        violations.append(("negative_t", t_min))
    mass = float(np.sum(np.abs(cert.t)))
    if abs(mass - 1.0) > tolerances.eq_tol:
        violations.append(("mass", mass))
    loads = apply_stress_load(framework, cert)
    max_load = float(np.max(np.hypot(loads[:, 0], loads[:, 1])))
    if max_load > tolerances.eq_tol:
        violations.append(("equilibrium", max_load))
    return CertificateReport(
        ok=not violations,
        t_min=t_min,
        t_mass=mass,
        max_load=max_load,
        violations=tuple(violations),
    )
