"""Dense bounded-variable simplex for small equality-form linear programs.

Solves  maximize c . x  subject to  A x = b  and  lower <= x <= upper,
with every bound finite.  Two phases with artificial variables; Dantzig
pricing falls back to seeded-random column choice when the objective
stalls, which breaks degenerate cycles that index-based rules can march
through forever.  The tableau carries the basis inverse explicitly, so
row duals come out as c_B . Binv at no extra cost.

Problems in this package are tiny (tens to a few hundred rows), so a
dense tableau with periodic refactorization is simple and fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import pivot_update

__all__ = ["SimplexResult", "solve_equality_form"]

_SCRAMBLE_PATIENCE = 60
_STALL_BAIL = 600
_REFRESH_EVERY = 96
_PIVOT_FLOOR = 1e-11


@dataclass(frozen=True)
class SimplexResult:
    """Outcome of one solve.

    ``status`` is "optimal", "infeasible", or "iteration_limit".  ``duals``
    holds one multiplier per row of A; ``reduced_costs`` one value per
    structural variable.  ``basis`` (row -> column index, artificials
    included) and ``vstatus`` (-1 basic, 0 at lower, 1 at upper, per
    structural variable) can be fed back in as ``warm``.
    """

    status: str
    x: np.ndarray
    objective: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    basis: tuple
    vstatus: tuple
    iterations: int


@dataclass(frozen=True)
class _Attempt:
    """One two-phase pass; ``sealed`` means the verdict was re-checked on a
    freshly factorized tableau rather than on accumulated updates."""

    status: str
    x: np.ndarray
    objective: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    basis: tuple
    vstatus: tuple
    iterations: int
    sealed: bool


def _values(T, basis, status, lo, hi, total):
    val = np.where(status == 1, hi, lo)
    val[status == -1] = 0.0
    val[basis] = T[:, -1] - T[:, :total] @ val
    return val


def _refactorize(T, work, basis, b) -> bool:
    try:
        fresh = np.linalg.solve(work[:, basis], np.hstack([work, b[:, None]]))
    except np.linalg.LinAlgError:
        return False
    if not np.all(np.isfinite(fresh)):
        return False
    T[:] = fresh
    return True


def _optimize(T, work, b, basis, status, lo, hi, costs, allow, tol, max_iter,
              refresh_every=_REFRESH_EVERY, pad_scale=1e-8, seed=0,
              ban_exit=None, ban_gate=0.0):
    m, total = work.shape
    movable = (lo < hi) & allow
    # the Harris pad must be sized per variable: one global pad keyed to the
    # widest box lets a ratio test overshoot a narrow box by the wide box's
    # allowance, and that debris is far outside the narrow variable's own
    # feasibility slack
    feas_pad = pad_scale * (1.0 + np.abs(lo) + np.abs(hi))
    # Dantzig pricing switches to seeded-random column choice once the
    # objective stalls: a deterministic tie-breaking rule can revisit the
    # same degenerate bases forever, a randomized one cannot
    rng = np.random.RandomState(seed)
    scramble = False
    stall = 0
    best = -np.inf
    # optimality may only be declared from a freshly refactorized tableau;
    # reduced costs computed off a tableau that has absorbed many rank-one
    # pivot updates can hide an entering candidate
    fresh = False
    it = 0
    pivots = 0
    while it < max_iter:
        it += 1
        val = np.where(status == 1, hi, lo)
        val[status == -1] = 0.0
        xB = T[:, -1] - T[:, :total] @ val
        cB = costs[basis]
        d = costs - cB @ T[:, :total]
        elig = movable & (
            ((status == 0) & (d > tol)) | ((status == 1) & (d < -tol))
        )
        idx = np.nonzero(elig)[0]
        if idx.size == 0:
            if fresh:
                return "optimal", pivots, True
            if not _refactorize(T, work, basis, b):
                # singular basis: the updates were poisoned somewhere, and
                # nothing this pass reports can be trusted
                return "optimal", pivots, False
            fresh = True
            continue

        obj = float(costs @ val) + float(cB @ xB)
        # jittered bounds make honest pivots gain at least ~1e-11 scaled;
        # the stall threshold must sit below that or directed pricing gets
        # benched exactly when it is grinding through a degenerate cluster
        if obj > best + 1e-13 * (1.0 + abs(best)):
            best = obj
            stall = 0
        else:
            stall += 1
            if stall > _SCRAMBLE_PATIENCE:
                scramble = True
            if stall > _STALL_BAIL:
                # no measurable gain for hundreds of pivots: this pass is
                # trapped; hand the problem to the next attempt instead of
                # burning the whole budget on a random walk
                return "iteration_limit", pivots, False

        if scramble:
            e = int(idx[rng.randint(idx.size)])
        else:
            e = int(idx[np.argmax(np.abs(d[idx]))])
        sigma = 1.0 if status[e] == 0 else -1.0
        w = sigma * T[:, e]
        lob = lo[basis]
        hib = hi[basis]
        # two-pass ratio test: a relaxed pass (bounds padded by feas_pad)
        # fixes the step budget, then the pivot row is the largest |w|
        # among rows whose strict ratio fits the budget, so the pivot
        # element is never update noise
        lim = np.full(m, np.inf)
        relaxed = np.full(m, np.inf)
        pos = w > _PIVOT_FLOOR
        neg = w < -_PIVOT_FLOOR
        padb = feas_pad[basis]
        lim[pos] = (xB[pos] - lob[pos]) / w[pos]
        lim[neg] = (xB[neg] - hib[neg]) / w[neg]
        relaxed[pos] = (xB[pos] - lob[pos] + padb[pos]) / w[pos]
        relaxed[neg] = (xB[neg] - hib[neg] - padb[neg]) / w[neg]
        np.maximum(lim, 0.0, out=lim)
        np.maximum(relaxed, 0.0, out=relaxed)
        budget = float(np.min(relaxed))
        span = hi[e] - lo[e]
        if float(np.min(lim)) >= span:
            # entering variable runs all the way to its other bound
            status[e] = 1 - status[e]
            continue
        rows = np.nonzero(lim <= budget)[0]
        rrow = int(rows[np.argmax(np.abs(w[rows]))])
        leave = int(basis[rrow])
        status[leave] = 0 if w[rrow] > 0.0 else 1
        if ban_exit is not None and ban_exit[leave]:
            # an artificial that lands inside the feasibility gate has done
            # its job; letting it back into the basis only gives degenerate
            # cycles more room
            bound = lo[leave] if w[rrow] > 0.0 else hi[leave]
            if abs(bound) <= ban_gate:
                movable[leave] = False
        status[e] = -1
        basis[rrow] = e
        pivot_update(T, rrow, e)
        pivots += 1
        fresh = False
        if pivots % refresh_every == 0 and _refactorize(T, work, basis, b):
            fresh = True
    return "iteration_limit", pivots, False


def _try_warm(work, b, lo, hi, n, m, warm, tol):
    try:
        wbasis, wstat = warm
        wbasis = np.asarray(wbasis, dtype=np.intp).reshape(m)
        wstat = np.asarray(wstat, dtype=np.int8).reshape(n)
    except (TypeError, ValueError):
        return None
    if len(np.unique(wbasis)) != m or wbasis.min() < 0 or wbasis.max() >= n:
        return None
    if not np.all((wstat >= -1) & (wstat <= 1)):
        return None
    if np.count_nonzero(wstat == -1) != m or not np.all(wstat[wbasis] == -1):
        return None
    B = work[:, wbasis]
    try:
        T = np.linalg.solve(B, np.hstack([work, b[:, None]]))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(T)):
        return None
    status = np.concatenate([wstat, np.zeros(m, dtype=np.int8)])
    total = n + m
    val = np.where(status == 1, hi, lo)
    val[status == -1] = 0.0
    xB = T[:, -1] - T[:, :total] @ val
    slack = 100.0 * tol * (1.0 + float(np.max(np.abs(b))))
    if np.any(xB < lo[wbasis] - slack) or np.any(xB > hi[wbasis] + slack):
        return None
    return wbasis.copy(), T, status


def solve_equality_form(
    A, b, c, lower, upper, *, tol: float = 1e-9, max_iter: int | None = None, warm=None
) -> SimplexResult:
    """Maximize ``c . x`` over ``A x = b``, ``lower <= x <= upper``.

    Bounds must be finite (model free variables with a wide box).  ``warm``
    takes a (basis, vstatus) pair from a previous result on a problem with
    identical shape; it is used only when it still encodes a primal
    feasible basis, and silently discarded otherwise.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    lower = np.asarray(lower, dtype=float).ravel()
    upper = np.asarray(upper, dtype=float).ravel()
    m, n = A.shape
    if m < 1 or n < 1:
        raise ValueError("need at least one row and one variable")
    if b.shape != (m,) or c.shape != (n,) or lower.shape != (n,) or upper.shape != (n,):
        raise ValueError("inconsistent problem dimensions")
    if not np.all(np.isfinite(np.concatenate([A.ravel(), b, c, lower, upper]))):
        raise ValueError("all data and bounds must be finite")
    if np.any(lower > upper):
        raise ValueError("lower bound exceeds upper bound")

    total = n + m
    work = np.hstack([A, np.eye(m)])
    if max_iter is None:
        max_iter = 200 + 60 * (m + total)

    # a verdict is trusted only when it was sealed on a fresh factorization
    # and the point it describes is primal feasible; anything else gets one
    # retry with per-pivot refactorization, where poisoned updates cannot
    # arise in the first place
    iterations = 0
    result = None
    trusted = False
    for careful in (False, True):
        result = _attempt(A, b, c, work, lower, upper, tol, max_iter, warm, careful)
        warm = None
        iterations += result.iterations
        trusted = _trusted(result, A, b, lower, upper, tol)
        if trusted:
            break
    return SimplexResult(
        result.status if trusted else "iteration_limit",
        result.x, result.objective, result.duals,
        result.reduced_costs, result.basis, result.vstatus, iterations,
    )


def _trusted(result, A, b, lower, upper, tol) -> bool:
    if result.status == "iteration_limit":
        return False
    if not result.sealed:
        return False
    if result.status == "infeasible":
        return True
    x = result.x
    row_slack = 1e2 * tol * (1.0 + float(np.max(np.abs(b))))
    box_slack = 1e2 * tol * (1.0 + float(max(np.abs(lower).max(), np.abs(upper).max())))
    return (
        float(np.max(np.abs(A @ x - b))) <= row_slack
        and bool(np.all(x >= lower - box_slack))
        and bool(np.all(x <= upper + box_slack))
    )


def _attempt(A, b, c, work, lower, upper, tol, max_iter, warm, careful):
    # the boxes are always widened by deterministic per-variable jitter:
    # distinct ratio limits make every pivot step strictly positive, so the
    # objective climbs monotonically and no basis can ever be revisited.
    # The true bounds come back before values are read, which shifts the
    # point by at most the jitter.  Careful mode is the recovery path for
    # numerically poisoned runs: a bigger jitter, and every pivot decision
    # made on a freshly factorized tableau
    refresh_every = 1 if careful else _REFRESH_EVERY
    pad_scale = 1e-12 if careful else 1e-8
    jitter = 1e-9 if careful else 1e-11
    m, n = A.shape
    total = n + m
    lo = np.concatenate([lower, np.zeros(m)])
    hi = np.concatenate([upper, np.zeros(m)])
    rng = np.random.RandomState(97 * m + n + (1 if careful else 0))
    scale = 1.0 + np.abs(lower) + np.abs(upper)
    lo[:n] -= jitter * scale * rng.uniform(0.5, 1.5, n)
    hi[:n] += jitter * scale * rng.uniform(0.5, 1.5, n)
    iterations = 0
    warmed = _try_warm(work, b, lo, hi, n, m, warm, tol) if warm is not None else None
    if warmed is not None:
        basis, T, status = warmed
    else:
        start = np.where(np.abs(lower) <= np.abs(upper), 0, 1).astype(np.int8)
        # break ties at random: symmetric boxes all parked on the same side
        # leave most rows starting exactly tight, and the repair walk has to
        # tunnel through that fully degenerate cluster one rounding-width
        # step at a time.  Scattering the start spreads the residual over
        # many rows whose artificials then have real width
        tied = np.abs(np.abs(lower) - np.abs(upper)) <= 1e-9 * (1.0 + np.abs(lower))
        start[tied] = rng.randint(2, size=int(tied.sum()))
        vals = np.where(start == 1, hi[:n], lo[:n])
        r = b - A @ vals
        basis = np.arange(n, total, dtype=np.intp)
        status = np.concatenate([start, np.full(m, -1, dtype=np.int8)])
        # widen each artificial box a hair past [0, r]: rows that start
        # tight would otherwise throttle every early step to the width of
        # their own rounding noise, and the walk can jam before it begins
        art_slack = jitter * (1.0 + np.abs(r))
        lo[n:] = np.minimum(r, 0.0) - art_slack
        hi[n:] = np.maximum(r, 0.0) + art_slack
        T = np.hstack([work, b[:, None]])
        c1 = np.concatenate([np.zeros(n), -np.sign(r)])
        allow1 = np.ones(total, dtype=bool)
        art = np.concatenate([np.zeros(n, dtype=bool), np.ones(m, dtype=bool)])
        stat1, it1, seal1 = _optimize(
            T, work, b, basis, status, lo, hi, c1, allow1, tol, max_iter,
            refresh_every, pad_scale,
            seed=7919 * m + n + (104729 if careful else 0), ban_exit=art,
            ban_gate=100.0 * tol * (1.0 + float(np.max(np.abs(b)))),
        )
        iterations += it1
        val = _values(T, basis, status, lo, hi, total)
        feas_gap = float(np.max(np.abs(val[n:])))
        if feas_gap > 100.0 * tol * (1.0 + float(np.max(np.abs(b)))):
            if stat1 != "optimal" or not seal1:
                return _Attempt(
                    "iteration_limit", val[:n], float(c @ val[:n]), np.zeros(m),
                    np.zeros(n), tuple(map(int, basis)),
                    tuple(map(int, status[:n])), iterations, False,
                )
            # a positive gap proves nothing if the claimed phase-1 optimum
            # strays outside its own boxes
            pad = 100.0 * tol * (1.0 + float(max(np.abs(lo).max(), np.abs(hi).max())))
            inside = bool(np.all(val >= lo - pad) and np.all(val <= hi + pad))
            x = val[:n]
            return _Attempt(
                "infeasible", x, float(c @ x), np.zeros(m), np.zeros(n),
                tuple(map(int, basis)), tuple(map(int, status[:n])), iterations, inside,
            )
        # the leftovers are inside the feasibility gate, so phase 1 has done
        # its job even if it stalled grinding out the last digits.  Freeze
        # every artificial box at exactly zero: freezing at the current
        # values instead would bake a gate-sized shift into every row, which
        # is fatal whenever the true objective sits below the gate.  A
        # nonbasic artificial snaps to zero (a shift no wider than its own
        # slack), and one still basic is ejected by the first ratio test
        # that touches its row, since any exit lands on the zero bound
        lo[n:] = 0.0
        hi[n:] = 0.0
        nonbasic_art = status[n:] != -1
        status[n:][nonbasic_art] = 0

    c2 = np.concatenate([c, np.zeros(m)])
    allow2 = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    stat2, it2, seal2 = _optimize(
        T, work, b, basis, status, lo, hi, c2, allow2, tol, max_iter,
        refresh_every, pad_scale,
        seed=7919 * m + n + 13 + (104729 if careful else 0),
    )
    iterations += it2

    # the tableau never depends on the boxes, so restoring them only moves
    # nonbasic variables back onto their true bounds
    lo[:n] = lower
    hi[:n] = upper
    val = _values(T, basis, status, lo, hi, total)
    x = val[:n]
    y = c2[basis] @ T[:, n:total]
    reduced = c - y @ A
    return _Attempt(
        "optimal" if stat2 == "optimal" else "iteration_limit",
        x,
        float(c @ x),
        y,
        reduced,
        tuple(map(int, basis)),
        tuple(map(int, status[:n])),
        iterations,
        seal2,
    )
