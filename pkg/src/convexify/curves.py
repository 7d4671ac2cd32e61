"""Closed curve catalog and discretization.

Every curve is evaluated at parameters s in [0, 2*pi).  Circles and
ellipses use the trigonometric parameter directly; the sampled kinds
(teeth, spiral, polyline) carry a dense backbone polyline and map s
proportionally to arc length, except that a polyline maps s uniformly
per edge so inscribing at the original vertex count reproduces the
polygon exactly.

The two stress-test shapes:

* ``teeth``: the region between the oscillating graphs
  x^2 sin(1/x) - exp(-1/x) and x^2 sin(1/x) + exp(-1/x) over
  [1/((k+1)pi), 1/pi], closed by a vertical edge on the right and a thin
  rectangular detour reaching x = -0.05 on the left.  The branch gap
  2 exp(-1/x) shrinks to 2 exp(-(k+1) pi) at the left truncation, so the
  teeth interlock at exponentially fine scale while staying disjoint.

* ``spiral``: two arms of the odd curve t^2 exp(i/t) (radius 1/theta^2),
  joined through the origin by a straight connector and closed by a
  rectangular detour below the figure at y = -0.15.  The detour runs
  below rather than beside the arms because the outer radius 1/pi^2
  exceeds 0.05: a side detour at x = -0.05 would cut through the arms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Polygon, cumulative_arclength, edge_lengths

__all__ = [
    "Curve",
    "catalog",
    "curve_length",
    "evaluate",
    "inscribe",
    "make_circle",
    "make_ellipse",
    "make_polyline",
    "make_spiral",
    "make_teeth",
    "resample",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Curve:
    kind: str
    params: tuple
    backbone: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.backbone is not None:
            b = np.array(self.backbone, dtype=float, copy=True)
            b.setflags(write=False)
            object.__setattr__(self, "backbone", b)


def make_circle(radius: float = 1.0, center=(0.0, 0.0)) -> Curve:
    if radius <= 0:
        raise ValueError("radius must be positive")
    return Curve("circle", (float(radius), float(center[0]), float(center[1])))


def make_ellipse(a: float, b: float, center=(0.0, 0.0)) -> Curve:
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    return Curve("ellipse", (float(a), float(b), float(center[0]), float(center[1])))


def make_polyline(vertices) -> Curve:
    p = Polygon(vertices)
    return Curve("polyline", (p.n,), backbone=p.vertices)


def _teeth_branch(x: np.ndarray, sign: float) -> np.ndarray:
    return x * x * np.sin(1.0 / x) + sign * np.exp(-1.0 / x)


def make_teeth(teeth_count: int = 2, left_x: float = -0.05) -> Curve:
    """Interlocking-teeth region; ``teeth_count`` half-oscillations survive.

    The branches are truncated at x_min = 1/((teeth_count + 1) pi), where
    both sine terms vanish and the gap is exactly 2 exp(-(teeth_count+1) pi).
    """
    k = int(teeth_count)
    if k < 1:
        raise ValueError("teeth_count must be >= 1")
    if left_x >= 0.0:
        raise ValueError("left_x must be negative to clear the branches")
    phi_max = (k + 1) * math.pi
    # uniform in phi = 1/x resolves every oscillation equally well
    phi = np.linspace(math.pi, phi_max, max(1500, 700 * (k + 1)))
    x = 1.0 / phi
    gap = math.exp(-phi_max)
    x_min = 1.0 / phi_max
    x_max = 1.0 / math.pi
    lower = np.column_stack([x[::-1], _teeth_branch(x[::-1], -1.0)])
    upper = np.column_stack([x, _teeth_branch(x, +1.0)])
    # lower ends at (x_max, -e^-pi) and upper starts at (x_max, +e^-pi), so
    # the right vertical edge is implicit in the concatenation; the two left
    # detour corners close back to lower[0] ~ (x_min, -gap).
    pts = np.vstack([lower, upper, [[left_x, gap], [left_x, -gap]]])
    return Curve("teeth", (k, float(left_x)), backbone=_dedupe(pts))


def make_spiral(turns: int = 1, floor_y: float = -0.15) -> Curve:
    """Double spiral with arms r = 1/theta^2, closed below the figure."""
    t = int(turns)
    if t < 1:
        raise ValueError("turns must be >= 1")
    theta_max = (2 * t + 1) * math.pi
    if floor_y >= -1.0 / math.pi**2:
        raise ValueError("floor_y must lie below the outer endpoints")
    theta = np.linspace(math.pi, theta_max, max(1800, 900 * (2 * t + 1)))
    r = 1.0 / (theta * theta)
    # arm1 traversed outward-to-inward as theta grows; arm2 is its mirror
    arm1 = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    r_out = 1.0 / (math.pi * math.pi)
    # Traversal: arm2 outer-to-inner, through the origin, arm1
    # inner-to-outer, then down/across/up along the floor detour.
    pts = np.vstack(
        [
            -arm1,
            [[0.0, 0.0]],
            arm1[::-1],
            [[-r_out, floor_y], [r_out, floor_y]],
        ]
    )
    return Curve("spiral", (t, float(floor_y)), backbone=_dedupe(pts))


def _dedupe(pts: np.ndarray) -> np.ndarray:
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    # drop a final point equal to the first: closure is implicit
    if keep.sum() > 1 and np.all(pts[keep][-1] == pts[keep][0]):
        last = np.nonzero(keep)[0][-1]
        keep[last] = False
    return pts[keep]


def _backbone_cumlen(curve: Curve) -> np.ndarray:
    b = curve.backbone
    e = np.roll(b, -1, axis=0) - b
    out = np.zeros(len(b) + 1)
    np.cumsum(np.hypot(e[:, 0], e[:, 1]), out=out[1:])
    return out


def curve_length(curve: Curve) -> float:
    """Perimeter; exact for circles, backbone length for sampled kinds."""
    if curve.kind == "circle":
        return TWO_PI * curve.params[0]
    if curve.kind == "ellipse":
        a, b = curve.params[0], curve.params[1]
        t = np.linspace(0.0, TWO_PI, 20001)
        speed = np.hypot(-a * np.sin(t), b * np.cos(t))
        dt = t[1] - t[0]
        return float(dt * (speed.sum() - 0.5 * (speed[0] + speed[-1])))
    return float(_backbone_cumlen(curve)[-1])


def evaluate(curve: Curve, s) -> np.ndarray:
    """Points of the curve at parameters ``s`` (radians), shape (..., 2)."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s) % TWO_PI
    if curve.kind == "circle":
        r, cx, cy = curve.params
        out = np.column_stack([cx + r * np.cos(s), cy + r * np.sin(s)])
    elif curve.kind == "ellipse":
        a, b, cx, cy = curve.params
        out = np.column_stack([cx + a * np.cos(s), cy + b * np.sin(s)])
    elif curve.kind == "polyline":
        verts = curve.backbone
        m = len(verts)
        u = s * (m / TWO_PI)
        k = np.minimum(u.astype(int), m - 1)
        frac = u - k
        nxt = (k + 1) % m
        out = verts[k] * (1.0 - frac)[:, None] + verts[nxt] * frac[:, None]
    else:
        b = curve.backbone
        cum = _backbone_cumlen(curve)
        total = cum[-1]
        target = s * (total / TWO_PI)
        closed = np.vstack([b, b[:1]])
        x = np.interp(target, cum, closed[:, 0])
        y = np.interp(target, cum, closed[:, 1])
        out = np.column_stack([x, y])
    return out[0] if scalar else out


def inscribe(curve: Curve, n: int) -> Polygon:
    """Polygon on the curve at the n evenly spaced parameters 2*pi*k/n."""
    if n < 3:
        raise ValueError("need at least 3 vertices")
    return Polygon(evaluate(curve, TWO_PI * np.arange(n) / n))


def resample(p: Polygon, n: int) -> Polygon:
    """Redistribute n vertices uniformly by arc length, starting at vertex 0."""
    if n < 3:
        raise ValueError("need at least 3 vertices")
    cum = cumulative_arclength(p)
    target = cum[-1] * np.arange(n) / n
    closed = np.vstack([p.vertices, p.vertices[:1]])
    x = np.interp(target, cum, closed[:, 0])
    y = np.interp(target, cum, closed[:, 1])
    return Polygon(np.column_stack([x, y]))


def catalog() -> dict:
    """Named default instances of every built-in curve."""
    return {
        "circle": make_circle(),
        "ellipse": make_ellipse(1.5, 0.8),
        "teeth": make_teeth(),
        "spiral": make_spiral(),
    }
