"""Shared polygon generators and hypothesis strategies for the test suite."""

import numpy as np
from hypothesis import strategies as st

from convexify.geometry import Polygon

# Angle jitter of +-0.35 grid cells keeps consecutive gaps within
# [0.3, 1.7] * (2*pi/n): never degenerate, never a half-turn.
_JITTER = 0.35


def _jittered_angles(rng, n):
    return (2.0 * np.pi / n) * (np.arange(n) + _JITTER * rng.uniform(-1.0, 1.0, size=n))


def random_convex_polygon(rng, n=None, radius=1.0):
    """Counterclockwise convex polygon: jittered angles on a circle."""
    if n is None:
        n = rng.randint(5, 13)
    theta = _jittered_angles(rng, n)
    center = rng.uniform(-2.0, 2.0, size=2)
    return Polygon(center + radius * np.column_stack([np.cos(theta), np.sin(theta)]))


def random_star_polygon(rng, n=None):
    """Simple nonconvex polygon, star-shaped about its center.

    Radii live in [0.7, 1.0] except one vertex dented to 0.2, which is
    provably reflex for n >= 9 (the dent sits closer to the center than
    the chord between its neighbors can come).
    """
    if n is None:
        n = rng.randint(9, 15)
    n = max(n, 9)
    theta = _jittered_angles(rng, n)
    r = rng.uniform(0.7, 1.0, size=n)
    r[rng.randint(n)] = 0.2
    center = rng.uniform(-2.0, 2.0, size=2)
    return Polygon(center + np.column_stack([r * np.cos(theta), r * np.sin(theta)]))


def random_rigid_motion(rng, allow_reflection=False):
    """Rotation (optionally reflection) matrix and translation vector."""
    a = rng.uniform(0.0, 2.0 * np.pi)
    c, s = np.cos(a), np.sin(a)
    R = np.array([[c, -s], [s, c]])
    if allow_reflection and rng.rand() < 0.5:
        R = R @ np.array([[1.0, 0.0], [0.0, -1.0]])
    return R, rng.uniform(-5.0, 5.0, size=2)


def apply_motion(p: Polygon, R, t) -> Polygon:
    return Polygon(p.vertices @ R.T + t)


@st.composite
def convex_polygons(draw):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    n = draw(st.integers(min_value=5, max_value=12))
    return random_convex_polygon(np.random.RandomState(seed), n)


@st.composite
def star_polygons(draw):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    n = draw(st.integers(min_value=9, max_value=16))
    return random_star_polygon(np.random.RandomState(seed), n)


@st.composite
def seeded_rngs(draw):
    return np.random.RandomState(draw(st.integers(min_value=0, max_value=2**32 - 1)))
