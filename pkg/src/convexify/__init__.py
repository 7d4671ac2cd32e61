"""Strictly expansive unfolding of simple closed polygons.

Public API is re-exported from the submodules; see README.md for a tour.
"""

from .geometry import (
    Polygon,
    PolygonError,
    ToleranceProfile,
    WindingError,
    dominates,
    edge_lengths,
    interdistance_functional,
    is_convex,
    is_simple,
    pairwise_distances,
    perimeter,
    signed_area,
)

__version__ = "0.1.0"

__all__ = [
    "Polygon",
    "PolygonError",
    "ToleranceProfile",
    "WindingError",
    "dominates",
    "edge_lengths",
    "interdistance_functional",
    "is_convex",
    "is_simple",
    "pairwise_distances",
    "perimeter",
    "signed_area",
    "__version__",
]
