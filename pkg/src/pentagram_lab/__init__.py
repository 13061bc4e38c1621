"""Pentagram map on closed and twisted polygons.

Geometric and coordinate forms of the map, corner invariants, monodromy
invariants, the invariant Poisson bracket, polygon reconstruction from
corner invariants, and exact independence calculations.
"""

from .corners import CornerVector, pentagram_map_coords, rescale
from .geom import Line, Point, ProjectiveMap
from .invariants import evaluate_invariants, trace_invariants
from .polygon import ClosedPolygon, extract_corners, pentagram_map_geometric

__all__ = [
    "ClosedPolygon",
    "CornerVector",
    "Line",
    "Point",
    "ProjectiveMap",
    "evaluate_invariants",
    "extract_corners",
    "pentagram_map_coords",
    "pentagram_map_geometric",
    "rescale",
    "trace_invariants",
]

__version__ = "0.1.0"
