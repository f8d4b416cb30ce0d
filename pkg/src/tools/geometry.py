"""📐 Planar geometry and time primitives.

Pure functions over the immutable models in ``src.models``; safe to call
from any thread.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

from src.models import GeoPoint, Polygon, TimeInterval


def distance(a: GeoPoint, b: GeoPoint) -> float:
    """Euclidean distance in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


def squared_distance(a: GeoPoint, b: GeoPoint) -> float:
    dx = a.x - b.x
    dy = a.y - b.y
    return dx * dx + dy * dy


def centroid(points: Sequence[GeoPoint]) -> GeoPoint:
    """Arithmetic mean of the points.

    Raises:
        ValueError: if ``points`` is empty
    """
    if not points:
        raise ValueError("centroid of an empty point list is undefined")
    # fsum keeps the mean independent of input order
    return GeoPoint(
        x=math.fsum(p.x for p in points) / len(points),
        y=math.fsum(p.y for p in points) / len(points),
    )


def _on_boundary_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool:
    cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
    if cross != 0:
        return False
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def point_in_polygon(p: GeoPoint, poly: Polygon) -> bool:
    """Ray-casting containment test; points on the boundary count as inside."""
    ring = poly.ring
    n = len(ring)
    inside = False
    j = n - 1
    for i in range(n):
        a, b = ring[i], ring[j]
        if _on_boundary_segment(p, a, b):
            return True
        if (a.y > p.y) != (b.y > p.y):
            x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x
            if p.x < x_cross:
                inside = not inside
        j = i
    return inside


def interval_overlaps(a: TimeInterval, b: TimeInterval) -> bool:
    """Closed-interval overlap; shared endpoints overlap."""
    return a.begin <= b.end and b.begin <= a.end
