"""Planar convex-hull helpers."""
from __future__ import annotations

import numpy as np

# Relative slack for on-boundary tests; closed regions count the boundary as inside.
_BOUNDARY_RTOL = 1e-12


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _extreme_filter(points: np.ndarray) -> np.ndarray:
    """Indices that may be hull vertices (Akl-Toussaint octagon heuristic)."""
    if len(points) < 64:
        return np.arange(len(points))
    x, y = points[:, 0], points[:, 1]
    extremes = np.unique([
        np.argmin(x), np.argmin(x + y), np.argmin(y), np.argmax(x - y),
        np.argmax(x), np.argmax(x + y), np.argmax(y), np.argmin(x - y),
    ])
    if len(extremes) < 3:
        return np.arange(len(points))
    polygon = points[extremes[convex_hull(points[extremes])]]
    if len(polygon) < 3:
        return np.arange(len(points))
    # Keep anything not strictly inside the octagon.
    inside = np.ones(len(points), dtype=bool)
    for i in range(len(polygon)):
        a, b = polygon[i], polygon[(i + 1) % len(polygon)]
        inside &= (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) > 0
    return np.flatnonzero(~inside)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Indices of the convex hull vertices in counter-clockwise order.

    Monotone chain; collinear boundary points are not vertices. A single
    distinct point yields one index, collinear input yields its two ends.
    """
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return np.zeros(0, dtype=int)
    candidates = _extreme_filter(points) if len(points) >= 64 else np.arange(len(points))
    sub = points[candidates]
    order = candidates[np.lexsort((candidates, sub[:, 1], sub[:, 0]))]

    lower: list[int] = []
    for index in order:
        while len(lower) > 1 and _cross(points[lower[-2]], points[lower[-1]], points[index]) <= 0:
            lower.pop()
        if lower and np.array_equal(points[lower[-1]], points[index]):
            continue
        lower.append(int(index))
    upper: list[int] = []
    for index in order[::-1]:
        while len(upper) > 1 and _cross(points[upper[-2]], points[upper[-1]], points[index]) <= 0:
            upper.pop()
        if upper and np.array_equal(points[upper[-1]], points[index]):
            continue
        upper.append(int(index))

    hull = lower[:-1] + upper[:-1]
    if not hull:
        hull = lower[:1]
    return np.array(hull, dtype=int)


def polygon_area(vertices: np.ndarray) -> float:
    """Shoelace area of a polygon given in order; zero for fewer than 3 vertices."""
    if len(vertices) < 3:
        return 0.0
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_perimeter(vertices: np.ndarray) -> float:
    """Closed perimeter; a segment counts both directions."""
    if len(vertices) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(vertices - np.roll(vertices, -1, axis=0), axis=1)))


def points_in_convex_polygon(vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Closed membership test against a counter-clockwise convex polygon.

    Degenerate polygons are handled: one vertex is a point, two vertices
    are a segment.
    """
    vertices = np.asarray(vertices, dtype=float)
    points = np.asarray(points, dtype=float)
    x, y = points[:, 0], points[:, 1]
    scale = max(1.0, float(np.max(np.abs(vertices))) if len(vertices) else 1.0)
    tol = _BOUNDARY_RTOL * scale * scale

    if len(vertices) == 0:
        return np.zeros(len(points), dtype=bool)
    if len(vertices) == 1:
        return np.hypot(x - vertices[0, 0], y - vertices[0, 1]) <= _BOUNDARY_RTOL * scale
    if len(vertices) == 2:
        a, b = vertices
        d = b - a
        length2 = float(d @ d)
        cross = d[0] * (y - a[1]) - d[1] * (x - a[0])
        t = ((x - a[0]) * d[0] + (y - a[1]) * d[1]) / length2
        slack = _BOUNDARY_RTOL * scale
        return (np.abs(cross) <= tol * max(1.0, np.sqrt(length2))) & (t >= -slack) & (t <= 1 + slack)

    inside = np.ones(len(points), dtype=bool)
    for i in range(len(vertices)):
        a, b = vertices[i], vertices[(i + 1) % len(vertices)]
        inside &= (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= -tol
    return inside
