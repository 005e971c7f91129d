"""Test cases for the planar hull helpers."""
import numpy as np
import pytest
from scipy.spatial import ConvexHull

from tailcal.core.geometry import (
    convex_hull,
    points_in_convex_polygon,
    polygon_area,
    polygon_perimeter,
)

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def signed_area(vertices):
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def test_convex_hull_square_with_interior_points():
    """Test that interior and edge points are not vertices."""
    points = np.vstack([SQUARE, [[0.5, 0.5], [0.2, 0.7], [0.5, 0.0]]])
    hull = convex_hull(points)
    assert sorted(hull.tolist()) == [0, 1, 2, 3]
    assert signed_area(points[hull]) > 0


def test_convex_hull_matches_qhull():
    """Test the vertex set against scipy on a large random cloud."""
    points = np.random.default_rng(7).normal(size=(2000, 2))
    hull = convex_hull(points)
    assert sorted(hull.tolist()) == sorted(ConvexHull(points).vertices.tolist())
    assert signed_area(points[hull]) > 0


def test_convex_hull_degenerate_inputs():
    """Test empty, single-point, duplicate and collinear inputs."""
    assert convex_hull(np.zeros((0, 2))).tolist() == []
    assert len(convex_hull(np.array([[1.0, 1.0], [1.0, 1.0]]))) == 1
    line = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    assert sorted(convex_hull(line).tolist()) == [0, 3]


def test_polygon_area_and_perimeter():
    """Test shoelace area and closed perimeter."""
    assert polygon_area(SQUARE) == pytest.approx(1.0)
    assert polygon_perimeter(SQUARE) == pytest.approx(4.0)
    assert polygon_area(SQUARE[:2]) == 0.0
    assert polygon_perimeter(SQUARE[:2]) == pytest.approx(2.0)


def test_points_in_convex_polygon_is_closed():
    """Test that boundary points count as inside."""
    queries = np.array([[0.5, 0.5], [1.0, 0.5], [1.0, 1.0], [1.0 + 1e-6, 0.5], [-0.1, -0.1]])
    inside = points_in_convex_polygon(SQUARE, queries)
    assert inside.tolist() == [True, True, True, False, False]


def test_points_in_degenerate_polygons():
    """Test point and segment regions."""
    point = np.array([[2.0, 3.0]])
    assert points_in_convex_polygon(point, np.array([[2.0, 3.0], [2.0, 3.1]])).tolist() == [True, False]
    segment = np.array([[0.0, 0.0], [2.0, 0.0]])
    queries = np.array([[1.0, 0.0], [2.0, 0.0], [2.5, 0.0], [1.0, 0.1]])
    assert points_in_convex_polygon(segment, queries).tolist() == [True, True, False, False]
    assert points_in_convex_polygon(np.zeros((0, 2)), queries).tolist() == [False] * 4
