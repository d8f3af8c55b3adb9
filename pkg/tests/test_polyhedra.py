from fractions import Fraction

import pytest

from latcover.errors import DegenerateInput, UnboundedInput
from latcover.utils import linalg, polyhedra

F = Fraction


def test_hull_reports_extreme_points_and_facets():
    points = [(F(0), F(0)), (F(1), F(0)), (F(1, 2), F(1, 4)), (F(0), F(1)), (F(1), F(1))]
    extreme, facets = polyhedra.hull(points)
    assert extreme == [0, 1, 3, 4]
    assert len(facets) == 4
    for b, *a in facets:
        assert all(b + sum(ai * xi for ai, xi in zip(a, p)) >= 0 for p in points)
    assert all(isinstance(c, Fraction) for row in facets for c in row)


def test_hull_of_flat_points_is_rejected():
    with pytest.raises(DegenerateInput):
        polyhedra.hull([(F(0), F(0)), (F(1), F(1)), (F(2), F(2))])


def test_vertices_of_a_triangle_system():
    # x >= 0, y >= 0, x + y <= 1
    rows = [(F(0), F(1), F(0)), (F(0), F(0), F(1)), (F(1), F(-1), F(-1))]
    assert sorted(polyhedra.vertices(rows)) == [(0, 0), (0, 1), (1, 0)]


def test_vertices_of_infeasible_and_unbounded_systems():
    # x >= 1 and x <= 0
    assert polyhedra.vertices([(F(-1), F(1)), (F(0), F(-1))]) == []
    with pytest.raises(UnboundedInput):
        polyhedra.vertices([(F(0), F(1), F(0)), (F(0), F(0), F(1))])
    with pytest.raises(UnboundedInput):
        polyhedra.vertices([(F(1), F(1), F(0)), (F(1), F(-1), F(0))])


def test_exact_matrix_helpers():
    m = [[F(2, 3), F(-1, 3)], [F(-1, 3), F(2, 3)]]
    assert linalg.det(m) == F(1, 3)
    assert linalg.mat_mul(m, linalg.inverse(m)) == [[1, 0], [0, 1]]
    assert linalg.rank([[1, 2, 3], [2, 4, 6]]) == 1
    assert linalg.affine_rank([(F(0), F(0)), (F(1), F(1)), (F(2), F(2))]) == 1
    with pytest.raises(ZeroDivisionError):
        linalg.inverse([[1, 2], [2, 4]])
