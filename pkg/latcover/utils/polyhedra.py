"""
Exact vertex/facet conversion through cddlib in fraction mode.

Inequality rows follow the cdd convention b + a·x >= 0; generator rows
are [1, x] for points and [0, r] for rays.
"""
import logging
from fractions import Fraction
from typing import Sequence

import cdd

from ..errors import DegenerateInput, UnboundedInput

logger = logging.getLogger(__name__)

Row = tuple[Fraction, ...]


def _matrix(rows: Sequence[Sequence[Fraction]], rep_type) -> cdd.Matrix:
    mat = cdd.Matrix([list(r) for r in rows], number_type="fraction")
    mat.rep_type = rep_type
    return mat


def _rows(mat: cdd.Matrix) -> list[Row]:
    return [tuple(Fraction(c) for c in mat[i]) for i in range(mat.row_size)]


def hull(points: Sequence[Sequence[Fraction]]) -> tuple[list[int], list[Row]]:
    """
    Indices of the extreme points and the facet rows (b, a...) of their hull.

    The points must span the ambient space; distinct points are expected.
    """
    mat = _matrix([(1, *p) for p in points], cdd.RepType.GENERATOR)
    _, redundant = mat.canonicalize()
    extreme = [i for i in range(len(points)) if i not in redundant]

    inequalities = cdd.Polyhedron(mat).get_inequalities()
    if inequalities.lin_set:
        raise DegenerateInput("points are not full-dimensional")
    # cdd adds 1 >= 0 for some inputs
    facets = [row for row in _rows(inequalities) if any(row[1:])]
    logger.debug("hull: %d points, %d vertices, %d facets", len(points), len(extreme), len(facets))
    return extreme, facets


def vertices(rows: Sequence[Sequence[Fraction]]) -> list[tuple[Fraction, ...]]:
    """
    Vertices of {x : b + a·x >= 0 for every row (b, a...)}.

    Empty when the system is infeasible. Raises UnboundedInput when the
    solution set has a ray or a line.
    """
    generators = cdd.Polyhedron(_matrix(rows, cdd.RepType.INEQUALITY)).get_generators()
    if generators.lin_set:
        raise UnboundedInput("halfspaces contain a line")
    out = []
    for t, *x in _rows(generators):
        if t == 0:
            raise UnboundedInput("halfspaces do not bound a polytope")
        out.append(tuple(c / t for c in x))
    return out
