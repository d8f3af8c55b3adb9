"""Exact linear algebra over Fractions; the matrix work goes through sympy."""
from fractions import Fraction
from typing import Sequence

import sympy

Vector = Sequence[Fraction]
Matrix = Sequence[Sequence[Fraction]]


def dot(u: Vector, v: Vector) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def sub(u: Vector, v: Vector) -> tuple[Fraction, ...]:
    return tuple(a - b for a, b in zip(u, v))


def vec_mat(v: Vector, m: Matrix) -> tuple[Fraction, ...]:
    """Row vector times matrix: Σ v_i · m[i]."""
    cols = len(m[0])
    out = [Fraction(0)] * cols
    for coef, row in zip(v, m):
        if coef:
            for j in range(cols):
                out[j] += coef * row[j]
    return tuple(out)


def mat_mul(a: Matrix, b: Matrix) -> list[list[Fraction]]:
    return [list(vec_mat(row, b)) for row in a]


def to_sympy(m: Matrix) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(f.numerator, f.denominator) for f in map(Fraction, row)] for row in m])


def to_fraction(x: sympy.Rational) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def det(m: Matrix) -> Fraction:
    if not m:
        return Fraction(1)
    return to_fraction(to_sympy(m).det(method="bareiss"))


def rank(rows: Matrix) -> int:
    if not rows:
        return 0
    return to_sympy(rows).rank()


def inverse(m: Matrix) -> list[list[Fraction]]:
    """Exact inverse; raises ZeroDivisionError when singular."""
    M = to_sympy(m)
    if M.det(method="bareiss") == 0:
        raise ZeroDivisionError("singular matrix")
    return [[to_fraction(x) for x in row] for row in M.inv().tolist()]


def affine_rank(points: Sequence[Vector]) -> int:
    """Dimension of the affine hull of a point set (-1 when empty)."""
    if not points:
        return -1
    base = points[0]
    return rank([sub(p, base) for p in points[1:]]) if len(points) > 1 else 0
