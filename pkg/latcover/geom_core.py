"""
Exact convex-polytope primitives.

Every coordinate is a Fraction. Vertex and halfspace representations are
converted into each other by cddlib in exact mode; volumes come from a
pulling triangulation. Only sampling returns floats.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
import sympy

from .errors import DegenerateInput, DimensionMismatch, UnboundedInput
from .utils import linalg, polyhedra
from .utils.rational import Rational, as_fraction, primitive

if TYPE_CHECKING:
    from .lattice_cover import Lattice

logger = logging.getLogger(__name__)

MAX_DIM = 6


# ============= VALUE TYPES =============

@dataclass(frozen=True, order=True)
class RationalPoint:
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coords:
            raise DegenerateInput("points need at least one coordinate")
        object.__setattr__(self, "coords", tuple(as_fraction(c) for c in self.coords))

    @classmethod
    def of(cls, *values: Rational | str) -> "RationalPoint":
        return cls(tuple(as_fraction(v) for v in values))

    @classmethod
    def origin(cls, dim: int) -> "RationalPoint":
        return cls((Fraction(0),) * dim)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __add__(self, other: "RationalPoint") -> "RationalPoint":
        _same_dim(self.dim, other.dim)
        return RationalPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "RationalPoint") -> "RationalPoint":
        _same_dim(self.dim, other.dim)
        return RationalPoint(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "RationalPoint":
        return RationalPoint(tuple(-a for a in self.coords))

    def scaled(self, s: Rational) -> "RationalPoint":
        s = Fraction(s)
        return RationalPoint(tuple(s * a for a in self.coords))

    def __repr__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class Halfspace:
    """normal · x <= offset, normal a primitive integer vector."""

    normal: tuple[int, ...]
    offset: Fraction

    @classmethod
    def of(cls, normal: Sequence[Rational], offset: Rational) -> "Halfspace":
        # rescale so the normal is primitive; the offset follows
        raw = [Fraction(a) for a in normal] + [Fraction(offset)]
        prim = primitive(raw[:-1])
        nz = next(i for i, a in enumerate(raw[:-1]) if a != 0)
        factor = Fraction(prim[nz]) / raw[nz]
        return cls(prim, raw[-1] * factor)

    def slack(self, x: Sequence[Fraction]) -> Fraction:
        return self.offset - sum((a * b for a, b in zip(self.normal, x)), Fraction(0))

    def contains(self, x: Sequence[Fraction]) -> bool:
        return self.slack(x) >= 0

    def translated(self, v: Sequence[Fraction]) -> "Halfspace":
        return Halfspace(self.normal, self.offset + sum((a * b for a, b in zip(self.normal, v)), Fraction(0)))

    def flipped(self) -> "Halfspace":
        """The closed complement side: normal · x >= offset."""
        return Halfspace(tuple(-a for a in self.normal), -self.offset)


@dataclass(frozen=True)
class VPolytope:
    vertices: tuple[RationalPoint, ...]
    dim: int
    affine_dim: int = field(default=-2, compare=False)

    def __post_init__(self):
        if not self.vertices:
            raise DegenerateInput("a polytope needs at least one vertex")
        for v in self.vertices:
            _same_dim(self.dim, v.dim)
        if self.affine_dim == -2:
            object.__setattr__(self, "affine_dim", affine_dim(self.vertices))

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.dim

    @cached_property
    def hrep(self) -> "HPolytope":
        return to_hrep(self)

    @cached_property
    def vertex_set(self) -> frozenset[RationalPoint]:
        return frozenset(self.vertices)

    def same_as(self, other: "VPolytope") -> bool:
        return self.dim == other.dim and self.vertex_set == other.vertex_set


@dataclass(frozen=True)
class HPolytope:
    """
    A bounded, full-dimensional polytope as an irredundant halfspace list.

    Construction enumerates the vertices of the system: unbounded systems
    raise UnboundedInput, empty or flat ones DegenerateInput, and redundant
    halfspaces are dropped. `checked=True` skips this for facet lists that
    come from a hull.
    """

    halfspaces: tuple[Halfspace, ...]
    dim: int
    checked: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        for h in self.halfspaces:
            _same_dim(self.dim, len(h.normal))
        if self.checked:
            return
        _check_dim(self.dim)
        hs = tuple(dict.fromkeys(self.halfspaces))
        pts = [v.coords for v in _vertices_of_system(hs, self.dim)]
        if not pts:
            raise DegenerateInput("halfspace system is infeasible")
        if linalg.affine_rank(pts) < self.dim:
            raise DegenerateInput("halfspace system is not full-dimensional")
        facets = tuple(h for h in hs if linalg.affine_rank([p for p in pts if h.slack(p) == 0]) == self.dim - 1)
        object.__setattr__(self, "halfspaces", facets)
        object.__setattr__(self, "checked", True)

    def translated(self, v: RationalPoint) -> "HPolytope":
        return HPolytope(tuple(h.translated(v.coords) for h in self.halfspaces), self.dim, checked=True)


@dataclass(frozen=True)
class SimplexFacePair:
    """μ·F_S and -ν·F*_S for a subset S of the standard basis."""

    i: int
    j: int
    subset: tuple[int, ...]
    face: VPolytope
    coface: VPolytope


@dataclass(frozen=True)
class RootMeasure:
    """An exact measure coefficient·√radicand with a squarefree integer radicand."""

    coefficient: Fraction
    radicand: int = 1

    @classmethod
    def of(cls, coefficient: Rational, square: Rational) -> "RootMeasure":
        coefficient, square = Fraction(coefficient), Fraction(square)
        expr = sympy.Rational(coefficient.numerator, coefficient.denominator) * sympy.sqrt(
            sympy.Rational(square.numerator, square.denominator)
        )
        if expr == 0:
            return cls(Fraction(0), 1)
        coeff, root = expr.as_coeff_Mul()
        radicand = int(root**2)
        return cls(Fraction(int(coeff.p), int(coeff.q)), radicand)

    @property
    def expr(self) -> sympy.Expr:
        return sympy.Rational(self.coefficient.numerator, self.coefficient.denominator) * sympy.sqrt(self.radicand)

    def __float__(self) -> float:
        return float(self.coefficient) * math.sqrt(self.radicand)


@dataclass(frozen=True)
class FacetMeasure:
    halfspace: Halfspace
    vertices: tuple[RationalPoint, ...]
    measure: RootMeasure


def _same_dim(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatch(f"dimension {a} != {b}")


def _check_dim(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise DegenerateInput(f"supported ambient dimensions are 1..{MAX_DIM}, got {n}")


# ============= CONSTRUCTORS =============

def polytope(vertices: Iterable[Sequence[Rational]]) -> VPolytope:
    """Convenience: hull of raw coordinate tuples."""
    return convex_hull([RationalPoint.of(*v) for v in vertices])


def standard_simplex(n: int) -> VPolytope:
    """conv{o, e_1, ..., e_n}."""
    pts = [RationalPoint.origin(n)]
    for k in range(n):
        pts.append(RationalPoint(tuple(Fraction(int(i == k)) for i in range(n))))
    return VPolytope(tuple(sorted(pts)), n)


def cube(n: int, side: Rational = 1, centered: bool = True) -> VPolytope:
    """The cube of edge `side`; centred at the origin like {|x_i| <= 1/2} by default."""
    side = Fraction(side)
    lo, hi = (-side / 2, side / 2) if centered else (Fraction(0), side)
    pts = [RationalPoint(c) for c in itertools.product((lo, hi), repeat=n)]
    return VPolytope(tuple(sorted(pts)), n)


def cross_polytope(n: int, radius: Rational = 1) -> VPolytope:
    radius = Fraction(radius)
    pts = []
    for k in range(n):
        for s in (radius, -radius):
            pts.append(RationalPoint(tuple(s if i == k else Fraction(0) for i in range(n))))
    return VPolytope(tuple(sorted(pts)), n)


def regular_like_tetrahedron() -> VPolytope:
    """Alternate vertices of the cube [-1, 1]^3: a regular tetrahedron with edge 2·√2."""
    pts = [RationalPoint.of(*p) for p in [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]]
    return VPolytope(tuple(sorted(pts)), 3, 3)


def affine_dim(points: Sequence[RationalPoint]) -> int:
    return linalg.affine_rank([p.coords for p in points])


def parallelepiped(basis: Sequence[Sequence[Fraction]]) -> VPolytope:
    """{Σ t_i b_i : 0 <= t_i <= 1} for the rows b_i."""
    n = len(basis)
    pts = set()
    for coeffs in itertools.product((0, 1), repeat=n):
        pts.add(RationalPoint(linalg.vec_mat([Fraction(c) for c in coeffs], basis)))
    return VPolytope(tuple(sorted(pts)), len(basis[0]))


def is_simplex(P: VPolytope) -> bool:
    return P.is_full_dimensional and len(P.vertices) == P.dim + 1


# ============= HULLS AND DUALITY =============

def _halfspace(row: Sequence[Fraction]) -> Halfspace:
    # b + a·x >= 0 is (-a)·x <= b
    return Halfspace.of([-a for a in row[1:]], row[0])


def _vertices_of_system(halfspaces: Sequence[Halfspace], n: int) -> list[RationalPoint]:
    """Vertices of a halfspace system; raises UnboundedInput on recession directions."""
    if not halfspaces:
        raise UnboundedInput("no halfspaces")
    rows = [(h.offset, *(Fraction(-a) for a in h.normal)) for h in halfspaces]
    return sorted({RationalPoint(v) for v in polyhedra.vertices(rows)})


def convex_hull(points: Sequence[RationalPoint]) -> VPolytope:
    """Irredundant vertex list of the hull of a full-dimensional point set."""
    if not points:
        raise DegenerateInput("no points")
    n = points[0].dim
    for p in points:
        _same_dim(n, p.dim)
    _check_dim(n)
    uniq = sorted(set(points))
    if linalg.affine_rank([p.coords for p in uniq]) < n:
        raise DegenerateInput(f"points span an affine subspace of dimension < {n}")
    extreme, rows = polyhedra.hull([p.coords for p in uniq])
    P = VPolytope(tuple(uniq[i] for i in extreme), n, n)
    P.__dict__["hrep"] = HPolytope(tuple(_halfspace(r) for r in rows), n, checked=True)
    return P


def to_hrep(P: VPolytope) -> HPolytope:
    if not P.is_full_dimensional:
        raise DegenerateInput("to_hrep needs a full-dimensional polytope")
    _check_dim(P.dim)
    _, rows = polyhedra.hull([v.coords for v in P.vertices])
    return HPolytope(tuple(_halfspace(r) for r in rows), P.dim, checked=True)


def to_vrep(H: HPolytope) -> VPolytope:
    _check_dim(H.dim)
    verts = _vertices_of_system(H.halfspaces, H.dim)
    if not verts:
        raise DegenerateInput("halfspace system is infeasible")
    return VPolytope(tuple(verts), H.dim)


# ============= OPERATIONS =============

def scale(P: VPolytope, s: Rational) -> VPolytope:
    """s·P; s < 0 reflects, s = 0 collapses to the origin (affine_dim 0)."""
    s = Fraction(s)
    if s == 0:
        return VPolytope((RationalPoint.origin(P.dim),), P.dim, 0)
    return VPolytope(tuple(sorted(v.scaled(s) for v in P.vertices)), P.dim, P.affine_dim)


def translate(P: VPolytope, v: RationalPoint) -> VPolytope:
    _same_dim(P.dim, v.dim)
    moved = VPolytope(tuple(sorted(p + v for p in P.vertices)), P.dim, P.affine_dim)
    if "hrep" in P.__dict__:
        moved.__dict__["hrep"] = P.hrep.translated(v)
    return moved


def minkowski_sum(P: VPolytope, Q: VPolytope) -> VPolytope:
    _same_dim(P.dim, Q.dim)
    sums = {p + q for p in P.vertices for q in Q.vertices}
    if len(sums) == 1 or linalg.affine_rank([s.coords for s in sums]) < P.dim:
        # lower-dimensional sums only arise from degenerate summands
        return VPolytope(tuple(sorted(sums)), P.dim)
    return convex_hull(list(sums))


def contains(H: HPolytope, x: RationalPoint) -> bool:
    _same_dim(H.dim, x.dim)
    return all(h.slack(x.coords) >= 0 for h in H.halfspaces)


def intersect(A: HPolytope, B: HPolytope) -> VPolytope | None:
    """Exact A ∩ B, or None when empty. Lower-dimensional results keep their affine_dim."""
    _same_dim(A.dim, B.dim)
    verts = _vertices_of_system(A.halfspaces + B.halfspaces, A.dim)
    if not verts:
        return None
    return VPolytope(tuple(verts), A.dim)


def polytope_from_system(halfspaces: Sequence[Halfspace], dim: int) -> VPolytope | None:
    verts = _vertices_of_system(halfspaces, dim)
    if not verts:
        return None
    return VPolytope(tuple(verts), dim)


# ============= TRIANGULATION AND VOLUME =============

def triangulate(P: VPolytope, apex: int = 0) -> list[tuple[int, ...]]:
    """
    Pulling triangulation of a full-dimensional polytope.

    Returns index tuples into P.vertices. The vertex at position `apex`
    is pulled first; lower faces pull their first vertex in that order.
    """
    if not P.is_full_dimensional:
        raise DegenerateInput("triangulate needs a full-dimensional polytope")
    n = P.dim
    verts = [v.coords for v in P.vertices]
    order = [apex] + [i for i in range(len(verts)) if i != apex]
    rank_of = {v: k for k, v in enumerate(order)}
    incidences = [
        frozenset(i for i, v in enumerate(verts) if h.slack(v) == 0) for h in P.hrep.halfspaces
    ]

    dims: dict[frozenset[int], int] = {}

    def face_dim(face: frozenset[int]) -> int:
        if face not in dims:
            dims[face] = linalg.affine_rank([verts[i] for i in face])
        return dims[face]

    def subfaces(face: frozenset[int], d: int) -> set[frozenset[int]]:
        out = set()
        for inc in incidences:
            sub = face & inc
            if sub != face and len(sub) >= d and face_dim(sub) == d - 1:
                out.add(sub)
        return out

    def pull(face: frozenset[int], d: int) -> list[tuple[int, ...]]:
        first = min(face, key=rank_of.__getitem__)
        if d == 0:
            return [(first,)]
        if len(face) == d + 1:
            return [tuple(sorted(face, key=rank_of.__getitem__))]
        simplices = []
        for sub in subfaces(face, d):
            if first in sub:
                continue
            for s in pull(sub, d - 1):
                simplices.append((first,) + s)
        return simplices

    return pull(frozenset(range(len(verts))), n)


def simplex_volume(points: Sequence[Sequence[Fraction]]) -> Fraction:
    base = points[0]
    n = len(base)
    return abs(linalg.det([linalg.sub(p, base) for p in points[1:]])) / math.factorial(n)


def volume(P: VPolytope, apex: int = 0) -> Fraction:
    if P.dim == 0 or not P.is_full_dimensional:
        raise DegenerateInput("volume needs a full-dimensional polytope; use facet_measure for lower dimensions")
    if len(P.vertices) == P.dim + 1:
        return simplex_volume([v.coords for v in P.vertices])
    verts = [v.coords for v in P.vertices]
    return sum(
        (simplex_volume([verts[i] for i in s]) for s in triangulate(P, apex)),
        Fraction(0),
    )


def flat_measure(points: Sequence[RationalPoint], normal: Sequence[int]) -> RootMeasure:
    """
    (n-1)-measure of the hull of points lying in a hyperplane with the given normal.

    The hull is projected along the coordinate with the largest normal
    entry; the projection shrinks measure by |a_k| / |a|.
    """
    n = len(normal)
    if n == 1:
        return RootMeasure(Fraction(1 if points else 0), 1)
    k = max(range(n), key=lambda i: abs(normal[i]))
    projected = sorted({RationalPoint(tuple(c for i, c in enumerate(p.coords) if i != k)) for p in points})
    if len(projected) < n or linalg.affine_rank([p.coords for p in projected]) < n - 1:
        return RootMeasure(Fraction(0), 1)
    area = volume(convex_hull(projected))
    square = sum(Fraction(a * a) for a in normal)
    return RootMeasure.of(area / abs(normal[k]), square)


def facet_measure(P: VPolytope) -> list[FacetMeasure]:
    if not P.is_full_dimensional:
        raise DegenerateInput("facet_measure needs a full-dimensional polytope")
    out = []
    for h in P.hrep.halfspaces:
        on = tuple(v for v in P.vertices if h.slack(v.coords) == 0)
        out.append(FacetMeasure(h, on, flat_measure(on, h.normal)))
    return out


def total_measure(measures: Iterable[RootMeasure]) -> sympy.Expr:
    return sum((m.expr for m in measures), sympy.Integer(0))


# ============= LATTICE POINTS AND SAMPLING =============

def lattice_coordinates(x: Sequence[Fraction], L: "Lattice") -> tuple[Fraction, ...]:
    return linalg.vec_mat(x, L.inverse)


def lattice_points_in(H: HPolytope, L: "Lattice") -> list[RationalPoint]:
    """Every point of L in the closed polytope H, by scanning the bounding box of lattice coordinates."""
    _same_dim(H.dim, L.dim)
    verts = to_vrep(H).vertices
    coords = [lattice_coordinates(v.coords, L) for v in verts]
    ranges = []
    for k in range(H.dim):
        lo = math.floor(min(c[k] for c in coords))
        hi = math.ceil(max(c[k] for c in coords))
        ranges.append(range(lo, hi + 1))
    found = []
    for combo in itertools.product(*ranges):
        x = RationalPoint(linalg.vec_mat([Fraction(c) for c in combo], L.basis))
        if contains(H, x):
            found.append(x)
    return sorted(found)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def barycentric_weights(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Uniform weights on the n-simplex from sorted uniform spacings; shape (size, n+1)."""
    cuts = np.sort(rng.random((size, n)), axis=1)
    padded = np.concatenate([np.zeros((size, 1)), cuts, np.ones((size, 1))], axis=1)
    return np.diff(padded, axis=1)


def barycentric_grid(rng: np.random.Generator, n: int, size: int, resolution: int = 2**30) -> np.ndarray:
    """
    Integer barycentric numerators over `resolution`, shape (size, n+1).

    Cuts are rounded to the grid before sorting, so every row is
    nonnegative and sums to `resolution` exactly.
    """
    cuts = np.sort(np.floor(rng.random((size, n)) * resolution).astype(np.int64), axis=1)
    padded = np.concatenate(
        [np.zeros((size, 1), dtype=np.int64), cuts, np.full((size, 1), resolution, dtype=np.int64)], axis=1
    )
    return np.diff(padded, axis=1)


def sample_uniform_simplex(S: VPolytope, rng_seed, size: int | None = None) -> np.ndarray:
    """Uniform float sample(s) from a simplex; shape (n,) or (size, n)."""
    if len(S.vertices) != S.dim + 1:
        raise DegenerateInput("sample_uniform_simplex needs a simplex")
    rng = _rng(rng_seed)
    verts = np.array([[float(c) for c in v.coords] for v in S.vertices])
    weights = barycentric_weights(rng, S.dim, 1 if size is None else size)
    points = weights @ verts
    return points[0] if size is None else points
