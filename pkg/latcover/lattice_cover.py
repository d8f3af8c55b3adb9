"""
Lattices, certified covering verification and the per-instance audits
that hang off a certified covering (star number, multiplicity density,
homothetic overlaps, boundary overlaps and the lower-bound case analysis).
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
import sympy

from .audit import AuditReport, AuditRow
from .config import settings
from .diffbody import difference_body, rs_ratio_formula, volume_ratio
from .errors import (
    AuditFailure,
    DegenerateInput,
    DepthExhausted,
    DimensionMismatch,
    NotACovering,
    ZeroMultiplicity,
)
from .geom_core import (
    FacetMeasure,
    Halfspace,
    RationalPoint,
    RootMeasure,
    VPolytope,
    _rng,
    barycentric_grid,
    contains,
    cube,
    facet_measure,
    flat_measure,
    intersect,
    is_simplex,
    lattice_coordinates,
    lattice_points_in,
    minkowski_sum,
    parallelepiped,
    polytope_from_system,
    scale,
    total_measure,
    translate,
    volume,
)
from .utils import linalg
from .utils.rational import Rational, as_fraction, decimal, exact_root, floor_root

logger = logging.getLogger(__name__)

__all__ = [
    "AuditReport",
    "AuditRow",
    "CoveringCertificate",
    "Lattice",
    "MultiplicityEstimate",
    "ScaleInterval",
    "Verdict",
]

# float slack below this is re-tested exactly
MARGIN = 1e-9
SAMPLE_CHUNK = 10_000


# ============= LATTICE =============

@dataclass(frozen=True)
class Lattice:
    """Integer span of the basis rows; `det` is stored positive."""

    basis: tuple[tuple[Fraction, ...], ...]
    det: Fraction = field(init=False, compare=False)

    def __post_init__(self):
        rows = tuple(tuple(as_fraction(c) for c in row) for row in self.basis)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise DimensionMismatch("a lattice basis must be a square matrix")
        d = linalg.det(rows)
        if d == 0:
            raise DegenerateInput("lattice basis is singular")
        object.__setattr__(self, "basis", rows)
        object.__setattr__(self, "det", abs(d))

    @classmethod
    def of(cls, rows: Sequence[Sequence[Rational | str]]) -> "Lattice":
        return cls(tuple(tuple(as_fraction(c) for c in row) for row in rows))

    @classmethod
    def integer(cls, n: int) -> "Lattice":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def inverse(self) -> list[list[Fraction]]:
        return linalg.inverse(self.basis)

    def scaled(self, s: Rational) -> "Lattice":
        s = Fraction(s)
        return Lattice(tuple(tuple(s * c for c in row) for row in self.basis))

    def transformed(self, unimodular: Sequence[Sequence[int]]) -> "Lattice":
        """Same lattice, basis U·B for an integer U with det ±1."""
        if abs(linalg.det(unimodular)) != 1 or any(Fraction(c).denominator != 1 for row in unimodular for c in row):
            raise DegenerateInput("basis change must be an integer matrix of determinant ±1")
        return Lattice(tuple(tuple(r) for r in linalg.mat_mul(unimodular, self.basis)))

    def point(self, coefficients: Sequence[Rational]) -> RationalPoint:
        return RationalPoint(linalg.vec_mat([Fraction(c) for c in coefficients], self.basis))

    def coordinates(self, x: RationalPoint) -> tuple[Fraction, ...]:
        return lattice_coordinates(x.coords, self)

    def contains_point(self, x: RationalPoint) -> bool:
        return all(c.denominator == 1 for c in self.coordinates(x))

    def fundamental_cell(self) -> VPolytope:
        return parallelepiped(self.basis)


# ============= CERTIFICATES =============

class Verdict(str, Enum):
    COVERED = "Covered"
    UNCOVERED = "UncoveredWitness"
    INCONCLUSIVE = "Inconclusive"
    VOLUME_DEFICIT = "VolumeDeficit"


@dataclass(frozen=True)
class OpenBox:
    """A sub-box of the unit cell in lattice coordinates: corner + [0, 2^-depth]^n."""

    corner: tuple[Fraction, ...]
    depth: int


@dataclass(frozen=True)
class CoveringCertificate:
    verdict: Verdict
    depth_used: int
    candidate_translates: tuple[RationalPoint, ...]
    witness: RationalPoint | None = None
    open_boxes: tuple[OpenBox, ...] = ()
    corner_leaves: int = 0
    union_leaves: int = 0

    @property
    def covered(self) -> bool:
        return self.verdict is Verdict.COVERED


@dataclass(frozen=True)
class MultiplicityEstimate:
    mean_inverse_multiplicity: float
    std_error: float
    samples: int
    estimated_det: float
    histogram: tuple[tuple[int, int], ...] = ()
    exact_rechecks: int = 0

    @property
    def det_std_error(self) -> float:
        return self.estimated_det / self.mean_inverse_multiplicity * self.std_error if self.mean_inverse_multiplicity else 0.0


@dataclass(frozen=True)
class ScaleInterval:
    t_lo: Fraction
    t_hi: Fraction
    upper: CoveringCertificate
    lower: CoveringCertificate | None
    evaluations: int = 0


# ============= COVERING SEARCH =============

@dataclass(frozen=True)
class _CoverProblem:
    n: int
    # facet normals of K written in lattice coordinates, with their positive/negative parts summed
    normals: tuple[tuple[Fraction, ...], ...]
    upper: tuple[Fraction, ...]
    lower: tuple[Fraction, ...]
    # per candidate translate: facet offsets and the same constraints as Halfspaces
    offsets: tuple[tuple[Fraction, ...], ...]
    halfspaces: tuple[tuple[Halfspace, ...], ...]
    max_depth: int
    residual_depth: int
    piece_limit: int


@dataclass
class _SearchOutcome:
    witness: tuple[Fraction, ...] | None = None
    open_boxes: list[OpenBox] = field(default_factory=list)
    depth_used: int = 0
    corner_leaves: int = 0
    union_leaves: int = 0


_COVERED = "covered"


def _build_problem(K: VPolytope, L: Lattice, candidates: Sequence[RationalPoint], max_depth, residual_depth, piece_limit) -> _CoverProblem:
    facets = K.hrep.halfspaces
    normals = tuple(tuple(linalg.dot(row, h.normal) for row in L.basis) for h in facets)
    offsets = tuple(tuple(h.offset + linalg.dot(h.normal, u.coords) for h in facets) for u in candidates)
    halfspaces = tuple(tuple(Halfspace.of(c, off) for c, off in zip(normals, offs)) for offs in offsets)
    return _CoverProblem(
        n=K.dim,
        normals=normals,
        upper=tuple(sum((c for c in row if c > 0), Fraction(0)) for row in normals),
        lower=tuple(sum((c for c in row if c < 0), Fraction(0)) for row in normals),
        offsets=offsets,
        halfspaces=halfspaces,
        max_depth=max_depth,
        residual_depth=residual_depth,
        piece_limit=piece_limit,
    )


def _subtract_translates(problem: _CoverProblem, lo: tuple[Fraction, ...], h: Fraction, meeting: Sequence[int]):
    """
    Remove every meeting translate from the box exactly.

    Returns _COVERED, an interior point of an uncovered piece, or None
    when the piece count exceeds the limit.
    """
    n = problem.n
    box = []
    for i in range(n):
        e = [int(i == k) for k in range(n)]
        box.append(Halfspace.of(e, lo[i] + h))
        box.append(Halfspace.of([-a for a in e], -lo[i]))
    corners = [tuple(lo[i] + h * c[i] for i in range(n)) for c in itertools.product((0, 1), repeat=n)]
    pieces: list[tuple[tuple[Halfspace, ...], list[tuple[Fraction, ...]]]] = [(tuple(box), corners)]

    for idx in meeting:
        T = problem.halfspaces[idx]
        remaining = []
        for system, verts in pieces:
            if any(all(g.slack(v) <= 0 for v in verts) for g in T):
                remaining.append((system, verts))
                continue
            cutting = [g for g in T if any(g.slack(v) < 0 for v in verts)]
            prefix: list[Halfspace] = []
            for g in cutting:
                sub = system + tuple(prefix) + (g.flipped(),)
                piece = polytope_from_system(sub, n)
                if piece is not None and piece.is_full_dimensional:
                    pts = [v.coords for v in piece.vertices]
                    kept = tuple(s for s in sub if sum(1 for p in pts if s.slack(p) == 0) >= n)
                    remaining.append((kept, pts))
                prefix.append(g)
            if len(remaining) > problem.piece_limit:
                return None
        pieces = remaining
        if not pieces:
            return _COVERED

    if not pieces:
        return _COVERED
    verts = pieces[0][1]
    return tuple(sum(v[i] for v in verts) / len(verts) for i in range(n))


def _search(problem: _CoverProblem, root: tuple[Fraction, ...], root_depth: int) -> _SearchOutcome:
    n = problem.n
    outcome = _SearchOutcome(depth_used=root_depth)
    stack = [(root, root_depth, tuple(range(len(problem.offsets))))]
    while stack:
        lo, depth, active = stack.pop()
        h = Fraction(1, 2**depth)
        outcome.depth_used = max(outcome.depth_used, depth)
        base = [linalg.dot(c, lo) for c in problem.normals]
        top = [b + h * u for b, u in zip(base, problem.upper)]
        bottom = [b + h * l for b, l in zip(base, problem.lower)]

        meeting = []
        whole = False
        for idx in active:
            offs = problem.offsets[idx]
            if any(b > o for b, o in zip(bottom, offs)):
                continue
            if all(t <= o for t, o in zip(top, offs)):
                whole = True
                break
            meeting.append(idx)
        if whole:
            outcome.corner_leaves += 1
            continue

        center = tuple(c + h / 2 for c in lo)
        if not meeting:
            outcome.witness = center
            return outcome

        if depth >= problem.residual_depth:
            residual = _subtract_translates(problem, lo, h, meeting)
            if residual == _COVERED:
                outcome.union_leaves += 1
                continue
            if residual is not None:
                outcome.witness = residual
                return outcome

        if depth >= problem.max_depth:
            mid = [b + h * (u + l) / 2 for b, u, l in zip(base, problem.upper, problem.lower)]
            if not any(all(m <= o for m, o in zip(mid, problem.offsets[idx])) for idx in meeting):
                outcome.witness = center
                return outcome
            outcome.open_boxes.append(OpenBox(lo, depth))
            continue

        half = h / 2
        for corner in itertools.product((0, 1), repeat=n):
            child = tuple(c + half * k for c, k in zip(lo, corner))
            stack.append((child, depth + 1, tuple(meeting)))
    return outcome


def covering_candidates(K: VPolytope, L: Lattice) -> list[RationalPoint]:
    """Lattice points u with (K+u) meeting the closed fundamental cell, i.e. u ∈ P − K."""
    region = minkowski_sum(L.fundamental_cell(), scale(K, -1))
    return lattice_points_in(region.hrep, L)


def is_covering(
    K: VPolytope,
    L: Lattice,
    max_depth: int | None = None,
    check_volume: bool = True,
    workers: int = 1,
) -> CoveringCertificate:
    """
    Decide whether K + L covers space by covering one fundamental cell.

    Sub-boxes are dyadic boxes of the cell in lattice coordinates. A box
    is accepted when one translate contains all its corners, or, from
    `residual_depth` on, when subtracting the translates that meet it
    leaves nothing. At `max_depth` the box centre decides between a
    witness and an open box.
    """
    if not K.is_full_dimensional:
        raise DegenerateInput("is_covering needs a full-dimensional body")
    if K.dim != L.dim:
        raise DimensionMismatch(f"body in dimension {K.dim}, lattice in dimension {L.dim}")
    max_depth = settings.MAX_DEPTH if max_depth is None else max_depth
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")

    if check_volume and volume(K) < L.det:
        logger.info("volume %s below determinant %s, no covering possible", volume(K), L.det)
        return CoveringCertificate(Verdict.VOLUME_DEFICIT, 0, ())

    candidates = covering_candidates(K, L)
    problem = _build_problem(K, L, candidates, max_depth, settings.RESIDUAL_DEPTH, settings.RESIDUAL_PIECE_LIMIT)
    n = K.dim
    origin = (Fraction(0),) * n

    if workers > 1:
        roots = [tuple(Fraction(k, 2) for k in corner) for corner in itertools.product((0, 1), repeat=n)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_search, [problem] * len(roots), roots, [1] * len(roots)))
        outcome = _SearchOutcome()
        for part in parts:
            outcome.depth_used = max(outcome.depth_used, part.depth_used)
            outcome.corner_leaves += part.corner_leaves
            outcome.union_leaves += part.union_leaves
            outcome.open_boxes.extend(part.open_boxes)
            if part.witness is not None and outcome.witness is None:
                outcome.witness = part.witness
    else:
        outcome = _search(problem, origin, 0)

    candidates_t = tuple(candidates)
    if outcome.witness is not None:
        point = L.point(outcome.witness)
        H = K.hrep
        if any(contains(H.translated(u), point) for u in candidates):
            logger.error("witness %s is covered after all; reporting the box as open", point)
            return CoveringCertificate(
                Verdict.INCONCLUSIVE, outcome.depth_used, candidates_t, open_boxes=(OpenBox(outcome.witness, max_depth),)
            )
        logger.info("uncovered point %s", point)
        return CoveringCertificate(Verdict.UNCOVERED, outcome.depth_used, candidates_t, witness=point)
    if outcome.open_boxes:
        logger.warning("%d boxes left open at depth %d", len(outcome.open_boxes), max_depth)
        return CoveringCertificate(
            Verdict.INCONCLUSIVE,
            outcome.depth_used,
            candidates_t,
            open_boxes=tuple(outcome.open_boxes),
            corner_leaves=outcome.corner_leaves,
            union_leaves=outcome.union_leaves,
        )
    logger.info(
        "covered: %d corner leaves, %d union leaves, depth %d",
        outcome.corner_leaves,
        outcome.union_leaves,
        outcome.depth_used,
    )
    return CoveringCertificate(
        Verdict.COVERED,
        outcome.depth_used,
        candidates_t,
        corner_leaves=outcome.corner_leaves,
        union_leaves=outcome.union_leaves,
    )


def _require_covering(K: VPolytope, L: Lattice, certificate: CoveringCertificate | None, max_depth: int | None) -> CoveringCertificate:
    if certificate is None:
        certificate = is_covering(K, L, max_depth)
    if not certificate.covered:
        raise NotACovering(f"K + L is not a certified covering (verdict {certificate.verdict.value})")
    return certificate


# ============= DENSITY AND STAR NUMBER =============

def density(K: VPolytope, L: Lattice) -> Fraction:
    return volume(K) / L.det


def counting_density(K: VPolytope, L: Lattice, ell: Rational) -> Fraction:
    """#(L ∩ ℓW) · vol(K) / vol(ℓW) for the centred cube W of unit edge."""
    ell = Fraction(ell)
    if ell <= 0:
        raise ValueError("ell must be positive")
    points = lattice_points_in(cube(K.dim, ell).hrep, L)
    return len(points) * volume(K) / ell**K.dim


def star_number(K: VPolytope, L: Lattice) -> int:
    """Nonzero lattice points of the closed difference body."""
    return len(lattice_points_in(difference_body(K).hrep, L)) - 1


def brute_force_star_number(K: VPolytope, L: Lattice) -> int:
    """Pairwise intersection count over the lattice points of 2·D(K)."""
    H = K.hrep
    region = scale(difference_body(K), 2)
    count = 0
    for u in lattice_points_in(region.hrep, L):
        if not any(u.coords):
            continue
        if intersect(H, H.translated(u)) is not None:
            count += 1
    return count


def hadwiger_audit(
    K: VPolytope,
    L: Lattice,
    certificate: CoveringCertificate | None = None,
    max_depth: int | None = None,
) -> AuditReport:
    """vol(2K − K)/vol(K) · θ(K, L) >= star number, on a certified covering."""
    _require_covering(K, L, certificate, max_depth)
    report = AuditReport("hadwiger")
    ratio = volume_ratio(K, 2, 1)
    theta = density(K, L)
    alpha = star_number(K, L)
    report.add("star_number_bound", ratio * theta, ">=", alpha, f"vol(2K-K)/vol(K) = {ratio}, density = {theta}")
    if not report.ok:
        raise AuditFailure("star-number bound failed on a certified covering", report)
    return report


# ============= MULTIPLICITY =============

def multiplicity_density_estimate(
    K: VPolytope,
    L: Lattice,
    samples: int,
    seed,
    certificate: CoveringCertificate | None = None,
    resolution: int = 2**30,
) -> MultiplicityEstimate:
    """
    Monte-Carlo estimate of det(L) as vol(K)·E[1/j(x)] for x uniform in K.

    Sample points are exact rationals on a barycentric grid; the float
    containment test is only trusted outside a small margin.
    """
    if not is_simplex(K):
        raise DegenerateInput("multiplicity_density_estimate samples simplices only")
    if samples <= 0:
        raise ValueError("samples must be positive")
    if certificate is not None and not certificate.covered:
        raise NotACovering(f"verdict {certificate.verdict.value}")

    n = K.dim
    H = K.hrep
    neighbors = lattice_points_in(difference_body(K).hrep, L)
    A = np.array([[float(a) for a in h.normal] for h in H.halfspaces])
    b = np.array([float(h.offset) for h in H.halfspaces])
    U = np.array([[float(c) for c in u.coords] for u in neighbors])
    offsets = b[None, :] + U @ A.T
    verts = [v.coords for v in K.vertices]
    V = np.array([[float(c) for c in v] for v in verts])

    rng = _rng(seed)
    counts = np.zeros(samples, dtype=np.int64)
    rechecks = 0
    for start in range(0, samples, SAMPLE_CHUNK):
        size = min(SAMPLE_CHUNK, samples - start)
        W = barycentric_grid(rng, n, size, resolution)
        X = (W / resolution) @ V
        slack = offsets[None, :, :] - (X @ A.T)[:, None, :]
        surely_in = (slack > MARGIN).all(axis=2)
        surely_out = (slack < -MARGIN).any(axis=2)
        j = surely_in.sum(axis=1)
        for s, t in zip(*np.nonzero(~surely_in & ~surely_out)):
            rechecks += 1
            x = linalg.vec_mat([Fraction(int(w), resolution) for w in W[s]], verts)
            shifted = linalg.sub(x, neighbors[t].coords)
            if all(h.slack(shifted) >= 0 for h in H.halfspaces):
                j[s] += 1
        counts[start : start + size] = j

    if (counts == 0).any():
        raise ZeroMultiplicity(f"{int((counts == 0).sum())} sampled points are covered by no translate")

    inv = 1.0 / counts
    mean = float(inv.mean())
    std_error = float(inv.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    values, freq = np.unique(counts, return_counts=True)
    logger.debug("multiplicity histogram %s, %d exact rechecks", dict(zip(values.tolist(), freq.tolist())), rechecks)
    return MultiplicityEstimate(
        mean_inverse_multiplicity=mean,
        std_error=std_error,
        samples=samples,
        estimated_det=float(volume(K)) * mean,
        histogram=tuple(zip(values.tolist(), freq.tolist())),
        exact_rechecks=rechecks,
    )


# ============= OVERLAPS =============

def _vertex_centroid(P: VPolytope) -> RationalPoint:
    k = len(P.vertices)
    return RationalPoint(tuple(sum(v[i] for v in P.vertices) / k for i in range(P.dim)))


def homothety_check(K: VPolytope, x: RationalPoint) -> tuple[Fraction, RationalPoint] | None:
    """(λ, y) with K ∩ (K+x) = λK + y exactly, or None."""
    S = intersect(K.hrep, K.hrep.translated(x))
    if S is None or not S.is_full_dimensional:
        return None
    if {h.normal for h in S.hrep.halfspaces} != {h.normal for h in K.hrep.halfspaces}:
        return None
    lam = exact_root(volume(S) / volume(K), K.dim)
    if lam is None:
        return None
    y = _vertex_centroid(S) - _vertex_centroid(K).scaled(lam)
    if not translate(scale(K, lam), y).same_as(S):
        return None
    return lam, y


def facet_overlaps(T: VPolytope, u: RationalPoint) -> list[tuple[FacetMeasure, RootMeasure]]:
    """Each facet of T with the measure of its part inside T + u."""
    if not is_simplex(T):
        raise DegenerateInput("boundary overlaps are defined for simplices")
    own = T.hrep.halfspaces
    moved = T.hrep.translated(u).halfspaces
    out = []
    for fm in facet_measure(T):
        h = fm.halfspace
        piece = polytope_from_system(own + moved + (h.flipped(),), T.dim)
        if piece is None:
            out.append((fm, RootMeasure(Fraction(0), 1)))
        else:
            out.append((fm, flat_measure(piece.vertices, h.normal)))
    return out


def boundary_overlap(T: VPolytope, u: RationalPoint) -> sympy.Expr:
    """Σ over facets F of T of the (n−1)-measure of F ∩ (T+u)."""
    return total_measure(m for _, m in facet_overlaps(T, u))


def _relative(pairs: Sequence[tuple[FacetMeasure, RootMeasure]]) -> Fraction:
    total = Fraction(0)
    for fm, m in pairs:
        if m.coefficient:
            # same hyperplane, same radicand
            total += m.coefficient / fm.measure.coefficient
    return total


def relative_boundary_overlap(T: VPolytope, u: RationalPoint) -> Fraction:
    """Σ_F measure(F ∩ (T+u)) / measure(F); affine-invariant."""
    return _relative(facet_overlaps(T, u))


# ============= LOWER-BOUND CASE ANALYSIS =============

def theorem2_bound(n: int) -> Fraction:
    """1 + 2^-(3n+7)."""
    return 1 + Fraction(1, 2 ** (3 * n + 7))


def theorem2_audit(
    T: VPolytope,
    L: Lattice,
    certificate: CoveringCertificate | None = None,
    max_depth: int | None = None,
    samples: int = 0,
    seed=None,
) -> AuditReport:
    """
    Evaluate both branches of the star-number case split on one covering.

    Rows of kind "check" must hold for every genuine covering; rows that
    only describe the branch not taken are recorded as "info".
    """
    if not is_simplex(T):
        raise DegenerateInput("theorem2_audit needs a simplex")
    n = T.dim
    if n < 2:
        raise DegenerateInput("theorem2_audit needs n >= 2")
    certificate = _require_covering(T, L, certificate, max_depth)

    report = AuditReport("theorem2")
    theta = density(T, L)
    D = difference_body(T)
    neighbors = [u for u in lattice_points_in(D.hrep, L) if any(u.coords)]
    m = len(neighbors)
    report.info("star_number", m)
    report.info("density", theta, decimal(theta))
    if n < 3:
        report.info("dimension", n, "the lower bound is stated for n >= 3; the rows are still valid instances")

    ratio = rs_ratio_formula(n, 2, 1)
    power = 2 ** (3 * n)
    threshold = 2 ** (3 * n + 1)
    case = 1 if m >= threshold else 2
    report.add("ratio_vs_power", ratio, "<=", power, "sum C(n,i)^2 2^i <= 2^(3n)")
    report.info("case", case, f"star number {m} {'>=' if case == 1 else '<'} 2^(3n+1) = {threshold}")

    # case 1: many neighbours
    report.add("case1_exact_ratio", theta, ">=", Fraction(m) / ratio, "density >= m / vol(2T-T)/vol(T)")
    report.add("case1_power_ratio", theta, ">=", Fraction(m, power), "density >= m / 2^(3n)")
    report.add(
        "case1_conclusion",
        Fraction(m, power),
        ">=",
        2,
        "m / 2^(3n) >= 2",
        kind="check" if case == 1 else "info",
    )

    # case 2: a neighbour with a large boundary overlap
    overlaps = {u: facet_overlaps(T, u) for u in neighbors}
    relative = {u: _relative(pairs) for u, pairs in overlaps.items()}
    report.add("case2_boundary_cover", sum(relative.values(), Fraction(0)), ">=", n + 1, "relative overlaps of all neighbours cover every facet")
    if not neighbors:
        return _finish(report, n, theta, T, L, certificate, samples, seed)

    best = max(neighbors, key=lambda u: (relative[u], u))
    report.add("case2_pigeonhole", relative[best], ">=", Fraction(n + 1, m), f"u = {best}")

    absolute = {u: total_measure(mm for _, mm in pairs) for u, pairs in overlaps.items()}
    best_abs = max(neighbors, key=lambda u: (float(absolute[u]), u))
    boundary = total_measure(fm.measure for fm in facet_measure(T))
    report.add("case2_pigeonhole_measure", absolute[best_abs], ">=", boundary / m, f"u = {best_abs}")

    D_h = D.hrep
    interior = [u for u in neighbors if all(h.slack(u.coords) > 0 for h in D_h.halfspaces)]
    chosen = best if best in interior else (max(interior, key=lambda u: (relative[u], u)) if interior else None)
    if chosen is None:
        report.info("case2_homothety", "none", "no neighbour overlaps T in full dimension")
        return _finish(report, n, theta, T, L, certificate, samples, seed)

    note = "" if chosen == best else f"; best neighbour {best} only touches T, using {chosen}"
    hom = homothety_check(T, chosen)
    if hom is None:
        report.add("case2_homothety", 0, "==", 1, f"T ∩ (T+{chosen}) is not a homothet of T{note}")
        return _finish(report, n, theta, T, L, certificate, samples, seed)

    lam, y = hom
    report.info("case2_lambda", lam, f"T ∩ (T+{chosen}) = {lam}T + {y}{note}")
    report.add("case2_overlap_vs_homothety", relative[chosen], "<=", n * lam ** (n - 1), "overlap sits on at most n facets of the homothet")
    _lambda_chain(report, n, m, theta, lam, case, pigeonhole=chosen == best, note=note)
    return _finish(report, n, theta, T, L, certificate, samples, seed)


def _lambda_chain(
    report: AuditReport, n: int, m: int, theta: Fraction, lam: Fraction, case: int, pigeonhole: bool, note: str = ""
) -> None:
    """Rows from the homothety ratio to the density bound; checked only when the pigeonhole neighbour was used."""
    report.add(
        "case2_lambda_bound",
        n * m * lam ** (n - 1),
        ">=",
        n + 1,
        "lambda >= ((n+1)/(mn))^(1/(n-1))" + note,
        kind="check" if pigeonhole else "info",
    )
    report.add("case2_multiplicity_bound", theta, ">=", 1 / (1 - lam**n / 2), "density >= 1/(1 - lambda^n/2)")
    exponent = sympy.Rational((3 * n + 1) * n, n - 1) + 1
    report.add(
        "case2_power_bound",
        theta,
        ">=",
        1 / (1 - sympy.Integer(2) ** (-exponent)),
        f"density >= 1/(1 - 2^-({exponent}))",
        kind="check" if case == 2 and pigeonhole else "info",
    )


def _finish(report: AuditReport, n: int, theta: Fraction, T, L, certificate, samples: int, seed) -> AuditReport:
    if samples:
        estimate = multiplicity_density_estimate(T, L, samples, seed, certificate)
        total = sum(freq for _, freq in estimate.histogram)
        inverse_sum = sum(freq / j for j, freq in estimate.histogram) / total
        excess = sum(freq * (j - 1) / j for j, freq in estimate.histogram) / total
        report.info("multiplicity_density", 1 / inverse_sum, "vol(T) / sum (1/j) vol(T^j), estimated")
        report.info("multiplicity_excess_density", 1 / (1 - excess), "vol(T) / (vol(T) - sum (j-1)/j vol(T^j)), estimated")
        report.add(
            "multiplicity_det",
            abs(estimate.estimated_det - float(L.det)),
            "<=",
            4 * estimate.det_std_error,
            f"estimated det {estimate.estimated_det:.6g} vs {L.det}",
        )
    bound = theorem2_bound(n)
    report.add("theorem2_bound", theta, ">=", bound, f"1 + 2^-({3 * n + 7}) = {decimal(bound)}")
    return report


# ============= MINIMAL COVERING SCALE =============

def min_cover_scale(
    K: VPolytope,
    L: Lattice,
    tol: Rational | None = None,
    max_depth: int | None = None,
    workers: int = 1,
) -> ScaleInterval:
    """
    Bracket the least t with tK + L a covering.

    t_hi is certified Covered; t_lo is certified by a witness or by a
    volume deficit, or is 0.
    """
    tol = settings.scale_tol if tol is None else Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not K.is_full_dimensional:
        raise DegenerateInput("min_cover_scale needs a full-dimensional body")
    n = K.dim
    evaluations = 0

    def check(t: Fraction) -> CoveringCertificate:
        nonlocal evaluations
        evaluations += 1
        return is_covering(scale(K, t), L, max_depth, workers=workers)

    # below the n-th root of det/vol every scale is a volume deficit
    threshold = L.det / volume(K)
    root = exact_root(threshold, n)
    denominator = max(2, math.ceil(2 / tol))
    if root is None:
        lo = floor_root(threshold, n, denominator)
        hi = lo + Fraction(1, denominator)
    else:
        lo = max(root - tol / 2, Fraction(0))
        hi = root
    lower = check(lo) if lo > 0 else None

    upper = None
    for _ in range(64):
        cert = check(hi)
        if cert.covered:
            upper = cert
            break
        if cert.verdict is not Verdict.INCONCLUSIVE:
            lo, lower = hi, cert
        hi *= 2
    if upper is None:
        raise DepthExhausted("no covering scale certified while growing the body")

    while hi - lo > tol:
        mid = (lo + hi) / 2
        cert = check(mid)
        if cert.covered:
            hi, upper = mid, cert
        elif cert.verdict is Verdict.INCONCLUSIVE:
            raise DepthExhausted(f"verifier inconclusive at scale {mid}; bracket [{lo}, {hi}]")
        else:
            lo, lower = mid, cert
    logger.info("minimal covering scale in [%s, %s] after %d checks", lo, hi, evaluations)
    return ScaleInterval(lo, hi, upper, lower, evaluations)
