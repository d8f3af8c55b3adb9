"""
Generalized difference bodies μK − νK.

Covers the closed-form volume ratio for simplices, the constructive
decomposition of μTₙ − νTₙ into one piece per subset of the basis,
mixed-volume profiles by exact interpolation, and bound audits.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Sequence

import sympy

from .audit import AuditReport
from .errors import DegenerateInput
from .geom_core import (
    RationalPoint,
    SimplexFacePair,
    VPolytope,
    intersect,
    minkowski_sum,
    scale,
    standard_simplex,
    volume,
)
from .utils.rational import Rational

logger = logging.getLogger(__name__)

DEFAULT_GRID: tuple[tuple[Fraction, Fraction], ...] = tuple(
    (Fraction(m), Fraction(v))
    for m, v in [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (1, Fraction(1, 2))]
)


@dataclass(frozen=True)
class RatioPolynomial:
    """vol(μK − νK)/vol(K) = Σ cᵢ μ^i ν^(n−i)."""

    n: int
    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coefficients) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} coefficients, got {len(self.coefficients)}")

    def __call__(self, mu: Rational, nu: Rational) -> Fraction:
        mu, nu = Fraction(mu), Fraction(nu)
        return sum(
            (c * mu**i * nu ** (self.n - i) for i, c in enumerate(self.coefficients)),
            Fraction(0),
        )

    @classmethod
    def for_simplex(cls, n: int) -> "RatioPolynomial":
        return cls(n, tuple(Fraction(comb(n, i) ** 2) for i in range(n + 1)))

    @classmethod
    def from_profile(cls, profile: Sequence[Fraction]) -> "RatioPolynomial":
        """Coefficients from mixed volumes W₀..Wₙ of (K, −K)."""
        n = len(profile) - 1
        vol = profile[0]
        return cls(n, tuple(comb(n, i) * profile[n - i] / vol for i in range(n + 1)))


@dataclass(frozen=True)
class DecompositionPiece:
    pair: SimplexFacePair
    body: VPolytope
    claimed_volume: Fraction


def _positive(name: str, value: Rational) -> Fraction:
    value = Fraction(value)
    if value <= 0:
        raise DegenerateInput(f"{name} must be positive, got {value}")
    return value


# ============= DIFFERENCE BODIES =============

def general_difference_body(K: VPolytope, mu: Rational, nu: Rational) -> VPolytope:
    """μK + (−ν)K, irredundant."""
    mu, nu = _positive("mu", mu), _positive("nu", nu)
    if not K.is_full_dimensional:
        raise DegenerateInput("general_difference_body needs a full-dimensional body")
    return minkowski_sum(scale(K, mu), scale(K, -nu))


def difference_body(K: VPolytope) -> VPolytope:
    return general_difference_body(K, 1, 1)


def rs_ratio_formula(n: int, mu: Rational, nu: Rational) -> Fraction:
    """Σ C(n,i)² μ^i ν^(n−i)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return RatioPolynomial.for_simplex(n)(mu, nu)


def volume_ratio(K: VPolytope, mu: Rational, nu: Rational) -> Fraction:
    return volume(general_difference_body(K, mu, nu)) / volume(K)


def verify_theorem1(n: int, mu: Rational, nu: Rational) -> dict:
    """Closed form and hull computation side by side for the standard simplex."""
    formula = rs_ratio_formula(n, mu, nu)
    geometric = volume(general_difference_body(standard_simplex(n), mu, nu)) * factorial(n)
    return {"n": n, "mu": Fraction(mu), "nu": Fraction(nu), "formula": formula, "geometric": geometric, "match": formula == geometric}


# ============= DECOMPOSITION =============

def _unit(n: int, k: int) -> RationalPoint:
    return RationalPoint(tuple(Fraction(int(i == k)) for i in range(n)))


def _face(n: int, subset: Iterable[int], factor: Fraction) -> VPolytope:
    pts = [RationalPoint.origin(n)] + [_unit(n, k).scaled(factor) for k in subset]
    return VPolytope(tuple(sorted(pts)), n)


def simplex_decomposition(n: int, mu: Rational, nu: Rational) -> list[DecompositionPiece]:
    """One piece μF_S − νF*_S per subset S of {e₁..eₙ}, ordered by |S| then lexicographically."""
    if not 1 <= n <= 5:
        raise DegenerateInput("simplex_decomposition supports 1 <= n <= 5")
    mu, nu = _positive("mu", mu), _positive("nu", nu)
    pieces = []
    for i in range(n + 1):
        for j, subset in enumerate(itertools.combinations(range(n), i), start=1):
            rest = tuple(k for k in range(n) if k not in subset)
            face = _face(n, subset, mu)
            coface = _face(n, rest, -nu)
            pair = SimplexFacePair(i=i, j=j, subset=subset, face=face, coface=coface)
            claimed = mu**i * nu ** (n - i) / (factorial(i) * factorial(n - i))
            pieces.append(DecompositionPiece(pair, minkowski_sum(face, coface), claimed))
    return pieces


def _label(piece: DecompositionPiece) -> str:
    return f"F[{piece.pair.i},{piece.pair.j}]"


def _separating_facet(A: VPolytope, B: VPolytope) -> str | None:
    """A facet of one body with the other entirely on its closed outer side."""
    for first, second in ((A, B), (B, A)):
        for h in first.hrep.halfspaces:
            if all(h.slack(v.coords) <= 0 for v in second.vertices):
                return f"{h.normal}·x = {h.offset}"
    return None


def intersection_volume(A: VPolytope, B: VPolytope) -> tuple[Fraction, str]:
    """Exact volume of A ∩ B with a note on how it was decided."""
    separator = _separating_facet(A, B)
    if separator is not None:
        return Fraction(0), f"separated by {separator}"
    common = intersect(A.hrep, B.hrep)
    if common is None:
        return Fraction(0), "empty"
    if not common.is_full_dimensional:
        return Fraction(0), f"affine dimension {common.affine_dim}"
    return volume(common), "full-dimensional overlap"


def verify_decomposition(pieces: Sequence[DecompositionPiece], body: VPolytope) -> AuditReport:
    report = AuditReport("decomposition")
    H = body.hrep
    for piece in pieces:
        worst = min(h.slack(v.coords) for h in H.halfspaces for v in piece.body.vertices)
        report.add(f"piece_in_body {_label(piece)}", worst, ">=", Fraction(0), "min facet slack of piece vertices")

    for a, b in itertools.combinations(pieces, 2):
        overlap, how = intersection_volume(a.body, b.body)
        report.add(f"interiors_disjoint {_label(a)} {_label(b)}", overlap, "==", Fraction(0), how)

    total = Fraction(0)
    for piece in pieces:
        vol = volume(piece.body)
        total += vol
        report.add(f"piece_volume {_label(piece)}", vol, "==", piece.claimed_volume, f"subset {piece.pair.subset}")

    report.add("volumes_sum_to_body", total, "==", volume(body), f"{len(pieces)} pieces")
    return report


# ============= MIXED VOLUMES =============

def mixed_volume_profile(K: VPolytope, nodes: Sequence[Rational] | None = None) -> list[Fraction]:
    """
    W₀..Wₙ with vol(K − λK) = Σ C(n,i) Wᵢ λ^i.

    vol(K − λK) is computed exactly at n+1 nodes (default λ = 1..n+1)
    and the Vandermonde system is solved in exact arithmetic.
    """
    n = K.dim
    if n > 5:
        raise DegenerateInput("mixed_volume_profile supports n <= 5")
    lams = [Fraction(x) for x in (nodes if nodes is not None else range(1, n + 2))]
    if len(lams) != n + 1 or len(set(lams)) != n + 1:
        raise ValueError(f"need {n + 1} distinct interpolation nodes")
    values = [volume(general_difference_body(K, 1, lam)) for lam in lams]

    vander = sympy.Matrix([[sympy.Rational(lam.numerator, lam.denominator) ** i for i in range(n + 1)] for lam in lams])
    rhs = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in values])
    coeffs = vander.LUsolve(rhs)
    profile = []
    for i in range(n + 1):
        c = sympy.Rational(coeffs[i])
        profile.append(Fraction(int(c.p), int(c.q)) / comb(n, i))
    logger.debug("mixed volume profile of %d-dim body: %s", n, profile)
    return profile


# ============= BOUND AUDITS =============

def _grid_rows(K: VPolytope, mu: Fraction, nu: Fraction) -> list[tuple]:
    n = K.dim
    ratio = volume_ratio(K, mu, nu)
    lam = nu / mu
    rows = [
        (
            f"brunn_minkowski mu={mu} nu={nu}",
            ratio / mu**n,
            ">=",
            (1 + lam) ** n,
            f"vol(K - {lam}K)/vol(K) >= (1+{lam})^{n}",
            "check",
        ),
        (
            f"conjecture_bound mu={mu} nu={nu}",
            ratio,
            "<=",
            rs_ratio_formula(n, mu, nu),
            "vol(muK - nuK)/vol(K) <= sum C(n,i)^2 mu^i nu^(n-i)",
            "conjecture",
        ),
    ]
    return rows


def bound_audit(
    K: VPolytope,
    grid: Iterable[tuple[Rational, Rational]] | None = None,
    workers: int = 1,
) -> AuditReport:
    """Rogers–Shephard and Brunn–Minkowski bounds plus the simplex-maximality conjecture for one body."""
    if not K.is_full_dimensional:
        raise DegenerateInput("bound_audit needs a full-dimensional body")
    n = K.dim
    report = AuditReport("bounds")
    ratio = volume_ratio(K, 1, 1)
    report.add("rogers_shephard_lower", ratio, ">=", Fraction(2**n), "tight iff K centrally symmetric" + (" (tight)" if ratio == 2**n else ""))
    report.add("rogers_shephard_upper", ratio, "<=", Fraction(comb(2 * n, n)), "tight iff K a simplex" + (" (tight)" if ratio == comb(2 * n, n) else ""))

    cells = [(Fraction(m), Fraction(v)) for m, v in (grid if grid is not None else DEFAULT_GRID)]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_rows, [K] * len(cells), *zip(*cells)))
    else:
        results = [_grid_rows(K, m, v) for m, v in cells]
    for rows in results:
        for check, lhs, rel, rhs, context, kind in rows:
            report.add(check, lhs, rel, rhs, context, kind)
    if report.conjecture_violations():
        logger.error("simplex-maximality conjecture violated for a %d-dim body; keep the instance", n)
    return report


def binomial_chain(n: int) -> tuple[int, int, int]:
    """(Σ C(n,i)² 2^i, 2ⁿ C(n,⌊n/2⌋)², 2^(3n))."""
    exact = sum(comb(n, i) ** 2 * 2**i for i in range(n + 1))
    middle = 2**n * comb(n, n // 2) ** 2
    return exact, middle, 2 ** (3 * n)


def binomial_chain_audit(max_n: int = 12) -> AuditReport:
    report = AuditReport("binomial_chain")
    for n in range(1, max_n + 1):
        exact, middle, power = binomial_chain(n)
        # the middle bound starts at n = 2; n = 1 gives 3 > 2
        report.add(
            f"sum_vs_central n={n}",
            exact,
            "<=",
            middle,
            "sum C(n,i)^2 2^i <= 2^n C(n,[n/2])^2",
            kind="check" if n >= 2 else "info",
        )
        report.add(f"sum_vs_power n={n}", exact, "<=", power, "sum C(n,i)^2 2^i <= 2^(3n)")
        report.add(f"central_vs_power n={n}", middle, "<=", power, "2^n C(n,[n/2])^2 <= 2^(3n)")
    return report
