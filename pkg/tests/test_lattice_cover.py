from fractions import Fraction

import numpy as np
import pytest
import sympy

from latcover.audit import AuditReport
from latcover.errors import DegenerateInput, DimensionMismatch, NotACovering
from latcover.diffbody import difference_body
from latcover.geom_core import RationalPoint, contains, convex_hull, cube, intersect, scale, translate
from latcover.lattice_cover import (
    Lattice,
    Verdict,
    _lambda_chain,
    boundary_overlap,
    brute_force_star_number,
    counting_density,
    covering_candidates,
    density,
    hadwiger_audit,
    homothety_check,
    is_covering,
    min_cover_scale,
    multiplicity_density_estimate,
    relative_boundary_overlap,
    star_number,
    theorem2_audit,
    theorem2_bound,
)
from latcover.utils.rational import decimal


# ============= LATTICE =============

def test_lattice_determinant_and_membership(fary_lattice):
    assert fary_lattice.det == Fraction(1, 3)
    assert fary_lattice.dim == 2
    assert fary_lattice.contains_point(RationalPoint.of("1/3", "1/3"))
    assert not fary_lattice.contains_point(RationalPoint.of("1/3", 0))


def test_unimodular_change_keeps_the_lattice(fary_lattice):
    other = fary_lattice.transformed([[1, 1], [0, 1]])
    assert other.det == fary_lattice.det
    assert all(fary_lattice.contains_point(RationalPoint(row)) for row in other.basis)
    with pytest.raises(DegenerateInput):
        fary_lattice.transformed([[2, 0], [0, 1]])


def test_lattice_rejects_bad_bases():
    with pytest.raises(DegenerateInput):
        Lattice.of([[1, 2], [2, 4]])
    with pytest.raises(DimensionMismatch):
        Lattice.of([[1, 0, 0], [0, 1, 0]])


# ============= COVERING VERIFIER =============

@pytest.mark.parametrize("n", [2, 3, 4])
def test_unit_cube_covers_with_integer_lattice(n):
    cert = is_covering(cube(n, centered=False), Lattice.integer(n), max_depth=4)
    assert cert.verdict is Verdict.COVERED
    assert cert.witness is None


def test_centred_cube_needs_subdivision():
    cert = is_covering(cube(2), Lattice.integer(2), max_depth=4)
    assert cert.covered
    assert cert.depth_used >= 1


def test_shrunken_cube_has_a_volume_deficit():
    K = cube(2, Fraction(9, 10), centered=False)
    assert is_covering(K, Lattice.integer(2)).verdict is Verdict.VOLUME_DEFICIT


def test_shrunken_cube_witness_is_uncovered():
    K = cube(2, Fraction(9, 10), centered=False)
    L = Lattice.integer(2)
    cert = is_covering(K, L, max_depth=6, check_volume=False)
    assert cert.verdict is Verdict.UNCOVERED
    w = cert.witness
    # no translate K + u contains the witness
    for u in cert.candidate_translates:
        assert not contains(translate(K, u).hrep, w)


def test_fary_triangle_lattice_covers(triangle, fary_lattice):
    cert = is_covering(triangle, fary_lattice, max_depth=8)
    assert cert.verdict is Verdict.COVERED
    assert cert.depth_used <= 8
    assert density(triangle, fary_lattice) == Fraction(3, 2)


def test_parallel_verifier_agrees(triangle, fary_lattice):
    serial = is_covering(triangle, fary_lattice, max_depth=8)
    parallel = is_covering(triangle, fary_lattice, max_depth=8, workers=2)
    assert parallel.verdict is serial.verdict is Verdict.COVERED


def test_slightly_shrunken_triangle_is_not_a_covering(triangle, fary_lattice):
    K = scale(triangle, Fraction(99, 100))
    cert = is_covering(K, fary_lattice, max_depth=8)
    assert cert.verdict is Verdict.UNCOVERED
    assert not any(contains(translate(K, u).hrep, cert.witness) for u in cert.candidate_translates)


def test_candidates_include_origin(triangle, fary_lattice):
    candidates = covering_candidates(triangle, fary_lattice)
    assert RationalPoint.origin(2) in candidates
    assert all(fary_lattice.contains_point(u) for u in candidates)


def test_verifier_rejects_mismatched_input(triangle):
    with pytest.raises(DimensionMismatch):
        is_covering(triangle, Lattice.integer(3))
    with pytest.raises(ValueError):
        is_covering(triangle, Lattice.integer(2), max_depth=0)


# ============= DENSITY AND STAR NUMBER =============

def test_counting_density_converges(unit_square):
    L = Lattice.integer(2)
    assert counting_density(unit_square, L, 11) == 1
    assert counting_density(unit_square, L, 10) == Fraction(121, 100)


def test_star_number_of_the_centred_square():
    assert star_number(cube(2), Lattice.integer(2)) == 8


def _random_instance(rng, n):
    while True:
        B = rng.integers(-3, 4, size=(n, n))
        if round(abs(np.linalg.det(B))) >= 1:
            break
    L = Lattice.of([[Fraction(int(c), 2) for c in row] for row in B])
    pts = rng.integers(0, 4, size=(n + 3, n))
    while np.linalg.matrix_rank(pts[1:] - pts[0]) < n:
        pts = rng.integers(0, 4, size=(n + 3, n))
    K = convex_hull([RationalPoint.of(*map(int, p)) for p in pts])
    return K, L


def test_star_number_matches_brute_force():
    rng = np.random.default_rng(99)
    for k in range(10):
        K, L = _random_instance(rng, 2 if k < 6 else 3)
        assert star_number(K, L) == brute_force_star_number(K, L)


def test_hadwiger_audit_on_certified_coverings(triangle, fary_lattice, unit_square):
    report = hadwiger_audit(triangle, fary_lattice, max_depth=8)
    assert report.ok
    row = report.first("star_number_bound")
    assert row.lhs == 13 * Fraction(3, 2)
    assert row.rhs == star_number(triangle, fary_lattice)

    assert hadwiger_audit(unit_square, Lattice.integer(2), max_depth=4).ok


def test_hadwiger_audit_refuses_non_coverings(triangle):
    with pytest.raises(NotACovering):
        hadwiger_audit(triangle, Lattice.integer(2))


# ============= MULTIPLICITY =============

def test_multiplicity_estimate_recovers_the_determinant(triangle, fary_lattice):
    cert = is_covering(triangle, fary_lattice, max_depth=8)
    est = multiplicity_density_estimate(triangle, fary_lattice, 100_000, seed=3, certificate=cert)
    det = float(fary_lattice.det)
    assert abs(est.estimated_det - det) <= 4 * est.det_std_error
    assert est.det_std_error < 1e-2 * det
    assert sum(freq for _, freq in est.histogram) == 100_000
    assert min(j for j, _ in est.histogram) >= 1


def test_multiplicity_estimate_is_reproducible(triangle, fary_lattice):
    a = multiplicity_density_estimate(triangle, fary_lattice, 5_000, seed=11)
    b = multiplicity_density_estimate(triangle, fary_lattice, 5_000, seed=11)
    assert a == b


def test_multiplicity_estimate_needs_a_simplex(unit_square):
    with pytest.raises(DegenerateInput):
        multiplicity_density_estimate(unit_square, Lattice.integer(2), 10, seed=0)


# ============= OVERLAPS =============

def test_triangle_overlap_is_homothetic(triangle):
    lam, y = homothety_check(triangle, RationalPoint.of("1/4", "1/4"))
    assert lam == Fraction(1, 2)
    assert y == RationalPoint.of("1/4", "1/4")


def test_square_overlaps(unit_square):
    assert homothety_check(unit_square, RationalPoint.of("1/2", "1/4")) is None
    lam, y = homothety_check(unit_square, RationalPoint.of("1/2", "1/2"))
    assert (lam, y) == (Fraction(1, 2), RationalPoint.of("1/2", "1/2"))
    assert homothety_check(unit_square, RationalPoint.of(1, 0)) is None


def test_random_interior_translates_of_the_tetrahedron_are_homothetic(tetrahedron):
    rng = np.random.default_rng(5)
    D = difference_body(tetrahedron).hrep
    found = 0
    while found < 200:
        x = RationalPoint(tuple(Fraction(int(c), 64) for c in rng.integers(-63, 64, size=3)))
        if not all(h.slack(x.coords) > 0 for h in D.halfspaces):
            continue
        found += 1
        lam, y = homothety_check(tetrahedron, x)
        overlap = intersect(tetrahedron.hrep, tetrahedron.hrep.translated(x))
        assert translate(scale(tetrahedron, lam), y).same_as(overlap)


def test_random_square_translates():
    rng = np.random.default_rng(8)
    S = cube(2, centered=False)
    for _ in range(20):
        x = RationalPoint(tuple(Fraction(int(c), 8) for c in rng.integers(-7, 8, size=2)))
        found = homothety_check(S, x)
        assert (found is not None) == (abs(x[0]) == abs(x[1]))


def test_boundary_overlaps(triangle):
    u = RationalPoint.of("1/2", 0)
    # T + u covers half of the bottom edge and half of the hypotenuse
    assert relative_boundary_overlap(triangle, u) == 1
    assert sympy.simplify(boundary_overlap(triangle, u) - (sympy.Rational(1, 2) + sympy.sqrt(2) / 2)) == 0
    assert relative_boundary_overlap(triangle, RationalPoint.of(2, 0)) == 0


# ============= LOWER-BOUND CASE ANALYSIS =============

def test_theorem2_bound_renders_exactly():
    assert theorem2_bound(3) == 1 + Fraction(1, 2**16)
    assert decimal(theorem2_bound(3)) == "1.0000152587890625"


def test_theorem2_audit_on_the_fary_lattice(triangle, fary_lattice):
    report = theorem2_audit(triangle, fary_lattice, max_depth=8)
    assert report.ok, [(r.check, r.lhs, r.rhs) for r in report.failures()]
    assert report.first("case").lhs == 2
    final = report.rows[-1]
    assert final.check == "theorem2_bound"
    assert final.satisfied
    assert final.rhs == 1 + Fraction(1, 2**13)


def test_theorem2_audit_with_samples(triangle, fary_lattice):
    report = theorem2_audit(triangle, fary_lattice, max_depth=8, samples=20_000, seed=1)
    assert report.first("multiplicity_det").kind == "check"
    assert report.first("multiplicity_density").kind == "info"


@pytest.mark.parametrize(
    "case, pigeonhole, lambda_kind, power_kind",
    [
        (2, True, "check", "check"),
        (2, False, "info", "info"),
        (1, True, "check", "info"),
        (1, False, "info", "info"),
    ],
)
def test_lambda_chain_is_checked_only_on_the_pigeonhole_neighbour(case, pigeonhole, lambda_kind, power_kind):
    report = AuditReport("theorem2")
    _lambda_chain(report, 3, 20, Fraction(2), Fraction(1, 2), case, pigeonhole)
    assert report.first("case2_lambda_bound").kind == lambda_kind
    assert report.first("case2_power_bound").kind == power_kind
    assert report.first("case2_multiplicity_bound").kind == "check"


def test_theorem2_audit_keeps_the_chain_rows_consistent(triangle, fary_lattice):
    report = theorem2_audit(triangle, fary_lattice, max_depth=8)
    if report.find("case2_lambda_bound"):
        lam_row = report.first("case2_lambda_bound")
        power_row = report.first("case2_power_bound")
        assert ("only touches" in lam_row.context) == (lam_row.kind == "info")
        if lam_row.kind == "info":
            assert power_row.kind == "info"


def test_theorem2_audit_refuses_non_coverings(triangle):
    with pytest.raises(NotACovering):
        theorem2_audit(triangle, Lattice.integer(2))


# ============= MINIMAL COVERING SCALE =============

def test_min_cover_scale_of_the_unit_square(unit_square):
    interval = min_cover_scale(unit_square, Lattice.integer(2), tol=Fraction(1, 1000), max_depth=4)
    assert interval.t_hi == 1
    assert interval.upper.covered
    assert interval.t_hi - interval.t_lo <= Fraction(1, 1000)
    assert interval.lower.verdict is Verdict.VOLUME_DEFICIT


def test_min_cover_scale_brackets_the_fary_scale(triangle, fary_lattice):
    tol = Fraction(1, 20)
    interval = min_cover_scale(triangle, fary_lattice, tol=tol, max_depth=10)
    assert interval.t_lo <= 1 <= interval.t_hi
    assert interval.t_hi - interval.t_lo <= tol
    assert is_covering(scale(triangle, interval.t_hi), fary_lattice, max_depth=10).covered


# ============= INVARIANTS =============

UNIMODULAR = [[2, 1], [1, 1]]


def test_verdicts_do_not_depend_on_the_basis(triangle, fary_lattice):
    scrambled = fary_lattice.transformed(UNIMODULAR)
    assert scrambled.basis != fary_lattice.basis
    assert is_covering(triangle, scrambled, max_depth=8).verdict is Verdict.COVERED

    shrunk = scale(triangle, Fraction(99, 100))
    assert is_covering(shrunk, scrambled, max_depth=8).verdict is Verdict.UNCOVERED

    square = cube(2, Fraction(9, 10), centered=False)
    L = Lattice.integer(2)
    for basis in (L, L.transformed(UNIMODULAR)):
        assert is_covering(square, basis, max_depth=6, check_volume=False).verdict is Verdict.UNCOVERED


def test_covered_certificates_have_density_at_least_one(triangle, fary_lattice, unit_square):
    rng = np.random.default_rng(17)
    cases = [
        (triangle, fary_lattice, 8),
        (unit_square, Lattice.integer(2), 4),
        (cube(2), Lattice.integer(2), 4),
        (cube(3, centered=False), Lattice.integer(3), 4),
        (scale(triangle, 2), fary_lattice.transformed(UNIMODULAR), 8),
    ]
    for _ in range(6):
        K, L = _random_instance(rng, 2)
        cases.append((scale(K, 3), L, 5))
    covered = 0
    for K, L, depth in cases:
        if is_covering(K, L, max_depth=depth).covered:
            covered += 1
            assert density(K, L) >= 1
    assert covered >= 5


def test_min_cover_scale_follows_the_lattice_scale(unit_square):
    tol = Fraction(1, 100)
    base = min_cover_scale(unit_square, Lattice.integer(2), tol=tol, max_depth=4)
    tripled = min_cover_scale(unit_square, Lattice.integer(2).scaled(3), tol=3 * tol, max_depth=4)
    assert base.t_lo <= 1 <= base.t_hi
    assert tripled.t_lo <= 3 <= tripled.t_hi
    assert tripled.t_hi - tripled.t_lo <= 3 * tol
    # the scaled brackets overlap
    assert 3 * base.t_lo <= tripled.t_hi and tripled.t_lo <= 3 * base.t_hi


@pytest.mark.slow
def test_min_cover_scale_of_a_doubled_fary_lattice(triangle, fary_lattice):
    tol = Fraction(1, 20)
    base = min_cover_scale(triangle, fary_lattice, tol=tol, max_depth=10)
    doubled = min_cover_scale(triangle, fary_lattice.scaled(2), tol=2 * tol, max_depth=10)
    assert doubled.t_lo <= 2 <= doubled.t_hi
    assert 2 * base.t_lo <= doubled.t_hi and doubled.t_lo <= 2 * base.t_hi


def test_unit_segment_tiles_the_line():
    segment = convex_hull([RationalPoint.of(0), RationalPoint.of(1)])
    est = multiplicity_density_estimate(segment, Lattice.integer(1), 20_000, seed=2)
    assert [j for j, _ in est.histogram] == [1]
    assert est.estimated_det == pytest.approx(1.0)
