import logging

from . import CommandRouter, arg
from ..config import settings
from ..dependencies import load_body, load_lattice, load_simplex, point_arg, rational_arg
from ..errors import CommandError
from ..lattice_cover import (
    brute_force_star_number,
    counting_density,
    density,
    hadwiger_audit,
    homothety_check,
    is_covering,
    min_cover_scale,
    multiplicity_density_estimate,
    star_number,
    theorem2_audit,
)
from ..schemas import CertificateOut, MultiplicityOut, ReportOut, encode_point
from ..utils.rational import decimal, to_pair

logger = logging.getLogger(__name__)

router = CommandRouter("covering")

BODY = arg("--body", required=True, help="polytope JSON file")
SIMPLEX = arg("--simplex", required=True, help="simplex JSON file")
LATTICE = arg("--lattice", required=True, help="lattice basis JSON file")
DEPTH = arg("--depth", type=int, default=None, help="maximum subdivision depth (default COVER_MAX_DEPTH)")


def _certified(K, L, depth, workers):
    """Certificate for K + L, exit 2 when it is not a covering."""
    cert = is_covering(K, L, depth, workers=workers)
    if not cert.covered:
        raise CommandError(
            2,
            f"not a covering: {cert.verdict.value}",
            {"certificate": CertificateOut.from_certificate(cert)},
        )
    return cert


@router.command(
    "covering-check",
    "certify whether K + L covers space",
    BODY,
    LATTICE,
    DEPTH,
    arg("--no-volume-check", action="store_true", help="search for a witness even when vol(K) < det(L)"),
)
def covering_check(args):
    K = load_body(args.body)
    L = load_lattice(args.lattice)
    cert = is_covering(K, L, args.depth, check_volume=not args.no_volume_check, workers=args.workers or settings.WORKERS)
    payload = CertificateOut.from_certificate(cert)
    if not cert.covered:
        raise CommandError(2, f"verdict {cert.verdict.value}", payload)
    return payload


@router.command("density", "exact covering density vol(K)/det(L)", BODY, LATTICE)
def covering_density(args):
    K = load_body(args.body)
    L = load_lattice(args.lattice)
    theta = density(K, L)
    return {"density": to_pair(theta), "density_decimal": decimal(theta), "det": to_pair(L.det)}


@router.command(
    "counting-density",
    "lattice points in a centred cube of edge ell times vol(K)/ell^n",
    BODY,
    LATTICE,
    arg("--ell", type=rational_arg, required=True, help="cube edge length"),
)
def covering_counting_density(args):
    K = load_body(args.body)
    L = load_lattice(args.lattice)
    estimate = counting_density(K, L, args.ell)
    exact = density(K, L)
    return {
        "ell": to_pair(args.ell),
        "counting_density": to_pair(estimate),
        "counting_density_decimal": decimal(estimate),
        "density": to_pair(exact),
    }


@router.command(
    "star-number",
    "nonzero lattice points of the difference body",
    BODY,
    LATTICE,
    arg("--brute-force", action="store_true", help="cross-check with pairwise intersections"),
)
def covering_star_number(args):
    K = load_body(args.body)
    L = load_lattice(args.lattice)
    alpha = star_number(K, L)
    payload = {"star_number": alpha}
    if args.brute_force:
        oracle = brute_force_star_number(K, L)
        payload["brute_force"] = oracle
        if oracle != alpha:
            raise CommandError(2, f"star number {alpha} but brute force found {oracle}", payload)
    return payload


@router.command("hadwiger-audit", "difference-body bound on the star number of a covering", BODY, LATTICE, DEPTH)
def covering_hadwiger(args):
    K = load_body(args.body)
    L = load_lattice(args.lattice)
    cert = _certified(K, L, args.depth, args.workers or settings.WORKERS)
    return ReportOut.from_report(hadwiger_audit(K, L, cert))


@router.command(
    "lemma3-estimate",
    "Monte-Carlo estimate of det(L) from the multiplicity of a simplex covering",
    SIMPLEX,
    LATTICE,
    DEPTH,
    arg("--samples", type=int, default=100_000, help="sample points in K"),
    arg("--seed", type=int, required=True, help="random seed"),
)
def covering_multiplicity(args):
    T = load_simplex(args.simplex)
    L = load_lattice(args.lattice)
    cert = _certified(T, L, args.depth, args.workers or settings.WORKERS)
    estimate = multiplicity_density_estimate(T, L, args.samples, args.seed, cert)
    payload = MultiplicityOut.from_estimate(estimate, L.det)
    if not payload.within_4_sigma:
        raise CommandError(2, "estimated det(L) is more than 4 standard errors off", payload)
    return payload


@router.command(
    "homothety",
    "whether K ∩ (K + x) is a positive homothet of K",
    BODY,
    arg("--x", type=point_arg, required=True, help="translation, e.g. 1/2,1/4"),
)
def covering_homothety(args):
    K = load_body(args.body)
    if len(args.x.coords) != K.dim:
        raise CommandError(1, f"--x has {len(args.x.coords)} coordinates, body is {K.dim}-dimensional")
    found = homothety_check(K, args.x)
    if found is None:
        return {"homothetic": False, "lambda": None, "y": None}
    lam, y = found
    return {"homothetic": True, "lambda": to_pair(lam), "y": encode_point(y)}


@router.command(
    "theorem2-audit",
    "star-number case analysis and density lower bound for a simplex covering",
    SIMPLEX,
    LATTICE,
    DEPTH,
    arg("--samples", type=int, default=0, help="multiplicity samples to add to the report"),
    arg("--seed", type=int, default=None, help="random seed, required with --samples"),
)
def covering_theorem2(args):
    if args.samples and args.seed is None:
        raise CommandError(1, "--seed is required with --samples")
    T = load_simplex(args.simplex)
    L = load_lattice(args.lattice)
    cert = _certified(T, L, args.depth, args.workers or settings.WORKERS)
    report = theorem2_audit(T, L, cert, samples=args.samples, seed=args.seed)
    payload = ReportOut.from_report(report)
    if not report.ok:
        raise CommandError(2, f"{len(report.failures())} audit checks failed", payload)
    return payload


@router.command(
    "cover-scale",
    "bracket the least t with tK + L a covering",
    BODY,
    LATTICE,
    DEPTH,
    arg("--tol", type=rational_arg, default=None, help="bracket width (default COVER_SCALE_TOL)"),
)
def covering_scale(args):
    K = load_body(args.body)
    L = load_lattice(args.lattice)
    interval = min_cover_scale(K, L, args.tol, args.depth, workers=args.workers or settings.WORKERS)
    logger.info("scale bracket found after %d verifier runs", interval.evaluations)
    upper_density = interval.t_hi ** K.dim * density(K, L)
    return {
        "t_lo": to_pair(interval.t_lo),
        "t_hi": to_pair(interval.t_hi),
        "t_hi_decimal": decimal(interval.t_hi),
        "density_at_t_hi": to_pair(upper_density),
        "lower_verdict": interval.lower.verdict.value if interval.lower is not None else None,
        "evaluations": interval.evaluations,
    }
