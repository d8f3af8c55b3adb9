from fractions import Fraction

from . import CommandRouter, arg
from ..config import settings
from ..diffbody import (
    RatioPolynomial,
    bound_audit,
    general_difference_body,
    mixed_volume_profile,
    simplex_decomposition,
    verify_decomposition,
    verify_theorem1,
)
from ..dependencies import grid_arg, load_body, rational_arg
from ..errors import CommandError
from ..geom_core import standard_simplex, volume
from ..schemas import ReportOut, encode_point
from ..utils.rational import decimal, to_pair

router = CommandRouter("geometry")

BODY = arg("--body", required=True, help="polytope JSON file")
MU = arg("--mu", type=rational_arg, default=Fraction(1), help="rational, e.g. 2 or 3/2")
NU = arg("--nu", type=rational_arg, default=Fraction(1), help="rational, e.g. 1 or 1/2")
DIM = arg("--n", type=int, required=True, help="dimension of the standard simplex")


@router.command("diffbody", "vertices and volume of mu*K - nu*K", BODY, MU, NU)
def difference_body(args):
    K = load_body(args.body)
    D = general_difference_body(K, args.mu, args.nu)
    vol = volume(D)
    ratio = vol / volume(K)
    return {
        "dim": D.dim,
        "vertices": [encode_point(v) for v in D.vertices],
        "volume": to_pair(vol),
        "ratio": to_pair(ratio),
        "ratio_decimal": decimal(ratio),
    }


@router.command("verify-theorem1", "closed-form ratio against the hull computation for the standard simplex", DIM, MU, NU)
def theorem1(args):
    result = verify_theorem1(args.n, args.mu, args.nu)
    payload = {
        "n": result["n"],
        "mu": to_pair(result["mu"]),
        "nu": to_pair(result["nu"]),
        "formula": to_pair(result["formula"]),
        "geometric": to_pair(result["geometric"]),
        "match": result["match"],
    }
    if not result["match"]:
        raise CommandError(2, f"formula {result['formula']} != geometric {result['geometric']}", payload)
    return payload


@router.command("decompose", "face-pair decomposition of mu*T - nu*T and its verification", DIM, MU, NU)
def decompose(args):
    pieces = simplex_decomposition(args.n, args.mu, args.nu)
    body = general_difference_body(standard_simplex(args.n), args.mu, args.nu)
    report = verify_decomposition(pieces, body)
    payload = {
        "pieces": [
            {
                "i": p.pair.i,
                "j": p.pair.j,
                "subset": list(p.pair.subset),
                "claimed_volume": to_pair(p.claimed_volume),
                "vertices": [encode_point(v) for v in p.body.vertices],
            }
            for p in pieces
        ],
        "body_volume": to_pair(volume(body)),
        "report": ReportOut.from_report(report),
    }
    if not report.ok:
        raise CommandError(2, f"{len(report.failures())} decomposition checks failed", payload)
    return payload


@router.command(
    "mixed-volumes",
    "mixed volumes W_0..W_n of (K, -K) by exact interpolation",
    BODY,
    arg("--nodes", default=None, help="comma separated interpolation nodes (default 1..n+1)"),
)
def mixed_volumes(args):
    K = load_body(args.body)
    nodes = [rational_arg(x) for x in args.nodes.split(",")] if args.nodes else None
    profile = mixed_volume_profile(K, nodes)
    poly = RatioPolynomial.from_profile(profile)
    return {
        "dim": K.dim,
        "volume": to_pair(volume(K)),
        "profile": [to_pair(w) for w in profile],
        "ratio_coefficients": [to_pair(c) for c in poly.coefficients],
    }


@router.command(
    "bounds-audit",
    "Rogers-Shephard and Brunn-Minkowski bounds and the simplex-maximality conjecture",
    BODY,
    arg("--grid", type=grid_arg, default=None, help="mu:nu cells, e.g. 1:1,1:2,2:1"),
)
def bounds(args):
    K = load_body(args.body)
    report = bound_audit(K, args.grid, workers=args.workers or settings.WORKERS)
    payload = {
        "report": ReportOut.from_report(report),
        "conjecture_violations": len(report.conjecture_violations()),
    }
    if not report.ok:
        raise CommandError(2, f"{len(report.failures())} bound checks failed", payload)
    return payload
