import json
import logging

from . import CommandRouter, arg
from ..config import settings
from ..dependencies import archive_session, load_config, load_simplex
from ..errors import CommandError
from ..geom_core import standard_simplex
from ..models import AuditRecord, SearchRun
from ..optimizer import optimize_lattice, write_history_csv
from ..schemas import SearchConfig, SearchResultOut, SearchRunResponse, encode_number, encode_point
from ..utils.rational import decimal

logger = logging.getLogger(__name__)

router = CommandRouter("search")

ARCHIVE_URL = arg("--archive-url", default=None, help="SQLAlchemy URL of the run archive (default COVER_ARCHIVE_URL)")


def _archive(db, cfg: SearchConfig, result) -> SearchRun:
    """Store the winner and its audit rows as one run."""
    run = SearchRun(
        dim=cfg.dim,
        seed=cfg.seed,
        method=cfg.method,
        restarts=cfg.restarts,
        iterations=cfg.iterations,
        config=cfg.model_dump_json(),
        best_density=str(result.best_density),
        best_density_decimal=decimal(result.best_density),
        density_value=float(result.best_density),
        basis=json.dumps([encode_point(row) for row in result.best_basis]),
        label=result.label,
        verdict=result.certificate.verdict.value,
    )
    db.add(run)
    db.flush()  # run id for the audit rows

    for report in result.audits:
        for row in report.rows:
            db.add(AuditRecord(
                run_id=run.id,
                report=report.title,
                check=row.check,
                relation=row.relation,
                lhs=json.dumps(encode_number(row.lhs)),
                rhs=json.dumps(encode_number(row.rhs)),
                satisfied=row.satisfied,
                kind=row.kind,
            ))

    db.commit()
    db.refresh(run)
    logger.info("archived run %d", run.id)
    return run


@router.command(
    "optimize",
    "search for a low-density lattice covering by a simplex and certify the winner",
    arg("--simplex", default=None, help="simplex JSON file"),
    arg("--n", type=int, default=None, help="use the standard simplex of this dimension"),
    arg("--config", default=None, help="search config (.toml or .json)"),
    arg("--seed", type=int, required=True, help="random seed"),
    arg("--restarts", type=int, default=None),
    arg("--iterations", type=int, default=None),
    arg("--method", choices=["nelder-mead", "anneal"], default=None),
    arg("--depth", type=int, default=None, help="verifier depth for certification"),
    arg("--history-csv", default=None, help="write the best-so-far history here"),
    arg("--archive", action="store_true", help="store the certified winner in the run archive"),
    ARCHIVE_URL,
)
def optimize(args):
    if (args.simplex is None) == (args.n is None):
        raise CommandError(1, "give exactly one of --simplex and --n")
    K = load_simplex(args.simplex) if args.simplex else standard_simplex(args.n)

    cfg = load_config(args.config) if args.config else SearchConfig(dim=K.dim)
    overrides = {"dim": K.dim, "seed": args.seed, "workers": args.workers or cfg.workers or settings.WORKERS}
    for name in ("restarts", "iterations", "method", "depth"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    cfg = SearchConfig.model_validate({**cfg.model_dump(), **overrides})

    result = optimize_lattice(K, cfg)
    if args.history_csv:
        write_history_csv(result, args.history_csv)

    payload = SearchResultOut.from_result(result)
    if args.archive:
        with archive_session(args.archive_url or settings.ARCHIVE_URL) as db:
            run = _archive(db, cfg, result)
            return {"run_id": run.id, **payload.model_dump()}
    return payload


@router.command(
    "runs",
    "list archived search runs",
    ARCHIVE_URL,
    arg("--limit", type=int, default=20),
    arg("--id", type=int, default=None, help="show a single run with its audit rows"),
)
def runs(args):
    with archive_session(args.archive_url or settings.ARCHIVE_URL) as db:
        if args.id is not None:
            run = db.query(SearchRun).filter(SearchRun.id == args.id).first()
            if not run:
                raise CommandError(1, f"run {args.id} not found")
            return SearchRunResponse.model_validate(run)

        found = (
            db.query(SearchRun)
            .order_by(SearchRun.density_value, SearchRun.created_at.desc())
            .limit(args.limit)
            .all()
        )
        return [SearchRunResponse.model_validate(r).model_dump(exclude={"records"}) for r in found]
