"""Command line entry point: `python -m latcover <subcommand> ...`"""
import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from pydantic_core import to_jsonable_python

from . import __version__
from .commands import COMMON, CommandRouter, covering, geometry, search
from .config import settings
from .errors import (
    AuditFailure,
    CommandError,
    DegenerateInput,
    DimensionMismatch,
    LatcoverError,
    MalformedInput,
    UnboundedInput,
)
from .schemas import ReportOut

logger = logging.getLogger("latcover")

INPUT_ERRORS = (MalformedInput, DegenerateInput, UnboundedInput, DimensionMismatch, ValueError)


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors become exit code 1 instead of argparse's 2."""

    def error(self, message):
        raise CommandError(1, f"{self.prog}: {message}")


def include_router(subparsers, router: CommandRouter) -> None:
    for command in router.commands:
        parser = subparsers.add_parser(command.name, help=command.help, description=command.help)
        for argument in (*command.arguments, *COMMON):
            parser.add_argument(*argument.flags, **argument.options)
        parser.set_defaults(handler=command.handler, command=command.name)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="latcover", description="Exact lattice coverings by simplices and difference bodies")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    # Include routers
    include_router(subparsers, geometry.router)
    include_router(subparsers, covering.router)
    include_router(subparsers, search.router)
    return parser


def configure_logging() -> None:
    logging.basicConfig(
        level=settings.log_level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _write(command: str, payload, out: str | None) -> None:
    document = {"command": command, "generated_at": datetime.now(timezone.utc).isoformat()}
    body = to_jsonable_python(payload)
    if isinstance(body, dict):
        document.update(body)
    else:
        document["result"] = body
    text = json.dumps(document, indent=2, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    """Parse, dispatch and write the report; returns the exit code."""
    configure_logging()
    command, out = None, None
    try:
        args = build_parser().parse_args(argv)
        command, out = args.command, args.out
        payload = args.handler(args)
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else 0
    except CommandError as exc:
        if exc.payload is not None:
            _write(command, exc.payload, out)
        print(f"❌ {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except AuditFailure as exc:
        if exc.report is not None:
            _write(command, ReportOut.from_report(exc.report), out)
        print(f"❌ audit failed: {exc}", file=sys.stderr)
        return 2
    except INPUT_ERRORS as exc:
        print(f"❌ invalid input: {exc}", file=sys.stderr)
        return 1
    except LatcoverError as exc:
        logger.error("%s failed: %s", command, exc)
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    _write(command, payload, out)
    print(f"✅ {command} done", file=sys.stderr)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
