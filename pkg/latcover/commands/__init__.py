"""Subcommand registration, one router per group of operations."""
from dataclasses import dataclass, field
from typing import Any, Callable


@dataclass(frozen=True)
class Arg:
    flags: tuple[str, ...]
    options: dict = field(default_factory=dict)


def arg(*flags: str, **options) -> Arg:
    return Arg(flags, options)


@dataclass
class Command:
    name: str
    help: str
    handler: Callable[[Any], Any]
    arguments: tuple[Arg, ...]


class CommandRouter:
    """Collects subcommands the way an API router collects endpoints."""

    def __init__(self, tag: str):
        self.tag = tag
        self.commands: list[Command] = []

    def command(self, name: str, help: str, *arguments: Arg):
        def register(handler):
            self.commands.append(Command(name, help, handler, arguments))
            return handler

        return register


# options every subcommand accepts
COMMON = (
    arg("--out", default=None, help="write the JSON report here instead of stdout"),
    arg("--workers", type=int, default=None, help="worker processes (default COVER_WORKERS)"),
)
