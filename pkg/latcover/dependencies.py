"""Input loaders and argument types shared by the subcommands."""
import argparse
import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from contextlib import contextmanager
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError
from sqlalchemy.orm import sessionmaker

from .database import get_db, init_db, make_engine
from .errors import MalformedInput
from .geom_core import RationalPoint, VPolytope, convex_hull, is_simplex
from .lattice_cover import Lattice
from .schemas import LatticeFile, PolytopeFile, SearchConfig
from .utils.rational import parse_rational

logger = logging.getLogger(__name__)


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from exc


def _read_json(path: str | Path) -> Any:
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON in {path}: {exc.msg}", location=f"line {exc.lineno} column {exc.colno}") from exc


def _validate(model: type[BaseModel], data: Any, path: str | Path):
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        location = ".".join(str(p) for p in err["loc"]) or None
        raise MalformedInput(f"{path}: {err['msg']}", location=location) from exc


# ============= FILE LOADERS =============

def load_body(path: str | Path) -> VPolytope:
    data = _validate(PolytopeFile, _read_json(path), path)
    return convex_hull([RationalPoint(c) for c in data.coordinates()])


def load_simplex(path: str | Path) -> VPolytope:
    body = load_body(path)
    if not is_simplex(body):
        raise MalformedInput(f"{path} is not a simplex ({len(body.vertices)} vertices in dimension {body.dim})")
    return body


def load_lattice(path: str | Path) -> Lattice:
    data = _validate(LatticeFile, _read_json(path), path)
    return Lattice(tuple(data.rows()))


def load_config(path: str | Path) -> SearchConfig:
    """SearchConfig from a .toml or .json file."""
    if Path(path).suffix == ".toml":
        try:
            data = tomllib.loads(_read(path))
        except tomllib.TOMLDecodeError as exc:
            raise MalformedInput(f"invalid TOML in {path}: {exc}") from exc
    else:
        data = _read_json(path)
    return _validate(SearchConfig, data, path)


# ============= ARGUMENT TYPES =============

def rational_arg(text: str):
    try:
        return parse_rational(text)
    except MalformedInput as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def point_arg(text: str) -> RationalPoint:
    try:
        return RationalPoint(tuple(parse_rational(part) for part in text.split(",")))
    except MalformedInput as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def grid_arg(text: str) -> list[tuple]:
    """'1:1,1:2,2:1' -> [(1,1), (1,2), (2,1)]"""
    cells = []
    for part in text.split(","):
        mu, sep, nu = part.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"grid cell {part!r} is not mu:nu")
        cells.append((rational_arg(mu), rational_arg(nu)))
    return cells


# ============= ARCHIVE SESSION =============

@contextmanager
def archive_session(url: str | None = None):
    """Session on the run archive; tables are created on demand."""
    if url:
        engine = make_engine(url)
        factory = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    else:
        engine, factory = None, None
    init_db(engine)
    sessions = get_db(factory)
    try:
        yield next(sessions)
    finally:
        sessions.close()
