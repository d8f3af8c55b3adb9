from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from .config import settings


def make_engine(url: str):
    """Engine for the run archive; SQLite files are created on first connect."""
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    return create_engine(
        url,
        pool_pre_ping=True,  # Verify connections before using
        echo=False,
        connect_args=connect_args,
    )


# Create the engine
engine = make_engine(settings.ARCHIVE_URL)

# Create a SessionLocal class for managing archive sessions
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

# Base class for the archive models
Base = declarative_base()


def init_db(bind=None) -> None:
    """Create the archive tables if they are missing."""
    from . import models  # noqa: F401  registers the tables on Base

    Base.metadata.create_all(bind=bind or engine)


def get_db(factory=None):
    """
    Creates a new archive session.
    Automatically closes the session when done.
    """
    db = (factory or SessionLocal)()
    try:
        yield db
    finally:
        db.close()
