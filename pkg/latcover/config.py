from fractions import Fraction

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Logging (COVER_LOG)
    LOG: str = "WARNING"

    # Parallelism
    WORKERS: int = 1

    # Covering verifier
    MAX_DEPTH: int = 12
    RESIDUAL_DEPTH: int = 2
    RESIDUAL_PIECE_LIMIT: int = 4096

    # Optimizer
    DENOMINATOR_CAP: int = 10**6
    SCALE_TOL: str = "1/1000"

    # Run archive
    ARCHIVE_URL: str = "sqlite:///latcover_runs.db"

    model_config = SettingsConfigDict(
        env_prefix="COVER_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        # Don't fail on unrelated entries in .env
        extra="ignore",
    )

    @property
    def scale_tol(self) -> Fraction:
        return Fraction(self.SCALE_TOL)

    @property
    def log_level(self) -> str:
        return self.LOG.upper()


# Try to load settings, provide helpful error message if it fails
try:
    settings = Settings()
except Exception:
    print("=" * 60)
    print("❌ ERROR: Invalid latcover environment variables!")
    print("=" * 60)
    print("\nRecognised variables (all optional):")
    print("  - COVER_LOG          DEBUG | INFO | WARNING | ERROR")
    print("  - COVER_WORKERS      number of worker processes")
    print("  - COVER_MAX_DEPTH    covering verifier subdivision depth")
    print("  - COVER_SCALE_TOL    rational tolerance, e.g. 1/1000")
    print("  - COVER_ARCHIVE_URL  sqlite:///latcover_runs.db")
    print("=" * 60)
    raise
