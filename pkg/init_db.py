"""
Run archive initialization script.
Run this to create the search_runs / audit_records tables.
"""
import sys

from sqlalchemy import text

from latcover.config import settings
from latcover.database import init_db, make_engine
from latcover.models import SearchRun


def init_archive(url: str) -> bool:
    """Create all tables and report how many runs are archived"""
    print(f"Creating archive tables in {url} ...")
    try:
        engine = make_engine(url)
        init_db(engine)
        with engine.connect() as conn:
            count = conn.execute(text(f"SELECT COUNT(*) FROM {SearchRun.__tablename__}")).scalar()
    except Exception as e:
        print(f"❌ Archive initialization failed: {e}")
        print("\nTroubleshooting:")
        print("1. Check COVER_ARCHIVE_URL in your .env file")
        print("2. For sqlite, make sure the target directory is writable")
        return False
    print(f"✅ Tables ready ({count} archived runs)")
    return True


if __name__ == "__main__":
    url = sys.argv[1] if len(sys.argv) > 1 else settings.ARCHIVE_URL
    print("🚀 Initializing latcover run archive...\n")
    sys.exit(0 if init_archive(url) else 1)
