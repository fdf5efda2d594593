"""Database connection for the results store."""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from .migrations import auto_migrate, init_schema

logger = logging.getLogger(__name__)

# Module-level engine and session factory, bound to one database file
_engine = None
_engine_path: Optional[Path] = None
_SessionLocal = None


def init_db(db_path: Path) -> Path:
    """
    Create the database if missing, otherwise bring its schema up to date.

    Args:
        db_path: Path to the SQLite file

    Returns:
        Resolved path to the database
    """
    db_path = Path(db_path).resolve()
    db_path.parent.mkdir(parents=True, exist_ok=True)
    if not db_path.exists():
        init_schema(db_path)
        logger.info("created results database %s", db_path)
    elif auto_migrate(db_path):
        logger.info("migrated results database %s", db_path)
    return db_path


def get_engine(db_path: Path):
    """
    Get or create the engine for `db_path`.

    Raises:
        FileNotFoundError: If the database does not exist
    """
    global _engine, _engine_path, _SessionLocal

    db_path = Path(db_path).resolve()
    if _engine is not None and _engine_path == db_path:
        return _engine
    if not db_path.exists():
        raise FileNotFoundError(f"No results database at {db_path}. Run `sim sweep --db {db_path}` first.")

    reset_engine()
    _engine = create_engine(f"sqlite:///{db_path}", echo=False)
    _engine_path = db_path
    return _engine


def get_session(db_path: Path) -> Session:
    global _SessionLocal

    engine = get_engine(db_path)
    if _SessionLocal is None:
        _SessionLocal = sessionmaker(bind=engine)
    return _SessionLocal()


@contextmanager
def get_db(db_path: Path):
    """
    Context manager for database sessions.

    Usage:
        with get_db(path) as db:
            db.query(Sweep).all()
    """
    session = get_session(db_path)
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def reset_engine():
    """Dispose of the global engine (for testing and when switching databases)."""
    global _engine, _engine_path, _SessionLocal
    if _engine is not None:
        _engine.dispose()
    _engine = None
    _engine_path = None
    _SessionLocal = None
