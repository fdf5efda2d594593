"""Simple SQL-based database migrations."""

from pathlib import Path

from sqlalchemy import create_engine, text

# Migration scripts - each key is a version number
MIGRATIONS = {
    1: """
        -- Create sweeps table
        CREATE TABLE IF NOT EXISTS sweeps (
            id TEXT PRIMARY KEY,
            config TEXT NOT NULL,
            digest TEXT NOT NULL,
            version TEXT,
            created_at DATETIME
        );

        -- Create runs table
        CREATE TABLE IF NOT EXISTS runs (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            sweep_id TEXT NOT NULL,
            seed INTEGER NOT NULL,
            sigma REAL NOT NULL,
            controller TEXT NOT NULL,
            attack_step INTEGER,
            alarm_step INTEGER,
            recovery_steps INTEGER NOT NULL,
            final_distance REAL NOT NULL,
            success BOOLEAN NOT NULL,
            reasons TEXT DEFAULT '[]',
            FOREIGN KEY (sweep_id) REFERENCES sweeps(id)
        );

        CREATE INDEX IF NOT EXISTS ix_runs_sweep ON runs (sweep_id, sigma, controller)
    """,
    2: """
        -- Add label column to sweeps
        ALTER TABLE sweeps ADD COLUMN label TEXT DEFAULT '';
    """,
}

CURRENT_VERSION = max(MIGRATIONS.keys())


def _engine(db_path: Path):
    return create_engine(f"sqlite:///{db_path}")


def get_schema_version(db_path: Path) -> int:
    """Get current schema version from database.

    Returns:
        Schema version number, or 0 if not set
    """
    engine = _engine(db_path)
    try:
        with engine.connect() as conn:
            result = conn.execute(text(
                "SELECT name FROM sqlite_master WHERE type='table' AND name='schema_version'"
            ))
            if not result.fetchone():
                return 0
            row = conn.execute(text("SELECT version FROM schema_version LIMIT 1")).fetchone()
            return row[0] if row else 0
    except Exception:
        return 0
    finally:
        engine.dispose()


def set_schema_version(db_path: Path, version: int) -> None:
    engine = _engine(db_path)
    try:
        with engine.connect() as conn:
            conn.execute(text("CREATE TABLE IF NOT EXISTS schema_version (version INTEGER PRIMARY KEY)"))
            conn.execute(text("DELETE FROM schema_version"))
            conn.execute(text("INSERT INTO schema_version (version) VALUES (:version)"), {"version": version})
            conn.commit()
    finally:
        engine.dispose()


def needs_migration(db_path: Path) -> bool:
    if not db_path.exists():
        return False
    return get_schema_version(db_path) < CURRENT_VERSION


def column_exists(conn, table: str, column: str) -> bool:
    result = conn.execute(text(f"PRAGMA table_info({table})"))
    return column in [row[1] for row in result.fetchall()]


def run_migration(db_path: Path, version: int) -> None:
    """Run a specific migration."""
    if version not in MIGRATIONS:
        raise ValueError(f"Migration version {version} not found")

    engine = _engine(db_path)
    try:
        with engine.connect() as conn:
            if version == 2 and column_exists(conn, "sweeps", "label"):
                conn.commit()
                return

            # SQLite executes one statement at a time
            statements = [s.strip() for s in MIGRATIONS[version].split(';') if s.strip()]
            for statement in statements:
                conn.execute(text(statement))
            conn.commit()
    finally:
        engine.dispose()


def run_migrations(db_path: Path) -> None:
    """Run all pending migrations sequentially."""
    current_version = get_schema_version(db_path)
    for version in range(current_version + 1, CURRENT_VERSION + 1):
        run_migration(db_path, version)
        set_schema_version(db_path, version)


def auto_migrate(db_path: Path) -> bool:
    """Migrate the database if needed.

    Returns:
        True if migration was performed
    """
    if not needs_migration(db_path):
        return False
    run_migrations(db_path)
    return True


def init_schema(db_path: Path) -> None:
    """Initialize a fresh database with current schema."""
    for version in range(1, CURRENT_VERSION + 1):
        run_migration(db_path, version)
    set_schema_version(db_path, CURRENT_VERSION)
