"""SQLite database: schema creation, settings and run history."""

from __future__ import annotations

import os
import sqlite3
from datetime import datetime, timezone
from pathlib import Path

from py_rigidsq.utils import normalize_key

DB_FILENAME = ".py-rigidsq.db"
HOME_ENV = "RIGIDSQ_HOME"

SCHEMA_SQL = """
CREATE TABLE IF NOT EXISTS config (
    key   TEXT PRIMARY KEY,
    value TEXT NOT NULL
);

CREATE TABLE IF NOT EXISTS runs (
    id          INTEGER PRIMARY KEY AUTOINCREMENT,
    verb        TEXT NOT NULL,
    digest      TEXT NOT NULL,
    status      INTEGER NOT NULL,
    elapsed     REAL NOT NULL DEFAULT 0,
    report_path TEXT,
    run_date    TEXT NOT NULL
);

CREATE INDEX IF NOT EXISTS idx_runs_digest ON runs(digest);
"""

DEFAULTS = {
    "default_depth": "6",
    "default_window_lo": "-4",
    "default_window_hi": "0",
    "default_base": "QQ",
}

KNOWN_KEYS = (*DEFAULTS, "report_dir")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _migrate_schema(conn: sqlite3.Connection) -> None:
    """Apply schema migrations for new columns. Idempotent."""
    migrations = [
        "ALTER TABLE runs ADD COLUMN report_path TEXT",
        "ALTER TABLE runs ADD COLUMN elapsed REAL NOT NULL DEFAULT 0",
    ]
    for sql in migrations:
        try:
            conn.execute(sql)
        except sqlite3.OperationalError:
            pass  # column exists, or the table is not created yet
    conn.commit()


class Database:
    """Wrapper around the py-rigidsq SQLite database."""

    def __init__(self, db_path: Path) -> None:
        self.db_path = db_path
        self.conn = sqlite3.connect(str(db_path))
        self.conn.row_factory = sqlite3.Row
        _migrate_schema(self.conn)

    def close(self) -> None:
        self.conn.close()

    # -- Schema --

    def init_schema(self) -> None:
        self.conn.executescript(SCHEMA_SQL)
        self.conn.commit()

    # -- Config --

    def get_config(self, key: str) -> str | None:
        row = self.conn.execute(
            "SELECT value FROM config WHERE key = ?", (normalize_key(key),)
        ).fetchone()
        return row["value"] if row else None

    def set_config(self, key: str, value: str) -> None:
        key = normalize_key(key)
        if key not in KNOWN_KEYS:
            raise KeyError(f"unknown setting {key!r}; known: {', '.join(KNOWN_KEYS)}")
        self.conn.execute(
            "INSERT INTO config (key, value) VALUES (?, ?) "
            "ON CONFLICT(key) DO UPDATE SET value = excluded.value",
            (key, value),
        )
        self.conn.commit()

    def all_config(self) -> dict[str, str]:
        rows = self.conn.execute("SELECT key, value FROM config ORDER BY key").fetchall()
        return {r["key"]: r["value"] for r in rows}

    # -- Runs --

    def record_run(self, verb: str, digest: str, status: int, elapsed: float,
                   report_path: str | None = None) -> int:
        cur = self.conn.execute(
            "INSERT INTO runs (verb, digest, status, elapsed, report_path, run_date) "
            "VALUES (?, ?, ?, ?, ?, ?)",
            (verb, digest, status, elapsed, report_path, _now()),
        )
        self.conn.commit()
        return cur.lastrowid

    def recent_runs(self, limit: int = 20) -> list[sqlite3.Row]:
        return self.conn.execute(
            "SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,)
        ).fetchall()


def db_home() -> Path:
    env = os.environ.get(HOME_ENV)
    return Path(env).expanduser() if env else Path.home() / ".py-rigidsq"


def find_db() -> Path | None:
    """Try to find an existing py-rigidsq database.

    Checks $RIGIDSQ_HOME first, then ~/.py-rigidsq/.
    """
    candidate = db_home() / DB_FILENAME
    return candidate if candidate.exists() else None


def open_db(db_path: Path | None = None) -> Database:
    """Open the database. If no path given, try to find it."""
    if db_path is None:
        db_path = find_db()
    if db_path is None:
        raise FileNotFoundError(
            "No py-rigidsq database found. Run 'py-rigidsq init' first."
        )
    return Database(db_path)


def init_db(target_path: Path | None = None) -> Database:
    """Create a new database under target_path and write the default settings."""
    target_path = target_path or db_home()
    target_path.mkdir(parents=True, exist_ok=True)
    db = Database(target_path / DB_FILENAME)
    db.init_schema()
    for key, value in DEFAULTS.items():
        db.set_config(key, value)
    return db
