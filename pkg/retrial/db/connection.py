"""DuckDB connection management and automatic table creation.

Tables are created idempotently (CREATE TABLE IF NOT EXISTS) on every call
to ``ensure_tables()``.  The ``eval`` command calls this before registering
a run.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path

import duckdb

from retrial.config import get_settings

logger = logging.getLogger(__name__)

_DDL = """
CREATE TABLE IF NOT EXISTS bench_runs (
    run_id        VARCHAR PRIMARY KEY,
    created_at    TIMESTAMP DEFAULT current_timestamp,
    config_json   VARCHAR DEFAULT '{}',
    summary_json  VARCHAR DEFAULT '{}'
);

CREATE TABLE IF NOT EXISTS bench_results (
    run_id          VARCHAR NOT NULL,
    variant         VARCHAR NOT NULL,
    method          VARCHAR NOT NULL,
    success_mean    DOUBLE,
    success_std     DOUBLE,
    steps_mean      DOUBLE,
    steps_std       DOUBLE,
    recoveries_mean DOUBLE
);
"""


@lru_cache(maxsize=1)
def get_db() -> duckdb.DuckDBPyConnection:
    """Return a singleton DuckDB connection."""
    db_path = get_settings().resolved_db_path
    Path(db_path).parent.mkdir(parents=True, exist_ok=True)
    logger.info("Opening DuckDB at %s", db_path)
    return duckdb.connect(db_path)


def ensure_tables() -> None:
    """Create all required tables if they don't exist."""
    get_db().execute(_DDL)
    logger.debug("DuckDB tables ensured")
