"""Data Access Objects for the run registry.

All functions accept an optional ``conn`` parameter so callers can share a
transaction.  If omitted, the singleton connection from ``get_db()`` is used.
"""

from __future__ import annotations

import json
import logging
import uuid
from typing import List, Optional

import duckdb

from retrial.bench.summary import Summary
from retrial.db.connection import ensure_tables, get_db

logger = logging.getLogger(__name__)


def _uid() -> str:
    return uuid.uuid4().hex[:16]


# ═══════════════════════════════════════════════════════════════════════════════
# bench_runs / bench_results
# ═══════════════════════════════════════════════════════════════════════════════

def insert_bench_run(
    *,
    config: dict,
    summary: Summary,
    run_id: Optional[str] = None,
    conn: Optional[duckdb.DuckDBPyConnection] = None,
) -> str:
    c = conn or get_db()
    run_id = run_id or _uid()
    c.execute(
        "INSERT INTO bench_runs (run_id, config_json, summary_json) VALUES (?, ?, ?)",
        [run_id, json.dumps(config, sort_keys=True), json.dumps(summary.to_dict(), sort_keys=True)],
    )
    for r in summary.rows:
        c.execute(
            """
            INSERT INTO bench_results
                (run_id, variant, method, success_mean, success_std, steps_mean, steps_std, recoveries_mean)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?)
            """,
            [run_id, r.variant, r.method, r.success_mean, r.success_std, r.steps_mean, r.steps_std, r.recoveries_mean],
        )
    return run_id


def get_bench_run(run_id: str, conn: Optional[duckdb.DuckDBPyConnection] = None) -> Optional[dict]:
    c = conn or get_db()
    rows = c.execute("SELECT * FROM bench_runs WHERE run_id = ?", [run_id]).fetchall()
    if not rows:
        return None
    cols = [d[0] for d in c.description]
    return dict(zip(cols, rows[0]))


def get_bench_results(run_id: str, conn: Optional[duckdb.DuckDBPyConnection] = None) -> List[dict]:
    c = conn or get_db()
    rows = c.execute(
        "SELECT * FROM bench_results WHERE run_id = ? ORDER BY variant, method", [run_id]
    ).fetchall()
    cols = [d[0] for d in c.description]
    return [dict(zip(cols, r)) for r in rows]


def list_bench_runs(limit: int = 50, conn: Optional[duckdb.DuckDBPyConnection] = None) -> List[dict]:
    c = conn or get_db()
    rows = c.execute(
        "SELECT run_id, created_at FROM bench_runs ORDER BY created_at DESC LIMIT ?", [limit]
    ).fetchall()
    return [{"run_id": r[0], "created_at": str(r[1])} for r in rows]


def register_run(config: dict, summary: Summary) -> Optional[str]:
    """Best-effort registration; failures are logged, never raised."""
    try:
        ensure_tables()
        run_id = insert_bench_run(config=config, summary=summary)
        logger.info("Registered bench run %s", run_id)
        return run_id
    except Exception:
        logger.exception("Failed to persist bench run to DuckDB")
        return None
