"""DuckDB run registry – auto-creates tables on first use."""

from retrial.db.connection import ensure_tables, get_db

__all__ = ["get_db", "ensure_tables"]
