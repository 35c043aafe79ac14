"""Centralised configuration via pydantic-settings.

Reads from environment variables (and optionally a .env file located next to
the project root).  Every operational default lives here; per-run config
objects pull their defaults from ``get_settings()``.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


_PROJECT_DIR = Path(__file__).resolve().parent.parent  # …/retrial repo root


class Settings(BaseSettings):
    """Application-wide settings – all values come from env vars."""

    model_config = SettingsConfigDict(
        env_file=str(_PROJECT_DIR / ".env"),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # ── Paths ─────────────────────────────────────────────────────────
    data_dir: str = str(_PROJECT_DIR / "data")
    db_path: str = ""  # default: {data_dir}/retrial.duckdb

    # ── Logging ───────────────────────────────────────────────────────
    log_level: str = "INFO"

    # ── Worker pool ───────────────────────────────────────────────────
    max_workers: int = 4

    # ── Grasp world ───────────────────────────────────────────────────
    v_max: float = 0.05
    grasp_radius: float = 0.03
    goal_radius: float = 0.05
    slip_eligibility: float = 0.05       # expert only grasps below this slip prob

    # ── Demonstrations ────────────────────────────────────────────────
    demo_noise: float = 0.01
    demo_reject_factor: float = 3.0      # × straight-line optimal length
    demo_reject_window: int = 1000
    demo_max_reject_rate: float = 0.99

    # ── Value function ────────────────────────────────────────────────
    value_hidden: int = 64
    value_lr: float = 1e-3
    value_batch: int = 64
    value_steps: int = 20_000
    value_gamma: float = 1.0

    # ── Progress monitor ──────────────────────────────────────────────
    monitor_k: int = 20
    monitor_z: float = 2.0
    monitor_eta: float = 0.5
    monitor_margin: float = 0.0

    # ── Retrieval policy / skew ───────────────────────────────────────
    policy_neighbors: int = 16
    policy_noise: float = 0.01
    policy_chunk: int = 24
    policy_execute: int = 16
    skew_samples: int = 10
    skew_gripper_weight: float = 0.0     # xy-only distance to avoidance points

    # ── Deployment ────────────────────────────────────────────────────
    horizon: int = 400                   # policy steps, recovery excluded
    max_recoveries: int = 20
    interval_buffer: float = 0.25        # fraction of mean expert length

    # ── Benchmark ─────────────────────────────────────────────────────
    bench_trials: int = 100
    bench_seeds: int = 3
    bench_record_traces: bool = False
    bootstrap_resamples: int = 2000

    # ── Derived helpers ───────────────────────────────────────────────
    @property
    def resolved_db_path(self) -> str:
        if self.db_path:
            return self.db_path
        return str(Path(self.data_dir) / "retrial.duckdb")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return a cached singleton of the settings object."""
    return Settings()
