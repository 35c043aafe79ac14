"""Shared pytest fixtures for retrial tests.

Points the data directory and DuckDB file at a temporary location so tests
never touch real artefacts.  Demonstrations, value models and the retrieval
policy are built once per session.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import pytest

# ── override env BEFORE any retrial import ──────────────────────────────────
_tmp = tempfile.mkdtemp(prefix="retrial_test_")
os.environ["DATA_DIR"] = _tmp
os.environ["DB_PATH"] = str(Path(_tmp) / "test.duckdb")
os.environ["LOG_LEVEL"] = "WARNING"

# Now safe to import
from retrial.config import get_settings  # noqa: E402
from retrial.core.rng import SeedStream  # noqa: E402
from retrial.core.types import Backend  # noqa: E402
from retrial.demogen.expert import generate_demos  # noqa: E402
from retrial.demogen.storage import write_dataset  # noqa: E402
from retrial.graspworld.scenario import ScenarioConfig  # noqa: E402
from retrial.policy.retrieval import build_policy  # noqa: E402
from retrial.valuefn.storage import save_model  # noqa: E402
from retrial.valuefn.train import TrainConfig, train  # noqa: E402

TRAIN_STEPS = 1500


@pytest.fixture(autouse=True)
def _clear_settings_cache():
    """Clear the lru_cache so each test gets fresh settings."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def tmp_data_dir() -> Path:
    return Path(_tmp)


@pytest.fixture(scope="session")
def demo_dataset():
    """30 train-variant expert demonstrations."""
    return generate_demos(ScenarioConfig.for_variant("train"), 30, SeedStream(0))


@pytest.fixture(scope="session")
def scalar_model(demo_dataset):
    return train(demo_dataset, Backend.SCALAR, TrainConfig(steps=TRAIN_STEPS, hidden=32, seed=0))


@pytest.fixture(scope="session")
def categorical_model(demo_dataset):
    return train(demo_dataset, Backend.CATEGORICAL, TrainConfig(steps=TRAIN_STEPS, hidden=32, seed=0))


@pytest.fixture(scope="session")
def policy(demo_dataset):
    return build_policy(demo_dataset)


@pytest.fixture(scope="session")
def artefacts(tmp_path_factory, demo_dataset, scalar_model, categorical_model):
    """Dataset and both models written to disk: {"dir", "demos", "scalar", "categorical"}."""
    root = tmp_path_factory.mktemp("artefacts")
    return {
        "dir": root,
        "demos": write_dataset(demo_dataset, root / "demos.jsonl"),
        "scalar": save_model(scalar_model, root / "value_scalar.json"),
        "categorical": save_model(categorical_model, root / "value_categorical.json"),
    }


@pytest.fixture
def db_ready(tmp_data_dir):
    """Ensure DuckDB tables exist."""
    from retrial.db import ensure_tables
    ensure_tables()
    return True
