"""Matched-pair benchmark harness.

For every (variant, seed s, trial i) all methods run against the scenario
stream ``SeedStream(s, i)``, so they face the same hidden parameter and the
same initial object pose.  Seed ``s`` also selects the value model.  Trials
are spread over a process pool; records are sorted by key before they are
returned so output files are byte-identical across reruns.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from retrial.bench.methods import DEFAULT_METHODS, get_method, interval_method_name
from retrial.config import get_settings
from retrial.core.errors import ArtifactError, ConfigurationError, DatasetFormatError
from retrial.core.rng import SeedStream
from retrial.core.types import Backend
from retrial.demogen.storage import read_dataset
from retrial.deploy.runner import run_episode
from retrial.graspworld.scenario import ScenarioConfig, Variant
from retrial.monitor.engine import MonitorConfig
from retrial.policy.retrieval import build_policy
from retrial.valuefn.storage import load_model

logger = logging.getLogger(__name__)


class BenchConfig(BaseModel):
    """Benchmark definition; input paths are relative to the config file."""

    model_config = ConfigDict(extra="forbid")

    dataset: str
    value_models: List[str] = Field(min_length=1)
    variants: List[Variant] = Field(default_factory=lambda: [Variant.BLOCKED, Variant.ADVERSARIAL_SLIP])
    trials: int = Field(default_factory=lambda: get_settings().bench_trials, ge=1)
    seeds: int = Field(default_factory=lambda: get_settings().bench_seeds, ge=1)
    backend: Backend = Backend.CATEGORICAL
    methods: List[str] = Field(default_factory=lambda: list(DEFAULT_METHODS))
    interval_buffers: List[float] = Field(default_factory=lambda: [get_settings().interval_buffer])
    horizon: Optional[int] = Field(default=None, ge=1)
    max_recoveries: Optional[int] = Field(default=None, ge=0)
    record_traces: bool = Field(default_factory=lambda: get_settings().bench_record_traces)
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, v: List[str]) -> List[str]:
        for name in v:
            try:
                get_method(name)
            except KeyError as exc:
                raise ValueError(str(exc)) from exc
        return v

    @field_validator("interval_buffers")
    @classmethod
    def _buffers(cls, v: List[float]) -> List[float]:
        if not v or any(b < 0 for b in v):
            raise ValueError("interval_buffers needs at least one non-negative entry")
        return v

    @model_validator(mode="after")
    def _models_per_seed(self) -> "BenchConfig":
        if len(self.value_models) not in (1, self.seeds):
            raise ValueError(f"give one value model or one per seed ({self.seeds}), got {len(self.value_models)}")
        return self

    def method_names(self) -> List[str]:
        names = list(self.methods)
        if "interval_recovery" in names:
            names.extend(interval_method_name(b) for b in self.interval_buffers[1:])
        return names

    def model_for_seed(self, seed: int) -> str:
        return self.value_models[seed % len(self.value_models)]


def load_bench_config(path: Union[str, Path]) -> Tuple[BenchConfig, Path]:
    """Parse a config file; returns (config, directory its paths are relative to)."""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"bench config not found: {path}")
    try:
        cfg = BenchConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ConfigurationError(f"invalid bench config {path}: {exc}") from exc
    return cfg, path.resolve().parent


@dataclass
class TrialRecord:
    variant: str
    method: str
    seed: int
    trial: int
    success: bool
    steps: int
    recoveries: int
    horizon: int
    mean_length: float
    recovery_steps: List[int] = field(default_factory=list)
    recovery_ticks: int = 0
    attempt_lengths: List[int] = field(default_factory=list)
    grasp_attempts: List[List[float]] = field(default_factory=list)
    avoid_points: List[List[float]] = field(default_factory=list)
    events: Dict[str, int] = field(default_factory=dict)
    hidden: Dict[str, Any] = field(default_factory=dict)
    initial_obs: List[float] = field(default_factory=list)
    trace: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def key(self) -> Tuple[str, int, int, str]:
        return (self.variant, self.seed, self.trial, self.method)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "TrialRecord":
        return cls(**d)


def read_records(path: Union[str, Path]) -> List[TrialRecord]:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"records file not found: {path}")
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                records.append(TrialRecord.from_dict(json.loads(raw)))
            except (json.JSONDecodeError, TypeError) as exc:
                raise DatasetFormatError(f"bad trial record ({exc})", line=lineno) from exc
    return records


# ── worker side ──────────────────────────────────────────────────────────────

_WORKER: Dict[str, Any] = {}


def _init_worker(dataset_path: str, model_paths: Sequence[str]) -> None:
    dataset = read_dataset(dataset_path)
    _WORKER["dataset"] = dataset
    _WORKER["policy"] = build_policy(dataset)
    _WORKER["models"] = {p: load_model(p) for p in dict.fromkeys(model_paths)}


def _run_job(job: Tuple[str, int, int, str, str, Dict[str, Any]]) -> TrialRecord:
    variant, seed, trial, method, model_path, opts = job
    dataset = _WORKER["dataset"]
    model = _WORKER["models"][model_path]
    monitor = MonitorConfig.from_settings(dataset.mean_length, model.backend)
    deploy_cfg = get_method(method)(monitor, opts["interval_buffer"])
    overrides = {k: opts[k] for k in ("horizon", "max_recoveries") if opts.get(k) is not None}
    if overrides or opts["record_traces"]:
        deploy_cfg = replace(deploy_cfg, record_trace=opts["record_traces"], **overrides)

    res = run_episode(
        ScenarioConfig.for_variant(variant),
        _WORKER["policy"],
        model if deploy_cfg.monitor_enabled else None,
        deploy_cfg,
        SeedStream(seed, trial),
    )
    return TrialRecord(
        variant=variant,
        method=method,
        seed=seed,
        trial=trial,
        success=res.success,
        steps=res.steps,
        recoveries=res.recoveries,
        horizon=deploy_cfg.horizon,
        mean_length=dataset.mean_length,
        recovery_steps=res.recovery_steps,
        recovery_ticks=res.recovery_ticks,
        attempt_lengths=res.attempt_lengths,
        grasp_attempts=res.grasp_attempts,
        avoid_points=res.avoid_points,
        events=res.events,
        hidden=res.hidden,
        initial_obs=res.initial_obs,
        trace=res.trace,
    )


# ── driver ───────────────────────────────────────────────────────────────────

def _resolve(base_dir: Optional[Path], p: str) -> Path:
    path = Path(p)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    return path


def run_matched(cfg: BenchConfig, base_dir: Optional[Union[str, Path]] = None) -> List[TrialRecord]:
    # ── 1. Resolve and check artefacts ─────────────────────────────────
    base = Path(base_dir) if base_dir is not None else None
    dataset_path = _resolve(base, cfg.dataset)
    model_paths = [_resolve(base, p) for p in cfg.value_models]
    missing = [str(p) for p in [dataset_path, *model_paths] if not p.exists()]
    if missing:
        raise ArtifactError(f"missing benchmark artefacts: {', '.join(missing)}")
    for p in dict.fromkeys(model_paths):
        backend = load_model(p).backend
        if backend is not cfg.backend:
            raise ConfigurationError(f"value model {p} is {backend.value}, config expects {cfg.backend.value}")

    # ── 2. Expand the job grid ──────────────────────────────────────────
    opts = {
        "interval_buffer": cfg.interval_buffers[0],
        "horizon": cfg.horizon,
        "max_recoveries": cfg.max_recoveries,
        "record_traces": cfg.record_traces,
    }
    methods = cfg.method_names()
    jobs = [
        (v.value, s, i, m, str(model_paths[s % len(model_paths)]), opts)
        for v in cfg.variants
        for s in range(cfg.seeds)
        for i in range(cfg.trials)
        for m in methods
    ]
    workers = cfg.workers or get_settings().max_workers
    logger.info(
        "Running %d trials (%d variants x %d seeds x %d trials x %d methods) on %d workers",
        len(jobs), len(cfg.variants), cfg.seeds, cfg.trials, len(methods), workers,
    )

    # ── 3. Run, serially or on a process pool ───────────────────────────
    init_args = (str(dataset_path), [str(p) for p in model_paths])
    if workers <= 1:
        _init_worker(*init_args)
        records = [_run_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=init_args) as pool:
            records = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (workers * 8))))

    records.sort(key=lambda r: r.key)
    return records
