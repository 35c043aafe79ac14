"""Closed-loop deployment of the base policy with monitoring and recovery.

Per decision the loop samples ``n_skew`` chunks, keeps the one furthest from
the avoidance set, and executes its first ``execute_length`` targets.  After
every simulator step the monitor judges progress over the last k steps.  On
a trigger the attempt's last grasp location joins the avoidance set (the
proprio one step before the judged state when the attempt never closed the
gripper), the world runs its scripted recovery, the monitor history is
cleared and the rest of the chunk is dropped.

Interval mode replaces the monitor with a fixed attempt length and records
no avoidance points.  Recovery ticks never count against the horizon.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from retrial.config import get_settings
from retrial.core.errors import ConfigurationError
from retrial.core.rng import Purpose, SeedStream
from retrial.core.types import OBS_DIM, Event, ProprioPoint
from retrial.graspworld.scenario import ScenarioConfig
from retrial.graspworld.world import observe, reset, run_recovery, step
from retrial.monitor.engine import MonitorConfig, ProgressVerdict, ValueHistory, observe_and_judge
from retrial.policy.retrieval import RetrievalPolicy, sample_chunks
from retrial.policy.skew import AvoidanceSet, SkewConfig, record_avoid, skewed_select
from retrial.valuefn.train import ValueModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeployConfig:
    monitor: Optional[MonitorConfig] = None
    horizon: int = 400
    max_recoveries: int = 20
    execute_length: int = 16
    skew: SkewConfig = field(default_factory=SkewConfig)
    monitor_enabled: bool = True
    skew_enabled: bool = True
    interval_period: Optional[int] = None
    record_trace: bool = False

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ConfigurationError(f"horizon must be >= 1, got {self.horizon}")
        if self.max_recoveries < 0:
            raise ConfigurationError("max_recoveries must be >= 0")
        if self.execute_length < 1:
            raise ConfigurationError("execute_length must be >= 1")
        if self.monitor_enabled and self.interval_period is not None:
            raise ConfigurationError("monitor and interval recovery cannot both be active")
        if self.monitor_enabled and self.monitor is None:
            raise ConfigurationError("monitor enabled without a MonitorConfig")
        if self.interval_period is not None and self.interval_period < 1:
            raise ConfigurationError(f"interval period must be >= 1, got {self.interval_period}")

    @property
    def n_samples(self) -> int:
        return self.skew.n_skew if self.skew_enabled else 1

    @classmethod
    def from_settings(cls, monitor: Optional[MonitorConfig] = None, **overrides: Any) -> "DeployConfig":
        s = get_settings()
        base: Dict[str, Any] = dict(
            monitor=monitor,
            horizon=s.horizon,
            max_recoveries=s.max_recoveries,
            execute_length=s.policy_execute,
            skew=SkewConfig.from_settings(),
        )
        base.update(overrides)
        return cls(**base)


@dataclass
class EpisodeResult:
    success: bool
    steps: int
    recoveries: int
    recovery_steps: List[int] = field(default_factory=list)
    recovery_ticks: int = 0
    attempt_lengths: List[int] = field(default_factory=list)
    grasp_attempts: List[List[float]] = field(default_factory=list)
    avoid_points: List[List[float]] = field(default_factory=list)
    events: Dict[str, int] = field(default_factory=dict)
    trace: List[Dict[str, Any]] = field(default_factory=list)
    hidden: Dict[str, Any] = field(default_factory=dict)
    initial_obs: List[float] = field(default_factory=list)
    verdicts: List[ProgressVerdict] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("verdicts")
        return d


def interval_period(mean_length: float, buffer: Optional[float] = None) -> int:
    """Attempt length for the interval baseline: round((1 + buffer) * T_mean)."""
    if buffer is None:
        buffer = get_settings().interval_buffer
    if not mean_length > 0:
        raise ConfigurationError(f"mean expert length must be > 0, got {mean_length}")
    if buffer < 0:
        raise ConfigurationError(f"buffer must be >= 0, got {buffer}")
    return max(1, int(math.floor((1.0 + buffer) * mean_length + 0.5)))


def _check_schema(policy: RetrievalPolicy, model: Optional[ValueModel], cfg: DeployConfig) -> None:
    if policy.obs_dim != OBS_DIM:
        raise ConfigurationError(f"policy observation width {policy.obs_dim} != {OBS_DIM}")
    if cfg.monitor_enabled:
        if model is None:
            raise ConfigurationError("monitoring needs a value model")
        if model.n_in != OBS_DIM:
            raise ConfigurationError(f"value model input width {model.n_in} != {OBS_DIM}")
        if model.backend is not cfg.monitor.backend:
            raise ConfigurationError(
                f"value model backend {model.backend.value} != monitor backend {cfg.monitor.backend.value}"
            )


def run_episode(
    sim_cfg: ScenarioConfig,
    policy: RetrievalPolicy,
    model: Optional[ValueModel],
    cfg: DeployConfig,
    rng: SeedStream,
) -> EpisodeResult:
    _check_schema(policy, model, cfg)

    # ── 1. Reset world, monitor and bookkeeping ─────────────────────────
    state, obs = reset(sim_cfg, rng)
    policy_rng = rng.generator(Purpose.POLICY)

    result = EpisodeResult(
        success=False,
        steps=0,
        recoveries=0,
        hidden=state.hidden.to_dict(),
        initial_obs=obs.tolist(),
    )
    avoid = AvoidanceSet()
    history = ValueHistory(cfg.monitor.k) if cfg.monitor_enabled else None
    if history is not None:
        observe_and_judge(history, model, obs, None, cfg.monitor, step=0)
    attempt_steps = 0
    last_grasp: Optional[ProprioPoint] = None
    events: Dict[str, int] = {}

    while not result.success and result.steps < cfg.horizon:
        # ── 2. Sample and skew-select a chunk ───────────────────────────
        chunks = sample_chunks(policy, obs, cfg.n_samples, policy_rng)
        chunk, _ = skewed_select(chunks, avoid, cfg.skew)

        for target in chunk.points()[: cfg.execute_length]:
            # ── 3. Step the world ───────────────────────────────────────
            prev = state
            state, out = step(state, target)
            obs = out.obs
            result.steps += 1
            attempt_steps += 1
            for e in out.events:
                events[e.value] = events.get(e.value, 0) + 1
            if not prev.ee.closed and state.ee.closed:
                last_grasp = state.ee
                result.grasp_attempts.append([state.ee.x, state.ee.y])
            if Event.SUCCESS in out.events:
                result.success = True
                break

            # ── 4. Judge progress or count the interval ─────────────────
            recover = False
            if history is not None:
                verdict = observe_and_judge(history, model, obs, out.reward, cfg.monitor, step=result.steps)
                if verdict is not None and verdict.triggered and result.recoveries < cfg.max_recoveries:
                    avoid = record_avoid(avoid, last_grasp if last_grasp is not None else prev.ee)
                    recover = True
            elif cfg.interval_period is not None:
                recover = attempt_steps >= cfg.interval_period and result.recoveries < cfg.max_recoveries

            # ── 5. Recover and start a new attempt ──────────────────────
            if recover:
                state, ticks = run_recovery(state)
                obs = observe(state)
                result.recoveries += 1
                result.recovery_steps.append(result.steps)
                result.recovery_ticks += ticks
                result.attempt_lengths.append(attempt_steps)
                attempt_steps = 0
                last_grasp = None
                if history is not None:
                    history.clear()
                    observe_and_judge(history, model, obs, None, cfg.monitor, step=result.steps)
                break
            if result.steps >= cfg.horizon:
                break

    result.avoid_points = avoid.to_list()
    result.events = dict(sorted(events.items()))
    if history is not None:
        result.verdicts = list(history.verdicts)
        if cfg.record_trace:
            result.trace = [v.to_dict() for v in history.verdicts]
    logger.debug(
        "Episode finished: success=%s steps=%d recoveries=%d", result.success, result.steps, result.recoveries
    )
    return result
