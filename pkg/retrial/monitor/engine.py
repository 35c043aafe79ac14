"""Bellman progress monitor.

Scalar backend: with rewards of -1 per step, a value ``V(s_{t-k})`` that is
larger than the k-step target ``sum gamma^m r + gamma^k V(s_t)`` means the
last k steps made less progress than the value promised.

Categorical backend: the predictions are progress fractions.  The delta
distribution ``V(s_t) - V(s_{t-k})`` is bounded above by mean + z·std; if even
that bound is below ``eta * k / T_mean`` (the expected progress over k steps,
slackened) the current attempt is judged failing.

Thresholds are strict: a rollout exactly on expert pace never triggers.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import asdict, dataclass
from typing import Deque, List, Optional, Sequence, Union

import numpy as np

from retrial.config import get_settings
from retrial.core.dist import CategoricalValueDist, dist_delta, dist_mean, upper_bound
from retrial.core.errors import ConfigurationError, ValidationError
from retrial.core.types import Backend
from retrial.valuefn.train import ValueModel, ValuePrediction, predict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MonitorConfig:
    mean_length: float
    k: int = 20
    backend: Backend = Backend.CATEGORICAL
    z: float = 2.0
    eta: float = 0.5
    margin: float = 0.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "backend", Backend(self.backend))
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        if not self.mean_length >= 1:
            raise ConfigurationError(f"mean expert length must be >= 1, got {self.mean_length}")
        if not 0 < self.eta <= 1:
            raise ConfigurationError(f"eta must be in (0, 1], got {self.eta}")
        if self.margin < 0 or self.z < 0:
            raise ConfigurationError("margin and z must be >= 0")

    @property
    def expected_progress(self) -> float:
        return self.eta * self.k / self.mean_length

    @classmethod
    def from_settings(cls, mean_length: float, backend: Union[Backend, str] = Backend.CATEGORICAL) -> "MonitorConfig":
        s = get_settings()
        return cls(
            mean_length=mean_length,
            k=s.monitor_k,
            backend=Backend(backend),
            z=s.monitor_z,
            eta=s.monitor_eta,
            margin=s.monitor_margin,
            gamma=s.value_gamma,
        )


@dataclass(frozen=True)
class ProgressVerdict:
    triggered: bool
    observed: float
    threshold: float
    step: int
    delta: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class HistoryEntry:
    step: int
    value: ValuePrediction
    reward: Optional[float]


class ValueHistory:
    """Last k+1 predictions, contiguous in step index, plus every verdict so far."""

    def __init__(self, k: int) -> None:
        if k < 1:
            raise ConfigurationError(f"k must be >= 1, got {k}")
        self.k = k
        self._entries: Deque[HistoryEntry] = deque(maxlen=k + 1)
        self.verdicts: List[ProgressVerdict] = []

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> List[HistoryEntry]:
        return list(self._entries)

    @property
    def ready(self) -> bool:
        return len(self._entries) == self.k + 1

    @property
    def next_step(self) -> int:
        return self._entries[-1].step + 1 if self._entries else 0

    def append(self, value: ValuePrediction, reward: Optional[float] = None, step: Optional[int] = None) -> None:
        if step is None:
            step = self.next_step
        if self._entries and step != self._entries[-1].step + 1:
            raise ValidationError(f"history step {step} does not follow {self._entries[-1].step}")
        self._entries.append(HistoryEntry(step, value, reward))

    def clear(self) -> None:
        """Drop buffered predictions; the verdict log is kept."""
        self._entries.clear()


def bellman_target_scalar(v_now: float, rewards: Sequence[float], k: int, gamma: float = 1.0) -> float:
    if len(rewards) != k:
        raise ValidationError(f"expected {k} rewards, got {len(rewards)}")
    y = gamma ** k * float(v_now)
    for m, r in enumerate(rewards):
        y += gamma ** m * float(r)
    return y


def check_scalar(v_past: float, y: float, margin: float = 0.0, step: int = 0) -> ProgressVerdict:
    return ProgressVerdict(
        triggered=bool(v_past > y + margin),
        observed=y - v_past,
        threshold=-margin,
        step=step,
        delta=y - v_past,
    )


def check_categorical(
    d_past: CategoricalValueDist,
    d_now: CategoricalValueDist,
    cfg: MonitorConfig,
    step: int = 0,
) -> ProgressVerdict:
    ub = upper_bound(dist_delta(d_now, d_past), cfg.z)
    threshold = cfg.expected_progress
    return ProgressVerdict(
        triggered=bool(ub < threshold),
        observed=ub,
        threshold=threshold,
        step=step,
        delta=dist_mean(d_now) - dist_mean(d_past) - cfg.k / cfg.mean_length,
    )


def judge(history: ValueHistory, cfg: MonitorConfig) -> Optional[ProgressVerdict]:
    """Verdict for the newest entry, or None while fewer than k+1 entries exist."""
    if not history.ready:
        return None
    entries = history.entries
    past, now = entries[0], entries[-1]
    if cfg.backend is Backend.SCALAR:
        rewards = [e.reward for e in entries[1:]]
        if any(r is None for r in rewards):
            raise ValidationError("scalar judgement needs a reward for every step after the first entry")
        y = bellman_target_scalar(now.value, rewards, cfg.k, cfg.gamma)
        verdict = check_scalar(past.value, y, cfg.margin, step=now.step)
    else:
        verdict = check_categorical(past.value, now.value, cfg, step=now.step)
    history.verdicts.append(verdict)
    return verdict


def observe_and_judge(
    history: ValueHistory,
    model: ValueModel,
    obs: np.ndarray,
    reward: Optional[float],
    cfg: MonitorConfig,
    step: Optional[int] = None,
) -> Optional[ProgressVerdict]:
    if model.backend is not cfg.backend:
        raise ConfigurationError(
            f"value model backend {model.backend.value} does not match monitor backend {cfg.backend.value}"
        )
    history.append(predict(model, obs), reward, step)
    verdict = judge(history, cfg)
    if verdict is not None and verdict.triggered:
        logger.debug("Progress check triggered at step %d (%.4f < %.4f)", verdict.step, verdict.observed, verdict.threshold)
    return verdict
