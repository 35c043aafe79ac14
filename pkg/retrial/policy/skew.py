"""Skewed chunk selection away from recorded mistake points.

A chunk's score is the smallest weighted squared distance between any of its
targets and any avoidance point; the highest score wins and ties go to the
lowest index.  With no avoidance points every score is +inf.

The gripper coordinate is scaled by ``gripper_weight``; the default 0 scores
plain (x, y) distance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from retrial.config import get_settings
from retrial.core.errors import ConfigurationError, ValidationError
from retrial.core.types import ActionChunk, ProprioPoint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SkewConfig:
    n_skew: int = 10
    gripper_weight: float = 0.0

    def __post_init__(self) -> None:
        if self.n_skew < 1:
            raise ConfigurationError(f"n_skew must be >= 1, got {self.n_skew}")
        if self.gripper_weight < 0:
            raise ConfigurationError(f"gripper_weight must be >= 0, got {self.gripper_weight}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([1.0, 1.0, self.gripper_weight])

    @classmethod
    def from_settings(cls) -> "SkewConfig":
        s = get_settings()
        return cls(n_skew=s.skew_samples, gripper_weight=s.skew_gripper_weight)


@dataclass(frozen=True)
class AvoidanceSet:
    points: Tuple[ProprioPoint, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, 3))
        return np.stack([p.as_array() for p in self.points])

    def to_list(self) -> list:
        return [p.to_list() for p in self.points]


def record_avoid(avoid: AvoidanceSet, p: ProprioPoint) -> AvoidanceSet:
    return AvoidanceSet(avoid.points + (p,))


def chunk_scores(
    chunks: Sequence[ActionChunk], avoid: AvoidanceSet, cfg: SkewConfig = SkewConfig()
) -> np.ndarray:
    if not len(avoid):
        return np.full(len(chunks), np.inf)
    pts = avoid.as_array()
    w = cfg.weights
    scores = np.empty(len(chunks))
    for i, ch in enumerate(chunks):
        diff = ch.targets[:, None, :] - pts[None, :, :]
        scores[i] = (diff * diff * w).sum(axis=-1).min()
    return scores


def skewed_select(
    chunks: Sequence[ActionChunk], avoid: AvoidanceSet, cfg: SkewConfig = SkewConfig()
) -> Tuple[ActionChunk, int]:
    if not chunks:
        raise ValidationError("skewed_select needs at least one chunk")
    scores = chunk_scores(chunks, avoid, cfg)
    best = int(np.argmax(scores))
    return chunks[best], best
