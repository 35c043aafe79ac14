"""Scenario configuration and hidden-parameter sampling.

Variants:
  train            – no blocking, every affordance nearly slip-free
  blocked          – two of four affordances silently refuse to attach
  adversarial_slip – three affordances slip often while carried
  held_out         – train dynamics with rescaled affordance geometry
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from retrial.config import get_settings
from retrial.core.errors import ConfigurationError, ValidationError
from retrial.core.rng import Purpose, SeedStream, as_generator
from retrial.core.types import N_AFFORDANCES

logger = logging.getLogger(__name__)

_LOW_SLIP = (0.0, 0.02)
_HIGH_SLIP = (0.2, 0.4)
_SCALE_RANGE = (0.7, 1.3)
_MAX_REJECTIONS = 1000

Point = Tuple[float, float]


class Variant(str, Enum):
    TRAIN = "train"
    BLOCKED = "blocked"
    ADVERSARIAL_SLIP = "adversarial_slip"
    HELD_OUT = "held_out"


@dataclass(frozen=True)
class HiddenParam:
    blocked: Tuple[bool, ...]
    slip_prob: Tuple[float, ...]
    offset_scale: Tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        blocked = tuple(bool(b) for b in self.blocked)
        slip = tuple(float(s) for s in self.slip_prob)
        if len(blocked) != N_AFFORDANCES or len(slip) != N_AFFORDANCES:
            raise ValidationError(f"hidden parameter needs {N_AFFORDANCES} affordances")
        if any(not 0.0 <= s <= 1.0 for s in slip):
            raise ValidationError(f"slip probabilities must be in [0, 1], got {slip}")
        scale = tuple(float(s) for s in self.offset_scale)
        if len(scale) != 2 or any(s <= 0 for s in scale):
            raise ValidationError(f"offset_scale must be two positive factors, got {scale}")
        object.__setattr__(self, "blocked", blocked)
        object.__setattr__(self, "slip_prob", slip)
        object.__setattr__(self, "offset_scale", scale)

    def eligible(self, cutoff: Optional[float] = None) -> List[int]:
        """Affordances a privileged planner would grasp."""
        if cutoff is None:
            cutoff = get_settings().slip_eligibility
        return [i for i in range(N_AFFORDANCES) if not self.blocked[i] and self.slip_prob[i] <= cutoff]

    def is_solvable(self) -> bool:
        return bool(self.eligible())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "blocked": list(self.blocked),
            "slip_prob": list(self.slip_prob),
            "offset_scale": list(self.offset_scale),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "HiddenParam":
        return cls(
            blocked=tuple(d["blocked"]),
            slip_prob=tuple(d["slip_prob"]),
            offset_scale=tuple(d.get("offset_scale", (1.0, 1.0))),
        )


_DEFAULT_OFFSETS: Tuple[Point, ...] = ((0.06, 0.0), (0.0, 0.06), (-0.06, 0.0), (0.0, -0.06))


def _inside_unit(p: Point) -> bool:
    return 0.0 <= p[0] <= 1.0 and 0.0 <= p[1] <= 1.0


class ScenarioConfig(BaseModel):
    """Scenario geometry and variant, serialised as a snake_case JSON object."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    variant: Variant = Variant.TRAIN
    placement_low: Point = (0.4, 0.15)
    placement_high: Point = (0.6, 0.3)
    affordance_offsets: Tuple[Point, ...] = _DEFAULT_OFFSETS
    goal_center: Point = (0.5, 0.9)
    goal_radius: float = Field(default_factory=lambda: get_settings().goal_radius, gt=0)
    grasp_radius: float = Field(default_factory=lambda: get_settings().grasp_radius, gt=0)
    v_max: float = Field(default_factory=lambda: get_settings().v_max, gt=0)
    home: Tuple[float, float, float] = (0.5, 0.95, 1.0)

    @model_validator(mode="after")
    def _check_geometry(self) -> "ScenarioConfig":
        if len(self.affordance_offsets) != N_AFFORDANCES:
            raise ValueError(f"affordance_offsets needs {N_AFFORDANCES} entries")
        lo, hi = self.placement_low, self.placement_high
        if not (_inside_unit(lo) and _inside_unit(hi)) or lo[0] > hi[0] or lo[1] > hi[1]:
            raise ValueError("placement region must be a non-empty box inside [0,1]^2")
        g, r = self.goal_center, self.goal_radius
        if not (_inside_unit((g[0] - r, g[1] - r)) and _inside_unit((g[0] + r, g[1] + r))):
            raise ValueError("goal region must lie inside [0,1]^2")
        if not all(0.0 <= v <= 1.0 for v in self.home):
            raise ValueError("home pose must lie inside [0,1]")
        return self

    @classmethod
    def for_variant(cls, variant: Union[Variant, str]) -> "ScenarioConfig":
        return cls(variant=Variant(variant))


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ConfigurationError(f"invalid scenario config {path}: {exc}") from exc


def dump_scenario(cfg: ScenarioConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(cfg.model_dump(mode="json"), indent=2), encoding="utf-8")


def _draw(variant: Variant, gen: np.random.Generator) -> HiddenParam:
    blocked = [False] * N_AFFORDANCES
    slip = list(gen.uniform(*_LOW_SLIP, size=N_AFFORDANCES))
    scale = (1.0, 1.0)
    if variant is Variant.BLOCKED:
        for i in gen.choice(N_AFFORDANCES, size=2, replace=False):
            blocked[int(i)] = True
    elif variant is Variant.ADVERSARIAL_SLIP:
        keep = int(gen.integers(N_AFFORDANCES))
        high = gen.uniform(*_HIGH_SLIP, size=N_AFFORDANCES)
        slip = [slip[i] if i == keep else float(high[i]) for i in range(N_AFFORDANCES)]
    elif variant is Variant.HELD_OUT:
        lo, hi = _SCALE_RANGE
        scale = (float(gen.uniform(lo, hi)), float(gen.uniform(lo, hi)))
    return HiddenParam(blocked=tuple(blocked), slip_prob=tuple(slip), offset_scale=scale)


def sample_hidden(
    variant: Union[Variant, str],
    rng: Union[SeedStream, np.random.Generator],
) -> HiddenParam:
    """Draw a solvable hidden parameter for ``variant``."""
    variant = Variant(variant)
    gen = as_generator(rng, Purpose.SCENARIO)
    for _ in range(_MAX_REJECTIONS):
        hidden = _draw(variant, gen)
        if hidden.is_solvable():
            return hidden
        logger.debug("Rejected unsolvable %s scenario: %s", variant.value, hidden)
    raise ConfigurationError(f"could not sample a solvable {variant.value} scenario")
