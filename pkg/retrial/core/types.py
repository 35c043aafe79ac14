"""Domain value types shared by every subpackage.

Observation layout (15 floats, 0-based):

    0-1   end-effector x, y
    2     gripper aperture (0 closed, 1 open)
    3-5   object pose x, y, theta
    6     attached flag (0 / 1)
    7-14  four affordance world positions (x0, y0, ..., x3, y3)

Hidden parameters (blocked flags, slip probabilities) never appear here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from retrial.core.errors import ValidationError

if TYPE_CHECKING:  # pragma: no cover
    from retrial.graspworld.scenario import HiddenParam

OBS_DIM = 15
N_AFFORDANCES = 4
MAX_CHUNK = 24

EE_X, EE_Y, GRIPPER, OBJ_X, OBJ_Y, OBJ_THETA, ATTACHED = range(7)
AFF_START = 7


class Event(str, Enum):
    GRASP_ATTACH = "GraspAttach"
    GRASP_FAIL_BLOCKED = "GraspFailBlocked"
    SLIP = "Slip"
    SUCCESS = "Success"


class Backend(str, Enum):
    SCALAR = "scalar"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ProprioPoint:
    x: float
    y: float
    gripper: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "gripper"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0 or v > 1.0:
                raise ValidationError(f"ProprioPoint.{name} must be finite and in [0, 1], got {v}")
            object.__setattr__(self, name, v)

    @property
    def closed(self) -> bool:
        return self.gripper < 0.5

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.gripper], dtype=float)

    def to_list(self) -> List[float]:
        return [self.x, self.y, self.gripper]

    @classmethod
    def from_seq(cls, values: Sequence[float]) -> "ProprioPoint":
        if len(values) != 3:
            raise ValidationError(f"ProprioPoint needs 3 values, got {len(values)}")
        return cls(float(values[0]), float(values[1]), float(values[2]))


def as_observation(obs: Iterable[float]) -> np.ndarray:
    """Validate and return a read-only float array of length 15."""
    arr = np.array(obs, dtype=float)
    if arr.shape != (OBS_DIM,):
        raise ValidationError(f"observation must have shape ({OBS_DIM},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("observation contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ActionChunk:
    """Absolute proprioceptive targets, shape (H, 3), executed open-loop."""

    targets: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.targets, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValidationError(f"chunk targets must have shape (H, 3), got {arr.shape}")
        if not 1 <= arr.shape[0] <= MAX_CHUNK:
            raise ValidationError(f"chunk length must be in [1, {MAX_CHUNK}], got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError("chunk targets must be finite and within [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "targets", arr)

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ActionChunk):
            return NotImplemented
        return np.array_equal(self.targets, other.targets)

    def point(self, i: int) -> ProprioPoint:
        return ProprioPoint.from_seq(self.targets[i])

    def points(self) -> List[ProprioPoint]:
        return [self.point(i) for i in range(len(self))]


@dataclass(frozen=True, eq=False)
class Transition:
    obs: np.ndarray
    proprio: ProprioPoint
    action: ProprioPoint
    reward: float
    t: int
    events: FrozenSet[Event] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "obs", as_observation(self.obs))
        object.__setattr__(self, "events", frozenset(Event(e) for e in self.events))
        if self.t < 0:
            raise ValidationError(f"step index must be >= 0, got {self.t}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Transition):
            return NotImplemented
        return (
            np.array_equal(self.obs, other.obs)
            and self.proprio == other.proprio
            and self.action == other.action
            and self.reward == other.reward
            and self.t == other.t
            and self.events == other.events
        )


@dataclass(frozen=True, eq=False)
class Trajectory:
    transitions: Tuple[Transition, ...]
    success: bool
    hidden_record: Optional["HiddenParam"] = None
    traj_id: int = 0

    def __post_init__(self) -> None:
        trs = tuple(self.transitions)
        object.__setattr__(self, "transitions", trs)
        if not trs:
            raise ValidationError("trajectory has no transitions")
        for i, tr in enumerate(trs):
            if tr.t != i:
                raise ValidationError(f"trajectory {self.traj_id}: step index {tr.t} at position {i}")
        if self.success:
            last = trs[-1]
            if last.reward != 0.0 or Event.SUCCESS not in last.events:
                raise ValidationError(
                    f"trajectory {self.traj_id}: success requires a final reward of 0 and a Success event"
                )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.transitions == other.transitions
            and self.success == other.success
            and self.hidden_record == other.hidden_record
            and self.traj_id == other.traj_id
        )

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def T(self) -> int:
        return len(self.transitions)

    @cached_property
    def observations(self) -> np.ndarray:
        return np.stack([tr.obs for tr in self.transitions])

    @cached_property
    def actions(self) -> np.ndarray:
        return np.stack([tr.action.as_array() for tr in self.transitions])

    @cached_property
    def rewards(self) -> np.ndarray:
        return np.array([tr.reward for tr in self.transitions], dtype=float)
