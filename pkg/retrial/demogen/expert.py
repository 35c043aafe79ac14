"""Privileged scripted expert and success-only demonstration datasets.

The expert knows the hidden parameter.  Per episode it picks one eligible
affordance (unblocked, low slip) uniformly at random and then runs three
phases:

  approach  – target the affordance plus N(0, noise²) jitter, gripper open
  close     – within the grasp radius, target the affordance with gripper closed
  carry     – once attached, target the goal centre with gripper closed

Rejection: episodes that slip, or take more than ``reject_factor`` times the
straight-line optimum, are discarded and re-rolled.
"""

from __future__ import annotations

import hashlib
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from retrial.config import get_settings
from retrial.core.errors import ConfigurationError, ValidationError
from retrial.core.rng import Purpose, SeedStream
from retrial.core.types import ATTACHED, AFF_START, Event, ProprioPoint, Trajectory, Transition
from retrial.graspworld.scenario import HiddenParam, ScenarioConfig
from retrial.graspworld.world import WorldState, affordance_positions, reset, step

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-6


def _clip01(v: float) -> float:
    return min(max(float(v), 0.0), 1.0)


def choose_affordance(hidden: HiddenParam, rng: np.random.Generator) -> int:
    eligible = hidden.eligible()
    if not eligible:
        raise ConfigurationError(f"no eligible affordance in scenario {hidden}")
    return int(eligible[int(rng.integers(len(eligible)))])


class ScriptedExpert:
    """Stateful wrapper holding the per-episode affordance choice."""

    def __init__(self, hidden: HiddenParam, rng: np.random.Generator, noise: Optional[float] = None) -> None:
        self.hidden = hidden
        self.rng = rng
        self.noise = get_settings().demo_noise if noise is None else noise
        self.choice = choose_affordance(hidden, rng)

    def act(self, state: WorldState) -> ProprioPoint:
        return expert_action(state, self.hidden, self.rng, choice=self.choice, noise=self.noise)


def expert_action(
    state: WorldState,
    hidden: HiddenParam,
    rng: np.random.Generator,
    *,
    choice: Optional[int] = None,
    noise: Optional[float] = None,
) -> ProprioPoint:
    """One absolute target for ``state``; picks an affordance when ``choice`` is None."""
    if choice is None:
        choice = choose_affordance(hidden, rng)
    if noise is None:
        noise = get_settings().demo_noise
    cfg = state.cfg

    if state.attached:
        gx, gy = cfg.goal_center
        return ProprioPoint(gx, gy, 0.0)

    ax, ay = affordance_positions(state)[choice]
    ax, ay = _clip01(ax), _clip01(ay)
    if state.ee.closed:
        # closed without holding anything: reopen over the affordance
        return ProprioPoint(ax, ay, 1.0)
    if math.hypot(state.ee.x - ax, state.ee.y - ay) <= cfg.grasp_radius:
        return ProprioPoint(ax, ay, 0.0)
    jitter = rng.normal(0.0, noise, size=2) if noise > 0 else np.zeros(2)
    return ProprioPoint(_clip01(ax + jitter[0]), _clip01(ay + jitter[1]), 1.0)


def optimal_length(state: WorldState, choice: int) -> int:
    """Straight-line step count home → affordance → goal disc, plus the closing step."""
    cfg = state.cfg
    ax, ay = affordance_positions(state)[choice]
    reach = math.hypot(state.ee.x - ax, state.ee.y - ay)
    carry = max(math.hypot(cfg.goal_center[0] - ax, cfg.goal_center[1] - ay) - cfg.goal_radius, 0.0)
    return int(math.ceil(reach / cfg.v_max)) + 1 + int(math.ceil(carry / cfg.v_max))


@dataclass(frozen=True, eq=False)
class Dataset:
    trajectories: Tuple[Trajectory, ...]
    feature_mean: np.ndarray
    feature_std: np.ndarray
    variant: str = "train"
    seed: int = 0
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        trajs = tuple(self.trajectories)
        if not trajs:
            raise ValidationError("dataset has no trajectories")
        for tr in trajs:
            if not tr.success:
                raise ValidationError(f"trajectory {tr.traj_id} is not successful")
        object.__setattr__(self, "trajectories", trajs)
        object.__setattr__(self, "feature_mean", np.asarray(self.feature_mean, dtype=float))
        object.__setattr__(self, "feature_std", np.maximum(np.asarray(self.feature_std, dtype=float), STD_FLOOR))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.trajectories == other.trajectories
            and np.array_equal(self.feature_mean, other.feature_mean)
            and np.array_equal(self.feature_std, other.feature_std)
            and self.variant == other.variant
            and self.seed == other.seed
        )

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def count(self) -> int:
        return len(self.trajectories)

    @property
    def mean_length(self) -> float:
        return float(np.mean([tr.T for tr in self.trajectories]))

    def all_observations(self) -> np.ndarray:
        return np.concatenate([tr.observations for tr in self.trajectories])

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for tr in self.trajectories:
            h.update(np.ascontiguousarray(tr.observations).tobytes())
            h.update(np.ascontiguousarray(tr.actions).tobytes())
        return h.hexdigest()[:16]

    @classmethod
    def from_trajectories(cls, trajectories: Sequence[Trajectory], variant: str = "train", seed: int = 0) -> "Dataset":
        if not trajectories:
            raise ValidationError("dataset has no trajectories")
        obs = np.concatenate([tr.observations for tr in trajectories])
        return cls(
            trajectories=tuple(trajectories),
            feature_mean=obs.mean(axis=0),
            feature_std=obs.std(axis=0),
            variant=variant,
            seed=seed,
        )


def grasp_affordance(traj: Trajectory) -> Optional[int]:
    """Index of the affordance grasped at the first GraspAttach, from observations only."""
    for tr in traj.transitions:
        if Event.GRASP_ATTACH in tr.events:
            nxt = traj.transitions[tr.t + 1].obs if tr.t + 1 < traj.T else None
            if nxt is None or nxt[ATTACHED] < 0.5:
                return None
            aff = nxt[AFF_START:].reshape(-1, 2)
            d = np.hypot(aff[:, 0] - nxt[0], aff[:, 1] - nxt[1])
            return int(np.argmin(d))
    return None


def rollout_expert(
    cfg: ScenarioConfig,
    rng: SeedStream,
    *,
    reject_factor: Optional[float] = None,
    noise: Optional[float] = None,
    traj_id: int = 0,
) -> Optional[Trajectory]:
    """One expert episode; ``None`` when it is rejected."""
    if reject_factor is None:
        reject_factor = get_settings().demo_reject_factor
    state, obs = reset(cfg, rng)
    expert = ScriptedExpert(state.hidden, rng.generator(Purpose.EXPERT), noise=noise)
    limit = int(math.floor(reject_factor * optimal_length(state, expert.choice)))

    transitions: List[Transition] = []
    for t in range(limit):
        action = expert.act(state)
        nxt, out = step(state, action)
        transitions.append(
            Transition(obs=obs, proprio=state.ee, action=action, reward=out.reward, t=t, events=out.events)
        )
        if Event.SLIP in out.events:
            return None
        if out.done:
            return Trajectory(tuple(transitions), success=True, hidden_record=state.hidden, traj_id=traj_id)
        state, obs = nxt, out.obs
    return None


def generate_demos(cfg: ScenarioConfig, n: int, rng: SeedStream) -> Dataset:
    """Exactly ``n`` accepted expert demonstrations for ``cfg``."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    settings = get_settings()
    window: deque = deque(maxlen=settings.demo_reject_window)
    accepted: List[Trajectory] = []
    attempt = 0
    while len(accepted) < n:
        ep_rng = SeedStream(rng.seed, rng.stream * 1_000_003 + attempt)
        attempt += 1
        traj = rollout_expert(cfg, ep_rng, traj_id=len(accepted))
        window.append(traj is None)
        if traj is not None:
            accepted.append(traj)
        elif len(window) == window.maxlen and sum(window) / len(window) > settings.demo_max_reject_rate:
            raise ConfigurationError(
                f"demo rejection rate above {settings.demo_max_reject_rate:.0%} over the last {len(window)} episodes"
            )

    ds = Dataset.from_trajectories(accepted, variant=cfg.variant.value, seed=rng.seed)
    logger.info(
        "Generated %d %s demos in %d attempts (mean length %.1f)",
        n, cfg.variant.value, attempt, ds.mean_length,
    )
    return ds
