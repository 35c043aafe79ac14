"""Grasp-and-carry dynamics.

``WorldState`` is an immutable value; ``step`` and ``run_recovery`` return new
states.  Slip draws come from a generator keyed on (seed, stream, recovery
count, step counter), so a state plus an action fully determines the
outcome.

Step order:
  1. move the end-effector toward the target by at most ``v_max``;
     an attached object follows
  2. while attached, roll the slip probability of the grasped affordance
  3. apply the gripper command; opening releases the object, an
     open→closed transition near an affordance tries to attach
  4. attached and inside the goal disc → Success (reward 0), else -1

Jaws that close on a blocked affordance catch on its barrier: the
end-effector holds position until a command reopens the gripper.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import FrozenSet, Tuple

import numpy as np

from retrial.core.errors import UsageError
from retrial.core.rng import Purpose, SeedStream
from retrial.core.types import OBS_DIM, Event, ProprioPoint
from retrial.graspworld.scenario import HiddenParam, ScenarioConfig, sample_hidden

logger = logging.getLogger(__name__)

_TICK_EPS = 1e-9


@dataclass(frozen=True)
class WorldState:
    cfg: ScenarioConfig
    ee: ProprioPoint
    obj: Tuple[float, float, float]
    hidden: HiddenParam
    attached_id: int = -1
    jammed: bool = False
    step_count: int = 0
    recovery_count: int = 0
    done: bool = False
    seed: int = 0
    stream: int = 0

    @property
    def attached(self) -> bool:
        return self.attached_id >= 0


@dataclass(frozen=True, eq=False)
class StepOutcome:
    obs: np.ndarray
    reward: float
    done: bool
    events: FrozenSet[Event]


def _offset_world(cfg: ScenarioConfig, hidden: HiddenParam, theta: float) -> np.ndarray:
    """Affordance offsets from the object centre, rotated into the world frame."""
    off = np.asarray(cfg.affordance_offsets, dtype=float) * np.asarray(hidden.offset_scale, dtype=float)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    return off @ rot.T


def affordance_positions(state: WorldState) -> np.ndarray:
    """World positions of the four affordances, shape (4, 2)."""
    x, y, theta = state.obj
    return np.array([x, y]) + _offset_world(state.cfg, state.hidden, theta)


def observe(state: WorldState) -> np.ndarray:
    obs = np.empty(OBS_DIM)
    obs[0:3] = (state.ee.x, state.ee.y, state.ee.gripper)
    obs[3:6] = state.obj
    obs[6] = 1.0 if state.attached else 0.0
    obs[7:] = affordance_positions(state).reshape(-1)
    obs.setflags(write=False)
    return obs


def reset(cfg: ScenarioConfig, rng: SeedStream) -> Tuple[WorldState, np.ndarray]:
    """Fresh episode: home pose, new hidden parameter, random object placement."""
    gen = rng.generator(Purpose.SCENARIO)
    hidden = sample_hidden(cfg.variant, gen)
    lo = np.asarray(cfg.placement_low, dtype=float)
    hi = np.asarray(cfg.placement_high, dtype=float)
    xy = gen.uniform(lo, hi)
    theta = float(gen.uniform(0.0, 2.0 * math.pi))
    state = WorldState(
        cfg=cfg,
        ee=ProprioPoint(*cfg.home),
        obj=(float(xy[0]), float(xy[1]), theta),
        hidden=hidden,
        seed=rng.seed,
        stream=rng.stream,
    )
    return state, observe(state)


def _slip_draw(state: WorldState) -> float:
    ss = SeedStream(state.seed, state.stream)
    return float(ss.generator(Purpose.DYNAMICS, state.recovery_count, state.step_count).random())


def _move_toward(ee: ProprioPoint, tx: float, ty: float, v_max: float) -> Tuple[float, float]:
    dx, dy = tx - ee.x, ty - ee.y
    dist = math.hypot(dx, dy)
    if dist > v_max:
        dx, dy = dx * v_max / dist, dy * v_max / dist
    return min(max(ee.x + dx, 0.0), 1.0), min(max(ee.y + dy, 0.0), 1.0)


def step(state: WorldState, target: ProprioPoint) -> Tuple[WorldState, StepOutcome]:
    if state.done:
        raise UsageError("cannot step a terminal state; call reset()")
    cfg, hidden = state.cfg, state.hidden
    events = set()

    gripper = 1.0 if target.gripper >= 0.5 else 0.0
    jammed = state.jammed and gripper == 0.0
    if jammed:
        x, y = state.ee.x, state.ee.y
    else:
        x, y = _move_toward(state.ee, target.x, target.y, cfg.v_max)
    obj = state.obj
    attached_id = state.attached_id

    if attached_id >= 0:
        theta = obj[2]
        off = _offset_world(cfg, hidden, theta)[attached_id]
        obj = (x - float(off[0]), y - float(off[1]), theta)
        p = hidden.slip_prob[attached_id]
        if p > 0.0 and _slip_draw(state) < p:
            events.add(Event.SLIP)
            attached_id = -1

    if gripper == 1.0:
        attached_id = -1
    elif not state.ee.closed and attached_id < 0:
        probe = replace(state, obj=obj)
        aff = affordance_positions(probe)
        d = np.hypot(aff[:, 0] - x, aff[:, 1] - y)
        j = int(np.argmin(d))
        if d[j] <= cfg.grasp_radius:
            if hidden.blocked[j]:
                events.add(Event.GRASP_FAIL_BLOCKED)
                jammed = True
            else:
                events.add(Event.GRASP_ATTACH)
                attached_id = j
                # snap so the grasped affordance sits under the gripper
                off = _offset_world(cfg, hidden, obj[2])[j]
                obj = (x - float(off[0]), y - float(off[1]), obj[2])

    done = False
    reward = -1.0
    if attached_id >= 0 and math.hypot(x - cfg.goal_center[0], y - cfg.goal_center[1]) <= cfg.goal_radius:
        events.add(Event.SUCCESS)
        done = True
        reward = 0.0

    new_state = replace(
        state,
        ee=ProprioPoint(x, y, gripper),
        obj=obj,
        attached_id=attached_id,
        jammed=jammed,
        step_count=state.step_count + 1,
        done=done,
    )
    return new_state, StepOutcome(observe(new_state), reward, done, frozenset(events))


def recovery_ticks(state: WorldState) -> int:
    hx, hy, _ = state.cfg.home
    dist = math.hypot(state.ee.x - hx, state.ee.y - hy)
    if dist == 0.0:
        return 0
    return int(math.ceil(dist / state.cfg.v_max - _TICK_EPS))


def run_recovery(state: WorldState) -> Tuple[WorldState, int]:
    """Open the gripper, free a jam, drop anything held and drive home.

    Ticks spent here are reported but never added to ``step_count``.
    """
    ticks = recovery_ticks(state)
    new_state = replace(
        state,
        ee=ProprioPoint(*state.cfg.home),
        attached_id=-1,
        jammed=False,
        recovery_count=state.recovery_count + 1,
    )
    logger.debug("Recovery %d used %d ticks", new_state.recovery_count, ticks)
    return new_state, ticks

