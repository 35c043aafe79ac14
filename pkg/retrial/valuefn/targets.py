"""Regression labels.

Rewards are -1 per step and 0 on the success step, so the return from step
``t`` of a successful episode of length ``T`` is the (discounted) count of
the ``T - t`` remaining penalty steps, with the terminal success state worth
zero.  The categorical label spreads a third of the mass over the progress
bin of ``t / T`` and its two neighbours.
"""

from __future__ import annotations

import math

import numpy as np

from retrial.core.dist import N_BINS, CategoricalValueDist
from retrial.core.errors import ValidationError
from retrial.core.types import Trajectory


def remaining_return(T: int, t: int, gamma: float = 1.0) -> float:
    if T < 1 or not 0 <= t <= T - 1:
        raise ValidationError(f"step {t} out of range for an episode of length {T}")
    if not 0.0 < gamma <= 1.0:
        raise ValidationError(f"gamma must be in (0, 1], got {gamma}")
    return -sum(gamma ** i for i in range(T - t))


def scalar_target(traj: Trajectory, t: int, gamma: float = 1.0) -> float:
    return remaining_return(traj.T, t, gamma)


def progress_bin(T: int, t: int) -> int:
    if T < 1 or not 0 <= t <= T:
        raise ValidationError(f"step {t} out of range for an episode of length {T}")
    b = int(math.floor(N_BINS * t / T + 0.5))
    return min(max(b, 0), N_BINS - 1)


def progress_target(T: int, t: int) -> CategoricalValueDist:
    b = progress_bin(T, t)
    bins = [i for i in (b - 1, b, b + 1) if 0 <= i < N_BINS]
    p = np.zeros(N_BINS)
    p[bins] = 1.0 / len(bins)
    return CategoricalValueDist(p)


def categorical_target(traj: Trajectory, t: int) -> CategoricalValueDist:
    return progress_target(traj.T, t)
