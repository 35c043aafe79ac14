"""Dataset quality checks.

Hard violations raise ``ValidationError``; soft issues come back as a list of
warning strings and are logged.
"""

from __future__ import annotations

import logging
from collections import Counter
from typing import List

from retrial.core.errors import ValidationError
from retrial.core.types import N_AFFORDANCES
from retrial.demogen.expert import Dataset, grasp_affordance

logger = logging.getLogger(__name__)

MIN_LENGTH = 2
MIN_COVERAGE = 0.10
COVERAGE_SAMPLE = 100


def validate_dataset(ds: Dataset) -> List[str]:
    warnings: List[str] = []

    for tr in ds.trajectories:
        if not tr.success:
            raise ValidationError(f"trajectory {tr.traj_id} is not successful")
        for i, s in enumerate(tr.transitions):
            if s.t != i:
                raise ValidationError(f"trajectory {tr.traj_id} has non-contiguous step {s.t} at {i}")
        if tr.T < MIN_LENGTH:
            warnings.append(f"trajectory {tr.traj_id} has only {tr.T} steps")

    if ds.variant in ("train", "held_out") and ds.count >= COVERAGE_SAMPLE:
        counts = Counter(grasp_affordance(tr) for tr in ds.trajectories)
        for a in range(N_AFFORDANCES):
            share = counts.get(a, 0) / ds.count
            if share < MIN_COVERAGE:
                warnings.append(f"affordance {a} chosen in {share:.1%} of demos (< {MIN_COVERAGE:.0%})")

    for w in warnings:
        logger.warning("Dataset check: %s", w)
    return warnings
