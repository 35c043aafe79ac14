"""Rank-correlation check that predicted value rises along demonstrations."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Callable, List, Sequence, Union

import numpy as np
from scipy.stats import spearmanr

from retrial.core.types import Trajectory
from retrial.demogen.expert import Dataset
from retrial.valuefn.train import ValueModel, progress_values

logger = logging.getLogger(__name__)

Scorer = Callable[[Trajectory], Sequence[float]]


@dataclass
class MonotonicityReport:
    correlations: List[float]
    median: float
    minimum: float

    def to_dict(self) -> dict:
        return asdict(self)


def _spearman(values: np.ndarray) -> float:
    if values.size < 2 or np.ptp(values) == 0:
        return 0.0
    rho = spearmanr(np.arange(values.size), values)[0]
    return float(rho) if np.isfinite(rho) else 0.0


def monotonicity_report(model: Union[ValueModel, Scorer], demos: Dataset) -> MonotonicityReport:
    """Spearman correlation of value against step index, per trajectory.

    ``model`` may also be a callable returning one value per step, which is
    how oracle values are scored.
    """
    corr = []
    for tr in demos.trajectories:
        if isinstance(model, ValueModel):
            values = progress_values(model, tr.observations)
        else:
            values = np.asarray(model(tr), dtype=float)
        corr.append(_spearman(values))
    arr = np.asarray(corr)
    rep = MonotonicityReport(correlations=corr, median=float(np.median(arr)), minimum=float(arr.min()))
    logger.info("Value monotonicity over %d demos: median %.3f, min %.3f", len(corr), rep.median, rep.minimum)
    return rep
