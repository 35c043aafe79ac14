"""Benchmark statistics.

Per (variant, method):
  success rate      – per-seed rate, then mean ± sample std across seeds
  timesteps         – steps to success, failures scored at the horizon;
                      per-seed mean, then mean ± sample std across seeds
  recoveries        – mean count and the count distribution
  recovery timing   – attempt lengths bucketed at 10 steps, plus the share
                      of recoveries triggered before the mean expert length
  grasp diversity   – mean distance between consecutive grasp attempts

Per variant, the grasp-diversity gap between ours_full and ours_no_skew gets
a percentile bootstrap 95% interval.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from retrial.bench.harness import TrialRecord
from retrial.bench.methods import Method
from retrial.config import get_settings
from retrial.core.errors import ValidationError
from retrial.core.rng import Purpose, SeedStream

logger = logging.getLogger(__name__)

HIST_BUCKET = 10
CSV_COLUMNS = ["variant", "method", "success_mean", "success_std", "steps_mean", "steps_std", "recoveries_mean"]


@dataclass
class MethodSummary:
    variant: str
    method: str
    n_trials: int
    n_seeds: int
    success_mean: float
    success_std: float
    steps_mean: float
    steps_std: float
    recoveries_mean: float
    recovery_counts: Dict[str, int] = field(default_factory=dict)
    recovery_hist: Dict[str, int] = field(default_factory=dict)
    early_fraction: Optional[float] = None
    grasp_distance_mean: Optional[float] = None
    grasp_pairs: int = 0


@dataclass
class DiversityContrast:
    variant: str
    full_mean: float
    no_skew_mean: float
    diff: float
    ci_low: float
    ci_high: float


@dataclass
class Summary:
    rows: List[MethodSummary]
    diversity: List[DiversityContrast] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.rows)

    def get(self, variant: str, method: str) -> MethodSummary:
        for r in self.rows:
            if r.variant == variant and r.method == method:
                return r
        raise KeyError(f"no summary row for ({variant}, {method})")

    def to_dict(self) -> Dict[str, Any]:
        return {"rows": [asdict(r) for r in self.rows], "diversity": [asdict(d) for d in self.diversity]}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.rows])[CSV_COLUMNS]


def grasp_gaps(record: TrialRecord) -> List[float]:
    """Distances between consecutive grasp attempts within one trial."""
    pts = np.asarray(record.grasp_attempts, dtype=float)
    if pts.shape[0] < 2:
        return []
    return np.hypot(*(pts[1:] - pts[:-1]).T).tolist()


def bootstrap_diff_ci(
    a: Sequence[float],
    b: Sequence[float],
    *,
    resamples: int,
    seed: int = 0,
    alpha: float = 0.05,
) -> tuple:
    """Percentile interval for mean(a) - mean(b), resampling each side independently."""
    xa, xb = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    diff = float(xa.mean() - xb.mean())
    rng = SeedStream(seed).generator(Purpose.BOOTSTRAP)
    ia = rng.integers(0, xa.size, size=(resamples, xa.size))
    ib = rng.integers(0, xb.size, size=(resamples, xb.size))
    samples = xa[ia].mean(axis=1) - xb[ib].mean(axis=1)
    lo = float(np.quantile(samples, alpha / 2))
    hi = float(np.quantile(samples, 1 - alpha / 2))
    return diff, lo, hi


def _summarize_group(variant: str, method: str, recs: List[TrialRecord]) -> MethodSummary:
    df = pd.DataFrame(
        {
            "seed": [r.seed for r in recs],
            "success": [1.0 if r.success else 0.0 for r in recs],
            "steps": [float(r.steps if r.success else r.horizon) for r in recs],
            "recoveries": [float(r.recoveries) for r in recs],
        }
    )
    per_seed = df.groupby("seed", sort=True)[["success", "steps"]].mean()
    n_seeds = len(per_seed)

    def _std(col: str) -> float:
        return float(per_seed[col].std(ddof=1)) if n_seeds > 1 else 0.0

    counts = df["recoveries"].astype(int).value_counts().sort_index()
    attempts = [a for r in recs for a in r.attempt_lengths]
    hist = pd.Series([a // HIST_BUCKET * HIST_BUCKET for a in attempts], dtype=int).value_counts().sort_index()
    early = [a < r.mean_length for r in recs for a in r.attempt_lengths]
    gaps = [g for r in recs for g in grasp_gaps(r)]

    return MethodSummary(
        variant=variant,
        method=method,
        n_trials=len(recs),
        n_seeds=n_seeds,
        success_mean=float(per_seed["success"].mean()),
        success_std=_std("success"),
        steps_mean=float(per_seed["steps"].mean()),
        steps_std=_std("steps"),
        recoveries_mean=float(df["recoveries"].mean()),
        recovery_counts={str(int(k)): int(v) for k, v in counts.items()},
        recovery_hist={str(int(k)): int(v) for k, v in hist.items()},
        early_fraction=float(np.mean(early)) if early else None,
        grasp_distance_mean=float(np.mean(gaps)) if gaps else None,
        grasp_pairs=len(gaps),
    )


def summarize(records: Sequence[TrialRecord], *, resamples: Optional[int] = None, seed: int = 0) -> Summary:
    if not records:
        raise ValidationError("cannot summarize an empty record list")
    if resamples is None:
        resamples = get_settings().bootstrap_resamples

    groups: Dict[tuple, List[TrialRecord]] = {}
    for r in sorted(records, key=lambda r: r.key):
        groups.setdefault((r.variant, r.method), []).append(r)
    rows = [_summarize_group(v, m, recs) for (v, m), recs in sorted(groups.items())]

    diversity = []
    for variant in sorted({r.variant for r in records}):
        full = groups.get((variant, Method.OURS_FULL.value), [])
        plain = groups.get((variant, Method.OURS_NO_SKEW.value), [])
        ga = [g for r in full for g in grasp_gaps(r)]
        gb = [g for r in plain for g in grasp_gaps(r)]
        if not ga or not gb:
            continue
        diff, lo, hi = bootstrap_diff_ci(ga, gb, resamples=resamples, seed=seed)
        diversity.append(DiversityContrast(variant, float(np.mean(ga)), float(np.mean(gb)), diff, lo, hi))

    for row in rows:
        logger.info(
            "%s / %s: success %.3f ± %.3f, steps %.1f, recoveries %.2f",
            row.variant, row.method, row.success_mean, row.success_std, row.steps_mean, row.recoveries_mean,
        )
    return Summary(rows=rows, diversity=diversity)
