"""Benchmark output files.

Writes, under one directory:
  summary.json             full Summary
  trials.jsonl             one TrialRecord per line, sorted by key
  summary.csv              headline table
  success_rates.svg        success rate per method per variant, ± std
  timesteps.svg            timesteps-to-success per method per variant, ± std
  recovery_histogram.svg   attempt length at recovery, 10-step buckets
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from retrial.bench import charts
from retrial.bench.harness import TrialRecord
from retrial.bench.summary import CSV_COLUMNS, HIST_BUCKET, Summary
from retrial.core.errors import ValidationError

logger = logging.getLogger(__name__)


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc
    return path


def write_records(records: Sequence[TrialRecord], path: Union[str, Path]) -> Path:
    ordered = sorted(records, key=lambda r: r.key)
    return _write(Path(path), "".join(r.to_json() + "\n" for r in ordered))


def _recovery_chart(path: Path, summary: Summary, mean_length: Optional[float]) -> Path:
    present = sorted({int(b) for r in summary.rows for b in r.recovery_hist}) or [0]
    buckets = list(range(present[0], present[-1] + HIST_BUCKET, HIST_BUCKET))
    counts: Dict[str, List[int]] = {
        f"{r.variant}/{r.method}": [r.recovery_hist.get(str(b), 0) for b in buckets]
        for r in summary.rows
        if r.recovery_hist
    }
    return charts.histogram(
        path,
        buckets,
        counts,
        bucket_width=HIST_BUCKET,
        title="Attempt length at recovery",
        x_label="policy steps",
        marker=mean_length,
    )


def report(summary: Summary, records: Sequence[TrialRecord], out_dir: Union[str, Path]) -> List[Path]:
    if not summary or not summary.rows:
        raise ValidationError("refusing to write a report for an empty summary")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    written = [
        _write(out / "summary.json", json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n"),
        write_records(records, out / "trials.jsonl"),
    ]
    frame = summary.to_frame()
    try:
        frame.to_csv(out / "summary.csv", index=False, columns=CSV_COLUMNS)
    except OSError as exc:
        raise OSError(f"failed to write {out / 'summary.csv'}: {exc}") from exc
    written.append(out / "summary.csv")

    mean_length = records[0].mean_length if records else None
    variants = list(dict.fromkeys(r.variant for r in summary.rows))
    methods = list(dict.fromkeys(r.method for r in summary.rows))
    success = {(r.variant, r.method): (r.success_mean, r.success_std) for r in summary.rows}
    steps = {(r.variant, r.method): (r.steps_mean, r.steps_std) for r in summary.rows}
    written.append(charts.grouped_bars(
        out / "success_rates.svg", variants, methods, success,
        title="Success rate", y_label="success rate", y_max=1.0,
    ))
    written.append(charts.grouped_bars(
        out / "timesteps.svg", variants, methods, steps, title="Timesteps to success", y_label="steps",
    ))
    written.append(_recovery_chart(out / "recovery_histogram.svg", summary, mean_length))
    logger.info("Wrote %d report files to %s", len(written), out)
    return written
