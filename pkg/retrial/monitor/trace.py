"""CSV export of per-step monitor verdicts."""

from __future__ import annotations

import csv
import io
import logging
from pathlib import Path
from typing import IO, Sequence, Union

from retrial.monitor.engine import MonitorConfig, ProgressVerdict, ValueHistory

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("step", "delta", "threshold", "triggered")

Sink = Union[str, Path, IO[str]]


def _write(rows: Sequence[ProgressVerdict], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for v in rows:
        writer.writerow([v.step, repr(float(v.delta)), repr(float(v.threshold)), int(v.triggered)])


def emit_trace(
    history: Union[ValueHistory, Sequence[ProgressVerdict]],
    cfg: MonitorConfig,
    sink: Sink,
) -> int:
    """Write one row per judged step; returns the row count.

    ``delta`` is progress beyond the expected pace (value change minus the
    k-step expectation), so it hovers near zero for expert-like rollouts and
    drops below zero when progress stalls.
    """
    rows = list(history.verdicts if isinstance(history, ValueHistory) else history)
    if isinstance(sink, (str, Path)):
        path = Path(sink)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                _write(rows, fh)
        except OSError as exc:
            raise OSError(f"failed to write trace to {path}: {exc}") from exc
    else:
        _write(rows, sink)
    logger.info("Wrote %d trace rows (k=%d, backend=%s)", len(rows), cfg.k, cfg.backend.value)
    return len(rows)


def trace_to_string(history: Union[ValueHistory, Sequence[ProgressVerdict]], cfg: MonitorConfig) -> str:
    buf = io.StringIO()
    emit_trace(history, cfg, buf)
    return buf.getvalue()
