"""Newline-delimited JSON dataset files.

Layout::

    line 1   {"format": "retrial-demos", "version": 1, "variant", "seed",
              "count", "mean_length", "feature_mean", "feature_std"}
    line 2+  {"id", "hidden", "steps": [{"obs", "proprio", "action",
              "reward", "events"}]}

Floats are written with ``repr`` precision so a round-trip is lossless.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from retrial.core.errors import DatasetFormatError, ValidationError, VersionError
from retrial.core.types import ProprioPoint, Trajectory, Transition
from retrial.demogen.expert import Dataset
from retrial.graspworld.scenario import HiddenParam

logger = logging.getLogger(__name__)

FORMAT = "retrial-demos"
VERSION = 1


def _traj_to_dict(tr: Trajectory) -> Dict[str, Any]:
    return {
        "id": tr.traj_id,
        "hidden": tr.hidden_record.to_dict() if tr.hidden_record is not None else None,
        "steps": [
            {
                "obs": s.obs.tolist(),
                "proprio": s.proprio.to_list(),
                "action": s.action.to_list(),
                "reward": s.reward,
                "events": sorted(e.value for e in s.events),
            }
            for s in tr.transitions
        ],
    }


def _traj_from_dict(d: Dict[str, Any]) -> Trajectory:
    hidden = HiddenParam.from_dict(d["hidden"]) if d.get("hidden") is not None else None
    steps = [
        Transition(
            obs=s["obs"],
            proprio=ProprioPoint.from_seq(s["proprio"]),
            action=ProprioPoint.from_seq(s["action"]),
            reward=float(s["reward"]),
            t=i,
            events=frozenset(s.get("events", [])),
        )
        for i, s in enumerate(d["steps"])
    ]
    return Trajectory(tuple(steps), success=True, hidden_record=hidden, traj_id=int(d["id"]))


def write_dataset(d: Dataset, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": FORMAT,
        "version": VERSION,
        "variant": d.variant,
        "seed": d.seed,
        "count": d.count,
        "mean_length": d.mean_length,
        "feature_mean": d.feature_mean.tolist(),
        "feature_std": d.feature_std.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for tr in d.trajectories:
            fh.write(json.dumps(_traj_to_dict(tr)) + "\n")
    logger.info("Wrote %d trajectories to %s", d.count, path)
    return path


def _parse_line(raw: str, lineno: int) -> Dict[str, Any]:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"invalid JSON ({exc.msg})", line=lineno) from exc
    if not isinstance(obj, dict):
        raise DatasetFormatError("expected a JSON object", line=lineno)
    return obj


def read_dataset(path: Union[str, Path]) -> Dataset:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DatasetFormatError("empty file", line=1)

    header = _parse_line(lines[0], 1)
    if header.get("format") != FORMAT:
        raise DatasetFormatError(f"not a {FORMAT} file (format={header.get('format')!r})", line=1)
    if header.get("version") != VERSION:
        raise VersionError(f"unsupported version {header.get('version')!r}, expected {VERSION}", line=1)
    try:
        count = int(header["count"])
        mean = header["feature_mean"]
        std = header["feature_std"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetFormatError(f"incomplete header ({exc})", line=1) from exc

    trajectories: List[Trajectory] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        obj = _parse_line(raw, lineno)
        try:
            trajectories.append(_traj_from_dict(obj))
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(f"bad trajectory record ({exc})", line=lineno) from exc

    if len(trajectories) != count:
        raise DatasetFormatError(
            f"header declares {count} trajectories but file holds {len(trajectories)} (truncated?)",
            line=len(lines),
        )
    try:
        return Dataset(
            trajectories=tuple(trajectories),
            feature_mean=mean,
            feature_std=std,
            variant=str(header.get("variant", "train")),
            seed=int(header.get("seed", 0)),
        )
    except ValidationError as exc:
        raise DatasetFormatError(str(exc), line=1) from exc
