"""Value-model JSON files.

Weights are stored row-major as flat lists next to their shapes; floats keep
``repr`` precision so a save/load round-trip is bit-exact.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from retrial.core.errors import DatasetFormatError, VersionError
from retrial.core.types import Backend
from retrial.valuefn.network import MLPParams
from retrial.valuefn.train import ValueModel

logger = logging.getLogger(__name__)

FORMAT = "retrial-value"
VERSION = 1


def _layer(W: np.ndarray, b: np.ndarray) -> Dict[str, Any]:
    return {"shape": list(W.shape), "weights": W.ravel(order="C").tolist(), "bias": b.tolist()}


def _unlayer(d: Dict[str, Any]) -> List[np.ndarray]:
    shape = tuple(int(s) for s in d["shape"])
    W = np.asarray(d["weights"], dtype=float)
    if W.size != shape[0] * shape[1]:
        raise ValueError(f"weights hold {W.size} values, shape {shape} needs {shape[0] * shape[1]}")
    b = np.asarray(d["bias"], dtype=float)
    if b.shape != (shape[1],):
        raise ValueError(f"bias has shape {b.shape}, expected ({shape[1]},)")
    return [W.reshape(shape), b]


def model_to_dict(model: ValueModel) -> Dict[str, Any]:
    p = model.params
    return {
        "format": FORMAT,
        "version": VERSION,
        "backend": model.backend.value,
        "layers": [_layer(p.W1, p.b1), _layer(p.W2, p.b2)],
        "feature_mean": model.feature_mean.tolist(),
        "feature_std": model.feature_std.tolist(),
        "target_shift": model.target_shift,
        "target_scale": model.target_scale,
        "meta": model.meta,
    }


def model_from_dict(d: Dict[str, Any]) -> ValueModel:
    if d.get("format") != FORMAT:
        raise DatasetFormatError(f"not a {FORMAT} file (format={d.get('format')!r})")
    if d.get("version") != VERSION:
        raise VersionError(f"unsupported model version {d.get('version')!r}, expected {VERSION}")
    try:
        layers = d["layers"]
        if len(layers) != 2:
            raise ValueError(f"expected 2 layers, got {len(layers)}")
        W1, b1 = _unlayer(layers[0])
        W2, b2 = _unlayer(layers[1])
        if W1.shape[1] != W2.shape[0]:
            raise ValueError("layer shapes do not chain")
        return ValueModel(
            backend=Backend(d["backend"]),
            params=MLPParams(W1, b1, W2, b2),
            feature_mean=np.asarray(d["feature_mean"], dtype=float),
            feature_std=np.asarray(d["feature_std"], dtype=float),
            target_shift=float(d.get("target_shift", 0.0)),
            target_scale=float(d.get("target_scale", 1.0)),
            meta=dict(d.get("meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetFormatError(f"malformed value model ({exc})") from exc


def save_model(model: ValueModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(model)), encoding="utf-8")
    logger.info("Saved %s value model to %s", model.backend.value, path)
    return path


def load_model(path: Union[str, Path]) -> ValueModel:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: invalid JSON ({exc.msg})", line=exc.lineno) from exc
    return model_from_dict(d)
