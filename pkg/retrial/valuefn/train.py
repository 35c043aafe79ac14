"""Value-function training and prediction.

Training samples (trajectory, step) pairs uniformly from the dataset,
standardises observations with the dataset's feature statistics and runs
minibatch Adam on the hand-written network in ``network.py``.  Scalar
labels are shifted and scaled to unit range internally; ``predict`` undoes
that so callers always see returns in reward units.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
from scipy.special import softmax

from retrial.config import get_settings
from retrial.core.dist import BIN_CENTERS, N_BINS, CategoricalValueDist
from retrial.core.errors import ConfigurationError, TrainingError, ValidationError
from retrial.core.rng import Purpose, SeedStream
from retrial.core.types import OBS_DIM, Backend
from retrial.demogen.expert import Dataset
from retrial.valuefn.network import MLPParams, forward, init_params, loss_and_grad
from retrial.valuefn.targets import progress_target, remaining_return

logger = logging.getLogger(__name__)

_ADAM_B1 = 0.9
_ADAM_B2 = 0.999
_ADAM_EPS = 1e-8
_LOSS_WINDOW = 100

ValuePrediction = Union[float, CategoricalValueDist]


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    batch: int = 64
    steps: int = 20_000
    seed: int = 0
    hidden: int = 64
    gamma: float = 1.0
    optimizer: str = "adam"

    def __post_init__(self) -> None:
        if self.lr <= 0 or self.batch < 1 or self.steps < 1 or self.hidden < 1:
            raise ConfigurationError(f"training settings must be positive: {self}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigurationError(f"unknown optimizer {self.optimizer!r}")

    @classmethod
    def from_settings(cls, seed: int = 0, **overrides: Any) -> "TrainConfig":
        s = get_settings()
        base = dict(
            lr=s.value_lr, batch=s.value_batch, steps=s.value_steps,
            seed=seed, hidden=s.value_hidden, gamma=s.value_gamma,
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


@dataclass(frozen=True, eq=False)
class ValueModel:
    backend: Backend
    params: MLPParams
    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_shift: float = 0.0
    target_scale: float = 1.0
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_in(self) -> int:
        return self.params.n_in

    def standardize(self, obs: np.ndarray) -> np.ndarray:
        return (obs - self.feature_mean) / self.feature_std


def _labels(ds: Dataset, backend: Backend, gamma: float) -> np.ndarray:
    rows = []
    for tr in ds.trajectories:
        for t in range(tr.T):
            if backend is Backend.SCALAR:
                rows.append([remaining_return(tr.T, t, gamma)])
            else:
                rows.append(progress_target(tr.T, t).p)
    return np.asarray(rows, dtype=float)


def train(dataset: Dataset, backend: Union[Backend, str], cfg: Optional[TrainConfig] = None) -> ValueModel:
    backend = Backend(backend)
    cfg = cfg or TrainConfig.from_settings()
    if dataset.count == 0:
        raise ValidationError("cannot train on an empty dataset")

    X = (dataset.all_observations() - dataset.feature_mean) / dataset.feature_std
    Y = _labels(dataset, backend, cfg.gamma)
    shift, scale = 0.0, 1.0
    if backend is Backend.SCALAR:
        shift = float(Y.mean())
        scale = float(max(Y.std(), 1.0))
        Y = (Y - shift) / scale

    rng = SeedStream(cfg.seed).generator(Purpose.TRAIN)
    n_out = 1 if backend is Backend.SCALAR else N_BINS
    params = init_params(X.shape[1], cfg.hidden, n_out, rng)
    m = {k: np.zeros_like(v) for k, v in params.arrays().items()}
    v = {k: np.zeros_like(a) for k, a in params.arrays().items()}

    losses = np.empty(cfg.steps)
    for it in range(cfg.steps):
        idx = rng.integers(0, X.shape[0], size=cfg.batch)
        loss, grads = loss_and_grad(params, X[idx], Y[idx], backend)
        if not np.isfinite(loss):
            raise TrainingError("non-finite loss", step=it)
        losses[it] = loss
        for name, g in grads.arrays().items():
            p = getattr(params, name)
            if cfg.optimizer == "sgd":
                p -= cfg.lr * g
                continue
            m[name] = _ADAM_B1 * m[name] + (1 - _ADAM_B1) * g
            v[name] = _ADAM_B2 * v[name] + (1 - _ADAM_B2) * g * g
            m_hat = m[name] / (1 - _ADAM_B1 ** (it + 1))
            v_hat = v[name] / (1 - _ADAM_B2 ** (it + 1))
            p -= cfg.lr * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)

    window = min(_LOSS_WINDOW, cfg.steps)
    meta = {
        "dataset_hash": dataset.content_hash(),
        "mean_length": dataset.mean_length,
        "steps": cfg.steps,
        "seed": cfg.seed,
        "lr": cfg.lr,
        "batch": cfg.batch,
        "gamma": cfg.gamma,
        "optimizer": cfg.optimizer,
        "loss_head": float(losses[:window].mean()),
        "loss_tail": float(losses[-window:].mean()),
    }
    logger.info(
        "Trained %s value model: %d steps, loss %.4f -> %.4f",
        backend.value, cfg.steps, meta["loss_head"], meta["loss_tail"],
    )
    return ValueModel(
        backend=backend,
        params=params,
        feature_mean=dataset.feature_mean.copy(),
        feature_std=dataset.feature_std.copy(),
        target_shift=shift,
        target_scale=scale,
        meta=meta,
    )


def _check_obs(model: ValueModel, obs: np.ndarray) -> np.ndarray:
    obs = np.asarray(obs, dtype=float)
    if obs.shape[-1] != model.n_in or model.n_in != OBS_DIM:
        raise ValidationError(f"observation width {obs.shape[-1]} does not match model input {model.n_in}")
    return obs


def predict_batch(model: ValueModel, obs: np.ndarray) -> np.ndarray:
    """Returns shape (N,) for scalar models, (N, 50) probabilities for categorical."""
    obs = np.atleast_2d(_check_obs(model, obs))
    _, out = forward(model.params, model.standardize(obs))
    if model.backend is Backend.SCALAR:
        return out[:, 0] * model.target_scale + model.target_shift
    p = softmax(out, axis=1)
    return p / p.sum(axis=1, keepdims=True)


def predict(model: ValueModel, obs: np.ndarray) -> ValuePrediction:
    obs = _check_obs(model, obs)
    if obs.ndim != 1:
        raise ValidationError(f"predict takes one observation, got shape {obs.shape}")
    out = predict_batch(model, obs)[0]
    if model.backend is Backend.SCALAR:
        return float(out)
    return CategoricalValueDist(out)


def progress_values(model: ValueModel, obs: np.ndarray) -> np.ndarray:
    """Scalar value, or expected progress fraction for categorical models."""
    out = predict_batch(model, obs)
    if model.backend is Backend.SCALAR:
        return out
    return out @ BIN_CENTERS
