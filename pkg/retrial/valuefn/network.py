"""Two-layer tanh network with hand-derived gradients.

    z1 = x W1 + b1       (batch, hidden)
    h  = tanh(z1)
    o  = h W2 + b2       (batch, out)

Scalar head: ``out = 1``, loss = mean squared error.
Categorical head: ``out = 50`` logits, loss = mean cross-entropy against a
soft target distribution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from retrial.core.types import Backend

logger = logging.getLogger(__name__)

PARAM_NAMES = ("W1", "b1", "W2", "b2")


@dataclass
class MLPParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    @property
    def n_in(self) -> int:
        return int(self.W1.shape[0])

    @property
    def n_hidden(self) -> int:
        return int(self.W1.shape[1])

    @property
    def n_out(self) -> int:
        return int(self.W2.shape[1])

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "MLPParams":
        return MLPParams(*(getattr(self, n).copy() for n in PARAM_NAMES))

    def flat(self) -> np.ndarray:
        return np.concatenate([getattr(self, n).ravel() for n in PARAM_NAMES])

    def with_flat(self, vec: np.ndarray) -> "MLPParams":
        out, pos = [], 0
        for n in PARAM_NAMES:
            ref = getattr(self, n)
            out.append(np.asarray(vec[pos:pos + ref.size], dtype=float).reshape(ref.shape))
            pos += ref.size
        return MLPParams(*out)

    def equals(self, other: "MLPParams") -> bool:
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in PARAM_NAMES)


def init_params(n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> MLPParams:
    """Glorot-style normal init, zero biases."""
    return MLPParams(
        W1=rng.normal(0.0, np.sqrt(1.0 / n_in), size=(n_in, n_hidden)),
        b1=np.zeros(n_hidden),
        W2=rng.normal(0.0, np.sqrt(1.0 / n_hidden), size=(n_hidden, n_out)),
        b2=np.zeros(n_out),
    )


def forward(params: MLPParams, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Return (hidden activations, raw outputs)."""
    H = np.tanh(X @ params.W1 + params.b1)
    return H, H @ params.W2 + params.b2


def loss_only(params: MLPParams, X: np.ndarray, Y: np.ndarray, backend: Backend) -> float:
    _, out = forward(params, X)
    if Backend(backend) is Backend.SCALAR:
        return float(np.mean((out - Y) ** 2))
    return float(-np.mean(np.sum(Y * log_softmax(out, axis=1), axis=1)))


def loss_and_grad(
    params: MLPParams, X: np.ndarray, Y: np.ndarray, backend: Backend
) -> Tuple[float, MLPParams]:
    B = X.shape[0]
    H, out = forward(params, X)
    if Backend(backend) is Backend.SCALAR:
        err = out - Y
        loss = float(np.mean(err ** 2))
        d_out = 2.0 * err / err.size
    else:
        loss = float(-np.mean(np.sum(Y * log_softmax(out, axis=1), axis=1)))
        # targets sum to one per row
        d_out = (softmax(out, axis=1) - Y) / B

    dW2 = H.T @ d_out
    db2 = d_out.sum(axis=0)
    dZ1 = (d_out @ params.W2.T) * (1.0 - H ** 2)
    dW1 = X.T @ dZ1
    db1 = dZ1.sum(axis=0)
    return loss, MLPParams(dW1, db1, dW2, db2)


def gradient_check(
    params: MLPParams,
    X: np.ndarray,
    Y: np.ndarray,
    backend: Backend,
    *,
    eps: float = 1e-5,
    n_coords: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Relative error between analytic and central-difference gradients.

    ``||g_analytic - g_numeric|| / max(||g_analytic||, ||g_numeric||)`` over
    all parameters, or over ``n_coords`` randomly chosen coordinates.
    """
    _, grads = loss_and_grad(params, X, Y, backend)
    analytic = grads.flat()
    theta = params.flat()
    coords = np.arange(theta.size)
    if n_coords is not None and n_coords < theta.size:
        rng = rng or np.random.default_rng(0)
        coords = rng.choice(theta.size, size=n_coords, replace=False)

    numeric = np.empty(coords.size)
    for j, c in enumerate(coords):
        plus, minus = theta.copy(), theta.copy()
        plus[c] += eps
        minus[c] -= eps
        f_plus = loss_only(params.with_flat(plus), X, Y, backend)
        f_minus = loss_only(params.with_flat(minus), X, Y, backend)
        numeric[j] = (f_plus - f_minus) / (2.0 * eps)

    a = analytic[coords]
    denom = max(np.linalg.norm(a), np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(a - numeric) / denom)
