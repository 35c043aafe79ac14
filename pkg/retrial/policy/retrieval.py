"""Nearest-neighbour chunk policy over demonstration states.

Every non-terminal demonstration step is indexed by its standardised,
weighted observation.  A query takes the ``n_neighbors`` closest entries,
picks one uniformly, and replays the demonstration's next ``chunk_length``
actions (padding with the final action), jittered with Gaussian noise.

Actions the demonstrator issued before holding the object are re-expressed
in the current object's frame (rigid transform from the neighbour's object
pose), so approach targets follow the object rather than the demo's copy of
it.  Carry actions stay absolute.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from retrial.config import get_settings
from retrial.core.errors import ConfigurationError, ValidationError
from retrial.core.types import ATTACHED, MAX_CHUNK, OBJ_THETA, OBJ_X, OBJ_Y, OBS_DIM, ActionChunk, as_observation
from retrial.demogen.expert import Dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolicyParams:
    n_neighbors: int = 16
    action_noise: float = 0.01
    chunk_length: int = 24
    execute_length: int = 16
    feature_weights: Optional[Tuple[float, ...]] = None
    retarget: bool = True

    def __post_init__(self) -> None:
        if self.n_neighbors < 1:
            raise ConfigurationError(f"n_neighbors must be >= 1, got {self.n_neighbors}")
        if not 1 <= self.chunk_length <= MAX_CHUNK:
            raise ConfigurationError(f"chunk_length must be in [1, {MAX_CHUNK}], got {self.chunk_length}")
        if not 1 <= self.execute_length <= self.chunk_length:
            raise ConfigurationError("execute_length must be in [1, chunk_length]")
        if self.action_noise < 0:
            raise ConfigurationError("action_noise must be >= 0")
        if self.feature_weights is not None:
            w = tuple(float(x) for x in self.feature_weights)
            if len(w) != OBS_DIM or any(x < 0 for x in w):
                raise ConfigurationError(f"feature_weights needs {OBS_DIM} non-negative entries")
            object.__setattr__(self, "feature_weights", w)

    @classmethod
    def from_settings(cls, **overrides) -> "PolicyParams":
        s = get_settings()
        base = dict(
            n_neighbors=s.policy_neighbors,
            action_noise=s.policy_noise,
            chunk_length=s.policy_chunk,
            execute_length=s.policy_execute,
        )
        base.update(overrides)
        return cls(**base)


class RetrievalPolicy:
    """Immutable after construction; safe for concurrent queries."""

    def __init__(self, dataset: Dataset, params: PolicyParams) -> None:
        self.dataset = dataset
        self.params = params
        w = np.ones(OBS_DIM) if params.feature_weights is None else np.asarray(params.feature_weights)
        self._scale = np.sqrt(w) / dataset.feature_std
        self._mean = dataset.feature_mean

        keys: List[Tuple[int, int]] = []
        for i, tr in enumerate(dataset.trajectories):
            keys.extend((i, t) for t in range(tr.T - 1))
        if not keys:
            raise ValidationError("dataset has no non-terminal steps to index")
        self.keys = np.asarray(keys, dtype=int)
        feats = np.stack([dataset.trajectories[i].observations[t] for i, t in keys])
        self.features = self.embed(feats)
        self.tree = cKDTree(self.features)

    @property
    def obs_dim(self) -> int:
        return OBS_DIM

    @property
    def size(self) -> int:
        return int(self.keys.shape[0])

    def embed(self, obs: np.ndarray) -> np.ndarray:
        return (np.asarray(obs, dtype=float) - self._mean) * self._scale

    def neighbors(self, obs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(distances, index rows) of the closest indexed states."""
        k = min(self.params.n_neighbors, self.size)
        dist, idx = self.tree.query(self.embed(obs), k=k)
        return np.atleast_1d(dist), np.atleast_1d(idx)

    def _replay(self, row: int, obs: np.ndarray) -> np.ndarray:
        i, t = self.keys[row]
        tr = self.dataset.trajectories[i]
        H = self.params.chunk_length
        acts = tr.actions[t:t + H]
        held = tr.observations[t:t + H, ATTACHED] >= 0.5
        if acts.shape[0] < H:
            pad = H - acts.shape[0]
            acts = np.vstack([acts, np.repeat(acts[-1:], pad, axis=0)])
            held = np.concatenate([held, np.repeat(held[-1:], pad)])
        acts = acts.copy()
        if self.params.retarget:
            src = tr.observations[t]
            _retarget(acts, ~held, src[[OBJ_X, OBJ_Y, OBJ_THETA]], obs[[OBJ_X, OBJ_Y, OBJ_THETA]])
        return acts


def _retarget(acts: np.ndarray, mask: np.ndarray, src_pose: np.ndarray, dst_pose: np.ndarray) -> None:
    """Map masked (x, y) rows from the source object frame to the destination one, in place."""
    if not mask.any() or np.array_equal(src_pose, dst_pose):
        return
    dtheta = math.remainder(float(dst_pose[2] - src_pose[2]), 2.0 * math.pi)
    c, s = math.cos(dtheta), math.sin(dtheta)
    rel = acts[mask, :2] - src_pose[:2]
    acts[mask, 0] = c * rel[:, 0] - s * rel[:, 1] + dst_pose[0]
    acts[mask, 1] = s * rel[:, 0] + c * rel[:, 1] + dst_pose[1]


def build_policy(dataset: Dataset, params: Optional[PolicyParams] = None) -> RetrievalPolicy:
    if dataset is None or dataset.count == 0:
        raise ValidationError("cannot build a policy from an empty dataset")
    policy = RetrievalPolicy(dataset, params or PolicyParams.from_settings())
    logger.info("Built retrieval policy over %d states from %d demos", policy.size, dataset.count)
    return policy


def sample_chunks(policy: RetrievalPolicy, obs: np.ndarray, n: int, rng: np.random.Generator) -> List[ActionChunk]:
    """``n`` independent chunks from one neighbour lookup."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    obs = as_observation(obs)
    _, idx = policy.neighbors(obs)
    sigma = policy.params.action_noise
    chunks = []
    for _ in range(n):
        row = int(idx[int(rng.integers(idx.size))])
        acts = policy._replay(row, obs)
        if sigma > 0:
            acts = acts + rng.normal(0.0, sigma, size=acts.shape)
        chunks.append(ActionChunk(np.clip(acts, 0.0, 1.0)))
    return chunks


def sample_chunk(policy: RetrievalPolicy, obs: np.ndarray, rng: np.random.Generator) -> ActionChunk:
    return sample_chunks(policy, obs, 1, rng)[0]
