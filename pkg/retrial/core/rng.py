"""Deterministic randomness.

There is no global RNG.  Each consumer derives its own ``numpy`` generator
from a ``SeedStream`` plus a purpose tag, so identical (seed, stream,
purpose) always reproduces the same draws and different purposes never
share a sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from retrial.core.errors import ValidationError

_SEED_LIMIT = 2 ** 64


class Purpose(IntEnum):
    SCENARIO = 0
    DYNAMICS = 1
    POLICY = 2
    EXPERT = 3
    TRAIN = 4
    BOOTSTRAP = 5


@dataclass(frozen=True)
class SeedStream:
    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < _SEED_LIMIT:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.stream) < 0:
            raise ValidationError(f"stream id must be >= 0, got {self.stream}")

    def sequence(self, purpose: int = 0, *extra: int) -> np.random.SeedSequence:
        key = (int(self.stream), int(purpose), *(int(e) for e in extra))
        return np.random.SeedSequence(entropy=int(self.seed), spawn_key=key)

    def generator(self, purpose: int = 0, *extra: int) -> np.random.Generator:
        """Fresh generator for ``purpose``; ``extra`` keys sub-streams (e.g. step counters)."""
        return np.random.default_rng(self.sequence(purpose, *extra))


def as_generator(rng: "SeedStream | np.random.Generator", purpose: int = 0) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator(purpose)
