"""Categorical progress distributions and the arithmetic the monitor needs.

A ``CategoricalValueDist`` holds 50 bins of 2% task progress each; bin ``i``
stands for its centre ``0.02 * i + 0.01``.  A ``SignedBinDist`` is the
distribution of a difference of two such values in integer bin units
(support -49 .. +49); conversion back to progress fractions happens only in
``upper_bound``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from retrial.core.errors import ValidationError

N_BINS = 50
BIN_WIDTH = 0.02
N_DELTA = 2 * N_BINS - 1
DELTA_ZERO = N_BINS - 1          # index of offset 0 in SignedBinDist.q
MASS_TOL = 1e-9

BIN_CENTERS = BIN_WIDTH * np.arange(N_BINS) + BIN_WIDTH / 2
DELTA_SUPPORT = np.arange(-(N_BINS - 1), N_BINS, dtype=float)


def _check_masses(arr: np.ndarray, n: int, kind: str) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    if arr.shape != (n,):
        raise ValidationError(f"{kind} needs {n} masses, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{kind} contains non-finite masses")
    if arr.min() < 0.0:
        raise ValidationError(f"{kind} contains negative mass {arr.min()}")
    total = float(arr.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise ValidationError(f"{kind} masses sum to {total!r}, expected 1")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CategoricalValueDist:
    p: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _check_masses(self.p, N_BINS, "CategoricalValueDist"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CategoricalValueDist):
            return NotImplemented
        return np.array_equal(self.p, other.p)

    @classmethod
    def point(cls, b: int) -> "CategoricalValueDist":
        p = np.zeros(N_BINS)
        p[b] = 1.0
        return cls(p)

    @classmethod
    def from_masses(cls, masses: Mapping[int, float]) -> "CategoricalValueDist":
        p = np.zeros(N_BINS)
        for b, m in masses.items():
            p[b] = m
        return cls(p)


@dataclass(frozen=True, eq=False)
class SignedBinDist:
    q: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", _check_masses(self.q, N_DELTA, "SignedBinDist"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignedBinDist):
            return NotImplemented
        return np.array_equal(self.q, other.q)

    def mass(self, offset: int) -> float:
        return float(self.q[offset + DELTA_ZERO])

    @classmethod
    def from_masses(cls, masses: Mapping[int, float]) -> "SignedBinDist":
        q = np.zeros(N_DELTA)
        for off, m in masses.items():
            q[off + DELTA_ZERO] = m
        return cls(q)


DistLike = Union[CategoricalValueDist, np.ndarray]
DeltaLike = Union[SignedBinDist, np.ndarray]


def _categorical(d: DistLike) -> np.ndarray:
    if isinstance(d, CategoricalValueDist):
        return d.p
    return CategoricalValueDist(d).p


def _signed(d: DeltaLike) -> np.ndarray:
    if isinstance(d, SignedBinDist):
        return d.q
    return SignedBinDist(d).q


def dist_mean(d: DistLike) -> float:
    """Expected progress fraction using bin centres."""
    return float(np.dot(_categorical(d), BIN_CENTERS))


def delta_mean(d: DeltaLike) -> float:
    """Mean of a difference distribution, in bin units."""
    return float(np.dot(_signed(d), DELTA_SUPPORT))


def dist_std(d: DeltaLike) -> float:
    """Population standard deviation over the integer support, in bin units."""
    q = _signed(d)
    mu = float(np.dot(q, DELTA_SUPPORT))
    var = float(np.dot(q, (DELTA_SUPPORT - mu) ** 2))
    return float(np.sqrt(max(var, 0.0)))


def dist_delta(now: DistLike, past: DistLike) -> SignedBinDist:
    """Distribution of ``now - past`` for independent bins: q[a - b] = sum now[a] * past[b]."""
    a = _categorical(now)
    b = _categorical(past)
    q = np.convolve(a, b[::-1])
    return SignedBinDist(q)


def upper_bound(d: DeltaLike, z: float = 2.0) -> float:
    """``(mean + z * std) * 0.02``: optimistic progress in fraction units."""
    if not np.isfinite(z) or z < 0:
        raise ValidationError(f"z must be >= 0, got {z}")
    return (delta_mean(d) + z * dist_std(d)) * BIN_WIDTH
