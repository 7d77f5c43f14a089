"""Fixed-dimension feature vectors from variable mode counts.

Each mode contributes (energy, log-energy, spectral entropy of its squared
samples); modes are ordered by ascending lower band edge and the vector is
padded with "silent mode" triples (0, log(eps), 0) up to 3*max_modes entries,
so downstream classifiers always see the same dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidSpec, TooManyModes
from .ewt import ModeSet

EPSILON = 1e-12


def mode_energy(mode: np.ndarray) -> float:
    """Mean squared sample: (1/W) sum mode[n]^2. Nonnegative."""
    m = np.asarray(mode, dtype=float)
    if m.size == 0:
        raise EmptyInput("mode has no samples")
    return float(np.mean(m * m))


def mode_log_energy(energy: float, epsilon: float = EPSILON) -> float:
    """log(energy + epsilon); epsilon floors the zero-energy case."""
    if energy < 0 or not math.isfinite(energy):
        raise InvalidSpec("energy must be finite and nonnegative")
    if epsilon <= 0:
        raise InvalidSpec("epsilon must be positive")
    return math.log(energy + epsilon)


def mode_entropy(mode: np.ndarray) -> float:
    """Shannon entropy (nats) of the normalized squared-sample distribution.

    p[n] = mode[n]^2 / sum mode^2; zero-probability samples contribute 0, and
    an all-zero mode reports 0 by convention. Bounded by log(W).
    """
    m = np.asarray(mode, dtype=float)
    if m.size == 0:
        raise EmptyInput("mode has no samples")
    power = m * m
    total = power.sum()
    if total == 0.0:
        return 0.0
    p = power / total
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(p[nz])))


def feature_vector(
    mode_set: ModeSet, max_modes: int = 5, epsilon: float = EPSILON
) -> np.ndarray:
    """(energy, log-energy, entropy) per mode, padded to 3*max_modes.

    Mode order follows ascending lower band edge (the decomposition's native
    order). Raises TooManyModes when the set exceeds max_modes.
    """
    k = mode_set.mode_count
    if k > max_modes:
        raise TooManyModes(f"{k} modes > max {max_modes}")
    values = np.empty(3 * max_modes)
    pad_log = mode_log_energy(0.0, epsilon)
    for r in range(max_modes):
        if r < k:
            e = mode_energy(mode_set.modes[r])
            values[3 * r : 3 * r + 3] = (
                e,
                mode_log_energy(e, epsilon),
                mode_entropy(mode_set.modes[r]),
            )
        else:
            values[3 * r : 3 * r + 3] = (0.0, pad_log, 0.0)
    return values


@dataclass(frozen=True)
class FeatureVector:
    """One window's features for one sensor, plus provenance and label."""

    subject_id: str
    modality: str
    window_index: int
    label: str
    values: np.ndarray


@dataclass
class Normalizer:
    """Per-column standardization fit on training rows only."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, matrix: np.ndarray) -> "Normalizer":
        x = np.asarray(matrix, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1:
            raise EmptyInput("need a nonempty 2-D matrix")
        std = x.std(axis=0)
        std[std == 0] = 1.0  # constant columns pass through centered
        return cls(mean=x.mean(axis=0), std=std)

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        x = np.asarray(matrix, dtype=float)
        if x.shape[-1] != self.mean.size:
            raise DimensionMismatch(
                f"got {x.shape[-1]} columns, normalizer has {self.mean.size}"
            )
        return (x - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Normalizer":
        return cls(np.asarray(data["mean"], float), np.asarray(data["std"], float))
