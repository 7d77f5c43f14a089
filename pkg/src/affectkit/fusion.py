"""Uncertainty-weighted decision fusion and its feature-level counterpart.

Each team member contributes a class-probability vector P_i and its model's
validation F1_i. The member weight is w_i = (1 - H~(P_i))**F1_i, where H~ is
Shannon entropy normalized by log(n_classes) — confident members (low
entropy) weigh more, and a member's historical skill (F1) tempers how hard
its confidence counts. The fused distribution is the convex combination
sum(w_i P_i) / sum(w_i); when every weight underflows (all members maximally
uncertain with positive F1) the rule falls back to the unweighted mean and
flags it. Convention: 0**0 = 1, so a zero-F1 member always contributes
weight 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    EmptyTeam,
    InvalidDistribution,
    InvalidSpec,
    MissingModality,
    SizeOutOfRange,
)
from .mlp import SspOutput

#: Below this total weight the fused rule falls back to the unweighted mean.
WEIGHT_FLOOR = 1e-12


def _check_distribution(p: np.ndarray) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise InvalidDistribution("need a 1-D distribution over >= 2 classes")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistribution("distribution contains non-finite values")
    if arr.min() < -1e-12:
        raise InvalidDistribution(f"negative probability {arr.min():.3g}")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise InvalidDistribution(f"probabilities sum to {arr.sum():.12g}, not 1")
    return np.clip(arr, 0.0, 1.0)


def normalized_entropy(p) -> float:
    """Shannon entropy of p normalized to [0, 1] by log(len(p))."""
    arr = _check_distribution(p)
    nz = arr > 0
    h = float(-np.sum(arr[nz] * np.log(arr[nz]))) / np.log(arr.size)
    return min(max(h, 0.0), 1.0)


@dataclass(frozen=True)
class TeamDecision:
    """Fused distribution plus the audit trail of how it was formed."""

    members: tuple[str, ...]
    probs: np.ndarray
    weights: np.ndarray
    entropies: np.ndarray
    f1s: np.ndarray
    gamma: float
    fallback: bool

    @property
    def predicted_class(self) -> int:
        return int(np.argmax(self.probs))

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "probs": self.probs.tolist(),
            "weights": self.weights.tolist(),
            "entropies": self.entropies.tolist(),
            "f1s": self.f1s.tolist(),
            "gamma": self.gamma,
            "fallback": self.fallback,
            "predicted_class": self.predicted_class,
        }


def fuse(outputs: Mapping[str, SspOutput]) -> TeamDecision:
    """Combine member distributions with confidence-and-skill weights.

    w_i = max(0, 1 - H~(P_i))**F1_i (0**0 = 1); fused P = sum(w_i P_i) / gamma
    with gamma = sum(w_i). gamma < 1e-12 triggers the flagged unweighted-mean
    fallback. All member distributions must share one length; F1 must lie in
    [0, 1]. Raises EmptyTeam on an empty mapping.
    """
    if not outputs:
        raise EmptyTeam("fusion needs at least one member")
    members = tuple(outputs.keys())
    probs_rows = []
    entropies = []
    f1s = []
    for name in members:
        out = outputs[name]
        arr = _check_distribution(out.probs)
        if probs_rows and arr.size != probs_rows[0].size:
            raise InvalidDistribution("members disagree on class count")
        if not (0.0 <= out.f1 <= 1.0) or not np.isfinite(out.f1):
            raise InvalidSpec(f"F1 for {name} must lie in [0, 1], got {out.f1}")
        probs_rows.append(arr)
        entropies.append(normalized_entropy(arr))
        f1s.append(float(out.f1))
    p = np.vstack(probs_rows)
    h = np.array(entropies)
    f = np.array(f1s)
    confidence = np.maximum(1.0 - h, 0.0)
    # A maximally uncertain member has zero confidence by definition, but the
    # vectorized entropy of an exactly uniform distribution lands ~1e-16 shy
    # of 1, and confidence**f1 amplifies that residue (1e-16**0.3 ~ 1e-5).
    # Snap sub-floor residues to an exact zero so such members stay invisible.
    confidence[confidence < WEIGHT_FLOOR] = 0.0
    weights = confidence**f  # numpy: 0.0**0.0 == 1.0
    gamma = float(weights.sum())
    if gamma < WEIGHT_FLOOR:
        fused = p.mean(axis=0)
        fallback = True
    else:
        fused = weights @ p / gamma
        fallback = False
    fused = np.clip(fused, 0.0, None)
    fused = fused / fused.sum()
    return TeamDecision(
        members=members,
        probs=fused,
        weights=weights,
        entropies=h,
        f1s=f,
        gamma=gamma,
        fallback=fallback,
    )


def enumerate_teams(
    modalities: Sequence[str], size: int | None = None
) -> list[tuple[str, ...]]:
    """All sensor subsets of one size, or of every size 1..n when size=None.

    Deterministic: sizes ascend; within a size, combinations follow the given
    modality order (lexicographic in that order).
    """
    mods = tuple(modalities)
    if len(mods) < 1:
        raise InvalidSpec("need at least one modality")
    if len(set(mods)) != len(mods):
        raise InvalidSpec("modalities must be unique")
    if size is not None:
        if not 1 <= size <= len(mods):
            raise SizeOutOfRange(f"size {size} not in 1..{len(mods)}")
        return list(itertools.combinations(mods, size))
    teams: list[tuple[str, ...]] = []
    for k in range(1, len(mods) + 1):
        teams.extend(itertools.combinations(mods, k))
    return teams


def feature_level_fuse(
    vectors: Mapping[str, np.ndarray], order: Sequence[str]
) -> np.ndarray:
    """Concatenate per-sensor feature vectors in the given order.

    All vectors must describe the same (subject, window); the caller
    guarantees alignment. Raises MissingModality when ``order`` names a sensor
    absent from ``vectors``.
    """
    parts = []
    for name in order:
        if name not in vectors:
            raise MissingModality(f"no feature vector for {name}")
        parts.append(np.asarray(vectors[name], dtype=float))
    if not parts:
        raise EmptyTeam("feature fusion needs at least one sensor")
    return np.concatenate(parts)
