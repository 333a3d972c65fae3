"""Ensemble probability averaging and temperature softening.

Averaging the probability outputs of independently trained models gives
better-calibrated confidence than any single member; dividing the log
probabilities by a temperature T before re-normalizing then softens the
remaining over-confidence. T = 1 is the identity, T > 1 flattens toward
uniform, T < 1 sharpens. The softened probability of the true class is
the training target for confidence distillation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .records import PROB_SUM_TOLERANCE

LOG_FLOOR = 1e-12


def _validate_distribution(p: np.ndarray, what: str = "probability vector") -> None:
    if p.ndim != 1 or len(p) == 0:
        raise ValueError(f"{what} must be a non-empty 1-D vector")
    if np.any(~np.isfinite(p)) or np.any((p < 0.0) | (p > 1.0)):
        raise ValueError(f"{what} has entries outside [0, 1]")
    total = float(np.sum(p))
    if abs(total - 1.0) > PROB_SUM_TOLERANCE:
        raise ValueError(f"{what} sums to {total:g}, not 1 within tolerance")


def average_probs(members: Sequence[Sequence[float]]) -> np.ndarray:
    """Element-wise arithmetic mean of the member probability vectors."""
    if len(members) == 0:
        raise ValueError("no ensemble members given")
    arrays = [np.asarray(m, dtype=np.float64) for m in members]
    length = len(arrays[0])
    for i, arr in enumerate(arrays):
        if len(arr) != length:
            raise ValueError(f"member {i} has length {len(arr)}, expected {length}")
        _validate_distribution(arr, what=f"member {i}")
    return np.mean(arrays, axis=0)


def temperature_scale(p: Sequence[float], temperature: float) -> np.ndarray:
    """Soften a distribution: softmax of its log probabilities divided by T.

    Entries are floored at 1e-12 and re-normalized before the log so exact
    zeros (e.g. from one-hot ensemble members) stay finite. The ordering
    of entries is preserved for every T > 0.
    """
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    arr = np.asarray(p, dtype=np.float64)
    _validate_distribution(arr)
    floored = np.maximum(arr, LOG_FLOOR)
    floored = floored / np.sum(floored)
    z = np.log(floored) / temperature
    z = z - np.max(z)
    e = np.exp(z)
    return e / np.sum(e)


def actual_class_confidence(softened: Sequence[float], true_label: int) -> float:
    """The softened probability assigned to the actual class."""
    arr = np.asarray(softened, dtype=np.float64)
    if not (0 <= true_label < len(arr)):
        raise ValueError(f"true label {true_label} out of range for {len(arr)} classes")
    return float(arr[true_label])


@dataclass(frozen=True)
class EnsembleOutput:
    """Member distributions together with their mean and softened mean."""

    members: np.ndarray  # (M, K)
    mean: np.ndarray  # (K,)
    softened: np.ndarray  # (K,)
    temperature: float


def soften_ensemble(members: Sequence[Sequence[float]], temperature: float) -> EnsembleOutput:
    """Average the members and temperature-scale the result."""
    stacked = np.asarray([np.asarray(m, dtype=np.float64) for m in members])
    if stacked.ndim != 2 or stacked.shape[1] < 2:
        raise ValueError("ensemble members must be vectors over at least two classes")
    mean = average_probs(members)
    softened = temperature_scale(mean, temperature)
    return EnsembleOutput(members=stacked, mean=mean, softened=softened, temperature=temperature)
