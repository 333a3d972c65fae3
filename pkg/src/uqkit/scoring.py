"""Max-softmax confidence extraction and classical scoring rules.

Cross entropy and the Brier score grade confidence values directly, so
they move when all confidences shift by a constant even though the
ranking (and hence the accept/reject behaviour at any swept threshold)
is unchanged. They are computed here so AUCCC can be reported alongside
them for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .records import OutcomeSet

LOG_CLAMP = 1e-7


@dataclass(frozen=True)
class ScoreReport:
    cross_entropy: float
    brier: float
    n: int


def max_softmax_confidence(probs: Sequence[float]) -> float:
    """Largest class probability, the standard single-model confidence score."""
    if len(probs) == 0:
        raise ValueError("empty probability vector")
    return float(max(probs))


def cross_entropy(outcomes: OutcomeSet) -> float:
    """Mean binary cross entropy of confidence against correctness.

    Confidences are clamped to [1e-7, 1 - 1e-7] before the logs so the
    value stays finite at 0 and 1.
    """
    s = np.clip(outcomes.confidence, LOG_CLAMP, 1.0 - LOG_CLAMP)
    c = outcomes.correct.astype(np.float64)
    return float(-np.mean(c * np.log(s) + (1.0 - c) * np.log(1.0 - s)))


def brier_score(outcomes: OutcomeSet) -> float:
    """Mean squared gap between confidence and the correctness indicator."""
    c = outcomes.correct.astype(np.float64)
    return float(np.mean((outcomes.confidence - c) ** 2))


def score_outcomes(outcomes: OutcomeSet) -> ScoreReport:
    return ScoreReport(
        cross_entropy=cross_entropy(outcomes),
        brier=brier_score(outcomes),
        n=len(outcomes),
    )
