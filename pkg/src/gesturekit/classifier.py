"""Weighted multi-window fusion and the early/late classification decision.

Window weights are center-peaked: gestures consist of preparation,
nucleus and retraction phases, and the nucleus in the middle is the
most discriminative part, so the middle window earns the largest
weight. The fused probabilities feed a two-threshold decision: a large
top-2 margin triggers an early (zero/negative lag) detection, a
sufficiently large top probability triggers a late detection as the
recall fallback, and anything else yields no decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backend import ProbabilityVector
from .errors import ShapeMismatchError

TAU_EARLY = 0.6
TAU_LATE = 0.2

EARLY = "early"
LATE = "late"
NONE = "none"

THREE_WINDOW_WEIGHTS = (0.3, 0.4, 0.3)


def cosine_weight(x: int) -> float:
    """Five-window weight curve: 0.11 * cos(pi/4 * x - pi/2) + 0.15 for x in 0..4."""
    if x not in (0, 1, 2, 3, 4):
        raise ValueError(f"window identifier must be in 0..4, got {x}")
    return 0.11 * math.cos(math.pi / 4.0 * x - math.pi / 2.0) + 0.15


@dataclass(frozen=True)
class FusionWeights:
    """Symmetric, center-peaked weights for 1, 3 or 5 windows.

    The five-window weights follow the cosine curve and are used as-is
    (sum 1.0155635, not renormalized) so the decision thresholds keep
    their meaning on the weighted sum.
    """

    n_windows: int
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != self.n_windows:
            raise ValueError("weight count must match the window count")


def fusion_weights(n_windows: int) -> FusionWeights:
    """Weights for a given window count: [1.0], [0.3, 0.4, 0.3], or the cosine five."""
    if n_windows == 1:
        return FusionWeights(1, (1.0,))
    if n_windows == 3:
        return FusionWeights(3, THREE_WINDOW_WEIGHTS)
    if n_windows == 5:
        return FusionWeights(5, tuple(cosine_weight(x) for x in range(5)))
    raise ValueError(f"window count must be 1, 3 or 5, got {n_windows}")


@dataclass(frozen=True)
class ClassificationOutcome:
    """Result of one fused classification round.

    kind is "early", "late" or "none"; label is None for "none".
    max1/max2 are the two largest fused scores, margin their difference.
    """

    kind: str
    label: str | None
    max1: float
    max2: float
    margin: float


def classify(
    window_probs: Sequence[ProbabilityVector],
    weights: FusionWeights,
    labels: Sequence[str],
    tau_early: float = TAU_EARLY,
    tau_late: float = TAU_LATE,
) -> ClassificationOutcome:
    """Fuse per-window probabilities and apply the two-threshold decision.

    weighted = sum_i weights[i] * probs[i]; with (max1, max2) the two
    largest entries, the outcome is early when max1 - max2 >= tau_early,
    else late when max1 >= tau_late, else none. Argmax ties break to the
    lowest class index (a tie then forces margin 0, so the outcome can
    only be late or none).
    """
    if len(window_probs) != weights.n_windows:
        raise ShapeMismatchError(
            f"expected {weights.n_windows} probability vectors, got {len(window_probs)}"
        )
    num_classes = len(window_probs[0])
    if len(labels) != num_classes:
        raise ShapeMismatchError(
            f"label list of {len(labels)} does not match {num_classes} classes"
        )
    weighted = np.zeros(num_classes, dtype=np.float64)
    for weight, probs in zip(weights.weights, window_probs):
        if len(probs) != num_classes:
            raise ShapeMismatchError("all windows must share one label set")
        weighted += weight * probs.values
    top = int(np.argmax(weighted))
    max1 = float(weighted[top])
    rest = np.delete(weighted, top)
    max2 = float(rest.max()) if rest.size else 0.0
    margin = max1 - max2
    if margin >= tau_early:
        return ClassificationOutcome(EARLY, labels[top], max1, max2, margin)
    if max1 >= tau_late:
        return ClassificationOutcome(LATE, labels[top], max1, max2, margin)
    return ClassificationOutcome(NONE, None, max1, max2, margin)
