"""Detection post-processing: queue decisions and offline proposal handling.

Online, the last k detector outputs are kept in a small queue and fused
into a single gesture/no-gesture decision, either by averaging the
probabilities or by requiring a unanimous vote. Offline, per-frame
decisions become proposals (maximal gesture runs) which are then merged
across small gaps and amended before classification.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .backend import GESTURE, NO_GESTURE, ProbabilityVector

DETECTION_QUEUE_SIZE = 4
MERGE_GAP_THRESHOLD = 4


@dataclass(frozen=True)
class Proposal:
    """A frame interval [start_frame, end_frame] hypothesized to hold a gesture."""

    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.start_frame > self.end_frame:
            raise ValueError("proposal start must not exceed its end")

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame + 1


class DetectionQueue:
    """FIFO of the most recent detector probability vectors."""

    def __init__(self, capacity: int = DETECTION_QUEUE_SIZE):
        if capacity < 1:
            raise ValueError("queue capacity must be positive")
        self.capacity = capacity
        self._entries: deque[ProbabilityVector] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def full(self) -> bool:
        return len(self._entries) == self.capacity

    @property
    def entries(self) -> tuple[ProbabilityVector, ...]:
        return tuple(self._entries)

    def push(self, probs: ProbabilityVector) -> None:
        if len(probs) != 2:
            raise ValueError("detection queue holds two-class probability vectors")
        self._entries.append(probs)

    def clear(self) -> None:
        self._entries.clear()


def clip_label(probs: ProbabilityVector) -> str:
    """Per-clip argmax over (gesture, no_gesture); ties go to no_gesture."""
    gesture_p, no_gesture_p = probs.values
    return GESTURE if gesture_p > no_gesture_p else NO_GESTURE


def decide_mean(queue: DetectionQueue) -> str:
    """Average the queued probabilities and take the argmax class.

    Ties resolve to no_gesture to avoid spurious classifier activation.
    """
    if not queue.full:
        raise ValueError(f"decision requires a full queue of {queue.capacity} entries")
    mean = np.mean([entry.values for entry in queue.entries], axis=0)
    return GESTURE if mean[0] > mean[1] else NO_GESTURE


def decide_unanimous(labels: Sequence[str], expected: int = DETECTION_QUEUE_SIZE) -> bool:
    """True iff every one of the `expected` per-clip labels is gesture."""
    if len(labels) != expected:
        raise ValueError(f"expected {expected} labels, got {len(labels)}")
    return all(label == GESTURE for label in labels)


def propose_offline(decisions: Sequence[tuple[int, str]]) -> list[Proposal]:
    """Turn sorted per-frame decisions into maximal gesture-run proposals."""
    for (prev_frame, _), (frame, _) in zip(decisions, decisions[1:]):
        if frame != prev_frame + 1:
            raise ValueError("decisions must be sorted by frame index and contiguous")
    proposals = []
    run_start = None
    last_frame = None
    for frame, label in decisions:
        if label == GESTURE:
            if run_start is None:
                run_start = frame
            last_frame = frame
        elif run_start is not None:
            proposals.append(Proposal(run_start, last_frame))
            run_start = None
    if run_start is not None:
        proposals.append(Proposal(run_start, last_frame))
    return proposals


def merge_proposals(proposals: Sequence[Proposal], threshold: int = MERGE_GAP_THRESHOLD) -> list[Proposal]:
    """Merge consecutive proposals whose gap is below `threshold` frames.

    The gap between (a, b) and (c, d) is c - b - 1; merging yields
    (a, d). A single left-to-right pass reaches the fixpoint because
    merging never changes the distance to the following proposal. Every
    surviving gap is >= threshold.
    """
    for prev, cur in zip(proposals, proposals[1:]):
        if cur.start_frame <= prev.end_frame:
            raise ValueError("proposals must be sorted and non-overlapping")
    merged: list[Proposal] = []
    for proposal in proposals:
        if merged and proposal.start_frame - merged[-1].end_frame - 1 < threshold:
            merged[-1] = Proposal(merged[-1].start_frame, proposal.end_frame)
        else:
            merged.append(proposal)
    return merged


def amend_proposals(
    proposals: Iterable[Proposal],
    first_frame: int,
    last_frame: int,
    min_length: int,
) -> list[Proposal]:
    """Clamp proposals to the video bounds and drop ones too short to classify."""
    amended = []
    for proposal in proposals:
        start = max(proposal.start_frame, first_frame)
        end = min(proposal.end_frame, last_frame)
        if start > end:
            continue
        clamped = Proposal(start, end)
        if clamped.length >= min_length:
            amended.append(clamped)
    return amended
