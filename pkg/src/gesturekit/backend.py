"""Inference backend contract, label sets, and the synthetic oracle backend.

A backend is anything with an `info` property returning BackendInfo and
an `infer(clip) -> ProbabilityVector` method. The synthetic oracle
backend turns a scripted gesture timeline into deterministic probability
vectors, so every pipeline behavior (thresholds, fusion, early/late
decisions) can be exercised without a neural model. Remote neural
backends speak the wire protocol implemented in `remote`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError
from .stream import FRAME_SIZE, Clip

PROBABILITY_SUM_TOLERANCE = 1e-5

GESTURE = "gesture"
NO_GESTURE = "no_gesture"

# The 27 Jester classes in canonical (alphabetical) order.
JESTER_LABELS = (
    "Doing other things",
    "Drumming Fingers",
    "No gesture",
    "Pulling Hand In",
    "Pulling Two Fingers In",
    "Pushing Hand Away",
    "Pushing Two Fingers Away",
    "Rolling Hand Backward",
    "Rolling Hand Forward",
    "Shaking Hand",
    "Sliding Two Fingers Down",
    "Sliding Two Fingers Left",
    "Sliding Two Fingers Right",
    "Sliding Two Fingers Up",
    "Stop Sign",
    "Swiping Down",
    "Swiping Left",
    "Swiping Right",
    "Swiping Up",
    "Thumb Down",
    "Thumb Up",
    "Turning Hand Clockwise",
    "Turning Hand Counterclockwise",
    "Zooming In With Full Hand",
    "Zooming In With Two Fingers",
    "Zooming Out With Full Hand",
    "Zooming Out With Two Fingers",
)

# Classes a person can deliberately perform (used by scenario generation).
PERFORMABLE_LABELS = tuple(
    label for label in JESTER_LABELS if label not in ("Doing other things", "No gesture")
)


@dataclass(frozen=True)
class LabelSet:
    """An ordered, named list of class labels."""

    id: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("label set must not be empty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("label names must be unique")

    def __len__(self) -> int:
        return len(self.labels)

    @staticmethod
    def detector() -> "LabelSet":
        return LabelSet(id="detector", labels=(GESTURE, NO_GESTURE))

    @staticmethod
    def jester() -> "LabelSet":
        return LabelSet(id="jester", labels=JESTER_LABELS)


@dataclass
class ProbabilityVector:
    """Per-class scores from a backend; the currency between stages."""

    values: np.ndarray
    label_set_id: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("probability vector must be one-dimensional")
        if np.any(self.values < 0.0) or np.any(self.values > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        total = float(self.values.sum())
        if abs(total - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise ValueError(f"probabilities must sum to 1 within {PROBABILITY_SUM_TOLERANCE}, got {total}")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class BackendInfo:
    """Handshake metadata describing what a backend expects and produces."""

    num_classes: int
    clip_depth: int
    input_size: int
    label_set: LabelSet

    def __post_init__(self):
        if self.clip_depth not in (8, 16, 32):
            raise ValueError(f"clip depth must be 8, 16 or 32, got {self.clip_depth}")
        if self.input_size != FRAME_SIZE:
            raise ValueError(f"input size must be {FRAME_SIZE}, got {self.input_size}")
        if self.num_classes != len(self.label_set):
            raise ValueError("num_classes must match the label set size")


@dataclass(frozen=True)
class OracleSegment:
    """One scripted gesture span: frames [start_frame, end_frame] show class_index."""

    start_frame: int
    end_frame: int
    class_index: int
    peak_confidence: float

    def __post_init__(self):
        if self.start_frame > self.end_frame:
            raise ValueError("segment start must not exceed its end")
        if not 0.0 <= self.peak_confidence <= 1.0:
            raise ValueError("peak confidence must lie in [0, 1]")


@dataclass(frozen=True)
class OracleScript:
    """Deterministic timeline driving the synthetic oracle backend.

    The per-frame envelope ramps linearly over `envelope_ramp` frames at
    each segment edge and is flat in between, mimicking gestures being
    most recognizable in their middle phase. `noise_sigma` perturbs the
    resulting probabilities with Gaussian noise seeded by
    seed XOR clip_start, so identical clips always see identical noise.
    """

    segments: tuple[OracleSegment, ...]
    noise_sigma: float = 0.0
    seed: int = 0
    envelope_ramp: int = 0

    def __post_init__(self):
        if self.noise_sigma < 0.0:
            raise ValueError("noise sigma must be non-negative")
        if self.envelope_ramp < 0:
            raise ValueError("envelope ramp must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        previous_end = None
        for segment in self.segments:
            if previous_end is not None and segment.start_frame <= previous_end:
                raise ValueError("segments must be sorted and non-overlapping")
            previous_end = segment.end_frame


def envelope_weight(segment: OracleSegment, frame: int, ramp: int) -> float:
    """Per-frame envelope: 0 outside the segment, 1 in the plateau, linear at edges."""
    if frame < segment.start_frame or frame > segment.end_frame:
        return 0.0
    if ramp <= 0:
        return 1.0
    rise = (frame - segment.start_frame + 1) / (ramp + 1)
    fall = (segment.end_frame - frame + 1) / (ramp + 1)
    return min(1.0, rise, fall)


def oracle_probabilities(
    script: OracleScript, start_index: int, depth: int, num_classes: int
) -> np.ndarray:
    """Evaluate the oracle model for a clip at (start_index, depth).

    The dominant segment's weighted coverage `c` (mean per-frame envelope
    over the clip) scaled by its peak confidence becomes the excess mass
    q = c * peak on the scripted class; the remaining 1 - q is spread
    uniformly over all classes. Gaussian noise, when configured, is
    added afterwards, clamped to [0, 1] and renormalized.
    """
    end_index = start_index + depth - 1
    best_coverage = 0.0
    best_peak = 0.0
    best_class = 0
    for segment in script.segments:
        if segment.end_frame < start_index or segment.start_frame > end_index:
            continue
        lo = max(start_index, segment.start_frame)
        hi = min(end_index, segment.end_frame)
        if script.envelope_ramp <= 0:
            total = float(hi - lo + 1)
        else:
            total = sum(
                envelope_weight(segment, f, script.envelope_ramp) for f in range(lo, hi + 1)
            )
        coverage = total / depth
        if coverage > best_coverage:
            best_coverage = coverage
            best_peak = segment.peak_confidence
            best_class = segment.class_index
    q = best_coverage * best_peak
    probs = np.full(num_classes, (1.0 - q) / num_classes, dtype=np.float64)
    probs[best_class] += q
    if script.noise_sigma > 0.0:
        rng = np.random.default_rng(script.seed ^ start_index)
        probs = probs + rng.normal(0.0, script.noise_sigma, num_classes)
        probs = np.clip(probs, 0.0, 1.0)
        total = probs.sum()
        if total <= 0.0:
            probs = np.full(num_classes, 1.0 / num_classes, dtype=np.float64)
        else:
            probs = probs / total
    return probs


class OracleBackend:
    """Deterministic synthetic backend driven by an OracleScript."""

    def __init__(self, script: OracleScript, label_set: LabelSet, clip_depth: int):
        for segment in script.segments:
            if not 0 <= segment.class_index < len(label_set):
                raise ValueError(
                    f"segment class index {segment.class_index} outside label set of {len(label_set)}"
                )
            if segment.peak_confidence < 1.0 / len(label_set):
                raise ValueError("peak confidence must be at least the uniform share")
        self.script = script
        self._info = BackendInfo(
            num_classes=len(label_set),
            clip_depth=clip_depth,
            input_size=FRAME_SIZE,
            label_set=label_set,
        )

    @property
    def info(self) -> BackendInfo:
        return self._info

    def infer(self, clip: Clip) -> ProbabilityVector:
        _check_clip_shape(clip, self._info)
        values = oracle_probabilities(
            self.script, clip.start_index, clip.depth, self._info.num_classes
        )
        return ProbabilityVector(values=values, label_set_id=self._info.label_set.id)


class StubBackend:
    """Constant-output backend for throughput and latency benchmarks."""

    def __init__(self, label_set: LabelSet, clip_depth: int, latency_ms: float = 0.0):
        self.latency_ms = latency_ms
        self._values = np.full(len(label_set), 1.0 / len(label_set), dtype=np.float64)
        self._info = BackendInfo(
            num_classes=len(label_set),
            clip_depth=clip_depth,
            input_size=FRAME_SIZE,
            label_set=label_set,
        )

    @property
    def info(self) -> BackendInfo:
        return self._info

    def infer(self, clip: Clip) -> ProbabilityVector:
        _check_clip_shape(clip, self._info)
        if self.latency_ms > 0.0:
            time.sleep(self.latency_ms / 1000.0)
        return ProbabilityVector(values=self._values.copy(), label_set_id=self._info.label_set.id)


class DelayedBackend:
    """Wrap another backend, adding a fixed artificial latency per call."""

    def __init__(self, inner, latency_ms: float):
        self.inner = inner
        self.latency_ms = latency_ms

    @property
    def info(self) -> BackendInfo:
        return self.inner.info

    def infer(self, clip: Clip) -> ProbabilityVector:
        if self.latency_ms > 0.0:
            time.sleep(self.latency_ms / 1000.0)
        return self.inner.infer(clip)


def _check_clip_shape(clip: Clip, info: BackendInfo) -> None:
    if clip.depth != info.clip_depth:
        raise ShapeMismatchError(
            f"backend expects clip depth {info.clip_depth}, got {clip.depth}"
        )
    if clip.height != info.input_size or clip.width != info.input_size:
        raise ShapeMismatchError(
            f"backend expects {info.input_size}x{info.input_size} frames, "
            f"got {clip.height}x{clip.width}"
        )
