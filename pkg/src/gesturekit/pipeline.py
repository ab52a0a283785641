"""The online recognition state machine and its offline counterpart.

The online pipeline cycles through three phases. In DETECTING, one new
detector inference runs per arriving frame (the queue keeps the last
four results, which at stride 1 correspond exactly to four overlapping
windows); a positive fused decision activates the classifier. In
CLASSIFYING, the configured window fusion runs each frame: a margin
reaching tau_early emits an early GestureEvent on the spot, while
rounds whose top score merely reaches tau_late are remembered as late
candidates. When the detector then reports the gesture over (a full
queue's worth of negative decisions), the best late candidate is
emitted as the recall fallback; with no candidate the activation was
spurious and the pipeline falls back to DETECTING. After an event,
COOLDOWN counts down before detection resumes.

After an emitted event the detector must report at least one negative
decision before a new activation is allowed. Without this re-arm gate a
gesture outliving cooldown + queue refill would be recognized again,
and the sequence metric counts every extra recognition against you.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .backend import GESTURE
from .classifier import EARLY, LATE, NONE, classify, fusion_weights
from .detector import (
    DetectionQueue,
    amend_proposals,
    clip_label,
    decide_mean,
    decide_unanimous,
    merge_proposals,
    propose_offline,
)
from .errors import SourceError, StreamGapError
from .stream import Frame, FrameBuffer, RawFrame, clip_from_frames, preprocess

MEAN = "mean"
UNANIMOUS = "unanimous"

PROPOSAL_LENGTH_SLACK = 8


def _load_toml(path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


@dataclass
class PipelineConfig:
    """Tunable pipeline parameters; defaults follow the reference setup."""

    detector_depth: int = 8
    detector_queue: int = 4
    detector_stride: int = 1
    detector_mode: str = UNANIMOUS
    classifier_depth: int = 16
    n_windows: int = 1
    tau_early: float = 0.6
    tau_late: float = 0.2
    cooldown_frames: int | None = None
    merge_threshold: int = 4
    fps_assumed: float = 30.0
    buffer_capacity: int = 40

    def __post_init__(self):
        if self.cooldown_frames is None:
            self.cooldown_frames = self.classifier_depth
        self.validate()

    def validate(self) -> None:
        counts = {
            "detector_depth": self.detector_depth,
            "detector_queue": self.detector_queue,
            "detector_stride": self.detector_stride,
            "classifier_depth": self.classifier_depth,
            "n_windows": self.n_windows,
            "cooldown_frames": self.cooldown_frames,
            "merge_threshold": self.merge_threshold,
            "buffer_capacity": self.buffer_capacity,
        }
        for name, value in counts.items():
            if value < 1:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.detector_mode not in (MEAN, UNANIMOUS):
            raise ValueError(f"detector_mode must be 'mean' or 'unanimous', got {self.detector_mode!r}")
        if self.classifier_depth not in (16, 32):
            raise ValueError(f"classifier_depth must be 16 or 32, got {self.classifier_depth}")
        if self.n_windows not in (1, 3, 5):
            raise ValueError(f"n_windows must be 1, 3 or 5, got {self.n_windows}")
        if not (0.0 < self.tau_late < self.tau_early < 1.0):
            raise ValueError(
                f"thresholds must satisfy 0 < tau_late < tau_early < 1, "
                f"got {self.tau_late}, {self.tau_early}"
            )
        if self.fps_assumed <= 0:
            raise ValueError("fps_assumed must be positive")
        needed = max(
            self.classifier_depth + (self.n_windows - 1),
            self.detector_depth + (self.detector_queue - 1) * self.detector_stride,
        )
        if self.buffer_capacity < needed:
            raise ValueError(
                f"buffer_capacity {self.buffer_capacity} is below the {needed} frames "
                "needed for the configured windows"
            )

    @classmethod
    def from_dict(cls, raw: Mapping) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_toml(cls, path) -> "PipelineConfig":
        return cls.from_dict(_load_toml(path))


class Phase(enum.Enum):
    DETECTING = "detecting"
    CLASSIFYING = "classifying"
    COOLDOWN = "cooldown"


@dataclass(frozen=True)
class GestureEvent:
    """One recognized gesture."""

    label: str
    trigger_frame: int
    detection_kind: str
    max1: float
    margin: float
    window_count: int

    def to_json_dict(self, video_id: str) -> dict:
        return {
            "video": video_id,
            "frame": self.trigger_frame,
            "label": self.label,
            "kind": self.detection_kind,
            "max1": self.max1,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class StageLatency:
    """Wall-clock statistics for one pipeline stage."""

    stage: str
    windows: int | None
    rounds: int
    mean_ms: float
    p95_ms: float
    max_ms: float


@dataclass
class RunSummary:
    """Outcome of driving the pipeline over a frame source."""

    events: list[GestureEvent]
    stage_latency: dict[str, StageLatency]
    frames_processed: int
    truncated: bool = False


class OnlinePipeline:
    """Stateful frame-by-frame driver of the detect/classify cycle."""

    def __init__(self, config: PipelineConfig, detector_backend, classifier_backend):
        config.validate()
        self.config = config
        self.detector_backend = detector_backend
        self.classifier_backend = classifier_backend
        self._weights = fusion_weights(config.n_windows)
        self._labels = classifier_backend.info.label_set.labels
        self._buffer = FrameBuffer(capacity=config.buffer_capacity)
        self._queue = DetectionQueue(capacity=config.detector_queue)
        self._phase = Phase.DETECTING
        self._cooldown_remaining = 0
        self._rearm_needed = False
        self._negative_streak = 0
        self._late_candidate = None
        self.events: list[GestureEvent] = []
        self.transitions: list[tuple[int, Phase]] = []
        self.detection_ms: list[float] = []
        self.classification_ms: list[float] = []

    @property
    def phase(self) -> Phase:
        return self._phase

    @property
    def cooldown_remaining(self) -> int:
        return self._cooldown_remaining

    @property
    def buffer(self) -> FrameBuffer:
        return self._buffer

    def reset(self) -> None:
        """Drop all buffered state and return to detection."""
        self._buffer.clear()
        self._queue.clear()
        self._phase = Phase.DETECTING
        self._cooldown_remaining = 0
        self._rearm_needed = False
        self._negative_streak = 0
        self._late_candidate = None

    def _transition(self, phase: Phase, frame_index: int) -> None:
        self._phase = phase
        self.transitions.append((frame_index, phase))

    def _decision(self) -> bool | None:
        """Fused detector decision, or None while the queue is filling."""
        if not self._queue.full:
            return None
        if self.config.detector_mode == MEAN:
            return decide_mean(self._queue) == GESTURE
        labels = [clip_label(entry) for entry in self._queue.entries]
        return decide_unanimous(labels, expected=self.config.detector_queue)

    def step(self, frame: Frame) -> list[GestureEvent]:
        """Feed one frame; returns the events it produced (usually none)."""
        try:
            self._buffer.push(frame)
        except StreamGapError:
            self.reset()
            self._buffer.push(frame)
        t = frame.index
        emitted: list[GestureEvent] = []

        if self._phase is Phase.COOLDOWN:
            self._cooldown_remaining -= 1
            if self._cooldown_remaining <= 0:
                self._cooldown_remaining = 0
                self._transition(Phase.DETECTING, t)
            return emitted

        decision = None
        if self._buffer.covers(t - self.config.detector_depth + 1, t):
            clip = self._buffer.extract_clip(t, self.config.detector_depth)
            started = time.perf_counter()
            probs = self.detector_backend.infer(clip)
            self.detection_ms.append((time.perf_counter() - started) * 1000.0)
            self._queue.push(probs)
            decision = self._decision()

        if self._phase is Phase.DETECTING:
            if decision is True and not self._rearm_needed:
                self._negative_streak = 0
                self._transition(Phase.CLASSIFYING, t)
            elif decision is False:
                self._rearm_needed = False

        if self._phase is Phase.CLASSIFYING:
            if decision is False:
                self._negative_streak += 1
            elif decision is True:
                self._negative_streak = 0
            outcome = None
            window_span = self.config.classifier_depth + self.config.n_windows - 1
            if self._buffer.covers(t - window_span + 1, t):
                started = time.perf_counter()
                windows = self._buffer.classifier_windows(
                    t, depth=self.config.classifier_depth, n=self.config.n_windows
                )
                window_probs = [self.classifier_backend.infer(w) for w in windows]
                outcome = classify(
                    window_probs,
                    self._weights,
                    self._labels,
                    tau_early=self.config.tau_early,
                    tau_late=self.config.tau_late,
                )
                self.classification_ms.append((time.perf_counter() - started) * 1000.0)
            if outcome is not None and outcome.kind == EARLY:
                self._emit(outcome, t, emitted)
            else:
                # A late-qualifying round only becomes an event once the
                # detector says the gesture is over; firing it on first
                # crossing would always beat the early threshold to the
                # punch, since max1 rises past tau_late long before the
                # margin can reach tau_early.
                if outcome is not None and outcome.kind == LATE:
                    if self._late_candidate is None or outcome.max1 > self._late_candidate.max1:
                        self._late_candidate = outcome
                if self._negative_streak >= self.config.detector_queue:
                    self._negative_streak = 0
                    if self._late_candidate is not None:
                        self._emit(self._late_candidate, t, emitted)
                    else:
                        self._transition(Phase.DETECTING, t)

        return emitted

    def _emit(self, outcome, t: int, emitted: list[GestureEvent]) -> None:
        event = GestureEvent(
            label=outcome.label,
            trigger_frame=t,
            detection_kind=outcome.kind,
            max1=outcome.max1,
            margin=outcome.margin,
            window_count=self.config.n_windows,
        )
        emitted.append(event)
        self.events.append(event)
        self._queue.clear()
        self._rearm_needed = True
        self._negative_streak = 0
        self._late_candidate = None
        self._cooldown_remaining = self.config.cooldown_frames
        self._transition(Phase.COOLDOWN, t)

    def summary(self, frames_processed: int, truncated: bool = False) -> RunSummary:
        stages = {}
        if self.detection_ms:
            stages["detection"] = _stage_stats("detection", None, self.detection_ms)
        if self.classification_ms:
            stages["classification"] = _stage_stats(
                "classification", self.config.n_windows, self.classification_ms
            )
        return RunSummary(
            events=list(self.events),
            stage_latency=stages,
            frames_processed=frames_processed,
            truncated=truncated,
        )


def _stage_stats(stage: str, windows: int | None, samples: Sequence[float]) -> StageLatency:
    arr = np.asarray(samples, dtype=np.float64)
    return StageLatency(
        stage=stage,
        windows=windows,
        rounds=len(samples),
        mean_ms=float(arr.mean()),
        p95_ms=float(np.percentile(arr, 95)),
        max_ms=float(arr.max()),
    )


def run(
    config: PipelineConfig,
    frames: Iterable[Frame | RawFrame],
    detector_backend,
    classifier_backend,
    event_sink: Callable[[GestureEvent], None] | None = None,
) -> RunSummary:
    """Drive the online pipeline over a frame source.

    Frames are preprocessed as needed and stepped in order; events are
    forwarded to `event_sink` as they occur. A SourceError mid-stream
    ends the run with the summary flagged as truncated.
    """
    pipeline = OnlinePipeline(config, detector_backend, classifier_backend)
    processed = 0
    truncated = False
    iterator = iter(frames)
    while True:
        try:
            item = next(iterator)
        except StopIteration:
            break
        except SourceError:
            truncated = True
            break
        frame = preprocess(item) if isinstance(item, RawFrame) else item
        for event in pipeline.step(frame):
            if event_sink is not None:
                event_sink(event)
        processed += 1
    return pipeline.summary(frames_processed=processed, truncated=truncated)


def run_offline(
    config: PipelineConfig,
    frames: Iterable[Frame | RawFrame],
    detector_backend,
    classifier_backend,
) -> list[GestureEvent]:
    """Proposal-based recognition over a fully available video.

    Per-frame detector decisions become proposals, proposals separated
    by less than the merge threshold are merged and amended, and each
    surviving proposal is classified once with windows centered on its
    midpoint. Videos shorter than the detector depth yield no events.
    """
    materialized = [
        preprocess(item) if isinstance(item, RawFrame) else item for item in frames
    ]
    if len(materialized) < config.detector_depth:
        return []
    first_index = materialized[0].index

    # Offline, the per-frame decision is the per-clip argmax label; the
    # decision queue is an online smoothing mechanism and would smear
    # any label gap out to at least its own length.
    decisions: list[tuple[int, str]] = []
    for offset in range(config.detector_depth - 1, len(materialized)):
        clip = clip_from_frames(materialized, offset, config.detector_depth)
        decisions.append(
            (materialized[offset].index, clip_label(detector_backend.infer(clip)))
        )

    proposals = propose_offline(decisions)
    merged = merge_proposals(proposals, threshold=config.merge_threshold)
    amended = amend_proposals(
        merged,
        first_frame=first_index,
        last_frame=materialized[-1].index,
        min_length=max(1, config.classifier_depth - PROPOSAL_LENGTH_SLACK),
    )

    weights = fusion_weights(config.n_windows)
    labels = classifier_backend.info.label_set.labels
    depth = config.classifier_depth
    n = config.n_windows
    events: list[GestureEvent] = []
    for proposal in amended:
        midpoint = (proposal.start_frame + proposal.end_frame) // 2
        newest_end = midpoint + depth // 2 + (n - 1 - n // 2)
        # Clamp so all n windows fit inside the available frames.
        newest_end = min(newest_end, materialized[-1].index)
        newest_end = max(newest_end, first_index + depth - 1 + (n - 1))
        if newest_end > materialized[-1].index:
            continue
        window_probs = []
        for i in range(n):
            end_offset = newest_end - (n - 1 - i) - first_index
            window_probs.append(
                classifier_backend.infer(clip_from_frames(materialized, end_offset, depth))
            )
        outcome = classify(
            window_probs, weights, labels, tau_early=config.tau_early, tau_late=config.tau_late
        )
        if outcome.kind != NONE:
            trigger = newest_end - (n - 1 - n // 2)
            events.append(
                GestureEvent(
                    label=outcome.label,
                    trigger_frame=trigger,
                    detection_kind=outcome.kind,
                    max1=outcome.max1,
                    margin=outcome.margin,
                    window_count=n,
                )
            )
    return events


def latency_report(summary: RunSummary) -> str:
    """Format per-stage round durations as a small table (seconds, 2 decimals)."""
    lines = [f"{'stage':<16}{'windows':>8}{'rounds':>8}{'mean (s)':>10}{'p95 (s)':>10}{'max (s)':>10}"]
    for stage_name in ("detection", "classification"):
        stats = summary.stage_latency.get(stage_name)
        if stats is None:
            lines.append(f"{stage_name:<16}{'-':>8}{'-':>8}  no rounds recorded")
            continue
        windows = "-" if stats.windows is None else str(stats.windows)
        lines.append(
            f"{stage_name:<16}{windows:>8}{stats.rounds:>8}"
            f"{stats.mean_ms / 1000.0:>10.2f}{stats.p95_ms / 1000.0:>10.2f}{stats.max_ms / 1000.0:>10.2f}"
        )
    return "\n".join(lines)
