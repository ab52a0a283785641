"""Synthetic scenarios: scripted gesture timelines with matching oracles.

A scenario stands in for a recorded evaluation video: it fixes where
gestures happen and what they are, provides the oracle scripts that
make backends behave accordingly, and doubles as ground truth. The
default shape mirrors the reference protocol: 20-second videos at
30 fps containing 4 gestures of roughly 36 frames each.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .backend import (
    PERFORMABLE_LABELS,
    LabelSet,
    OracleBackend,
    OracleScript,
    OracleSegment,
)
from .errors import InfeasibleScenarioError
from .evaluation import LabelSequence
from .stream import FRAME_CHANNELS, FRAME_SIZE, Frame

DEFAULT_DURATION_FRAMES = 600
DEFAULT_FPS = 30.0
DEFAULT_SPAN_RANGE = (30, 42)
DEFAULT_MIN_GAP = 20
DEFAULT_LEAD = 24
DEFAULT_TRAIL = 20
DEFAULT_DETECTOR_PEAK = 1.0
DEFAULT_CLASSIFIER_PEAK = 0.95
DEFAULT_CLASSIFIER_RAMP = 4


@dataclass(frozen=True)
class ScriptedGesture:
    start_frame: int
    end_frame: int
    label: str


@dataclass
class Scenario:
    """A scripted stream: gesture spans plus the oracle scripts they imply."""

    video_id: str
    duration_frames: int
    fps: float
    gestures: tuple[ScriptedGesture, ...]
    detector_script: OracleScript
    classifier_script: OracleScript
    seed: int

    def __post_init__(self):
        previous_end = None
        for gesture in self.gestures:
            if gesture.start_frame > gesture.end_frame:
                raise ValueError("gesture span start must not exceed its end")
            if previous_end is not None and gesture.start_frame <= previous_end:
                raise ValueError("gesture spans must be sorted and non-overlapping")
            previous_end = gesture.end_frame
        spans = [(g.start_frame, g.end_frame) for g in self.gestures]
        detector_spans = [
            (s.start_frame, s.end_frame) for s in self.detector_script.segments
        ]
        if spans != detector_spans:
            raise ValueError("detector script segments must coincide with gesture spans")


def generate(
    gesture_count: int,
    duration_frames: int = DEFAULT_DURATION_FRAMES,
    fps: float = DEFAULT_FPS,
    noise_sigma: float = 0.0,
    seed: int = 0,
    min_gap: int = DEFAULT_MIN_GAP,
    span_range: tuple[int, int] = DEFAULT_SPAN_RANGE,
    video_id: str | None = None,
) -> Scenario:
    """Place `gesture_count` random gesture spans into a stream, seeded.

    Spans average ~36 frames at the default range, separated by at
    least `min_gap` frames (cooldown plus detector queue refill), with
    leading room for detector warm-up. Raises InfeasibleScenarioError
    when the gestures cannot fit.
    """
    if gesture_count < 0:
        raise ValueError("gesture count must be non-negative")
    rng = np.random.default_rng(seed)
    spans = [int(rng.integers(span_range[0], span_range[1] + 1)) for _ in range(gesture_count)]
    fixed = DEFAULT_LEAD + DEFAULT_TRAIL + sum(spans) + max(0, gesture_count - 1) * min_gap
    slack = duration_frames - fixed
    if gesture_count > 0 and slack < 0:
        raise InfeasibleScenarioError(
            f"{gesture_count} gestures need at least {fixed} frames, "
            f"scenario has {duration_frames}"
        )

    gestures = []
    if gesture_count > 0:
        offsets = np.sort(rng.integers(0, slack + 1, size=gesture_count))
        cursor = DEFAULT_LEAD
        previous_offset = 0
        for i, span in enumerate(spans):
            cursor += int(offsets[i]) - previous_offset
            previous_offset = int(offsets[i])
            label = str(rng.choice(PERFORMABLE_LABELS))
            gestures.append(ScriptedGesture(cursor, cursor + span - 1, label))
            cursor += span + min_gap

    jester = LabelSet.jester()
    detector_segments = tuple(
        OracleSegment(g.start_frame, g.end_frame, 0, DEFAULT_DETECTOR_PEAK) for g in gestures
    )
    classifier_segments = tuple(
        OracleSegment(
            g.start_frame,
            g.end_frame,
            jester.labels.index(g.label),
            DEFAULT_CLASSIFIER_PEAK,
        )
        for g in gestures
    )
    detector_seed = int(rng.integers(0, 2**31))
    classifier_seed = int(rng.integers(0, 2**31))
    return Scenario(
        video_id=video_id or f"scenario-{seed:04d}",
        duration_frames=duration_frames,
        fps=fps,
        gestures=tuple(gestures),
        detector_script=OracleScript(
            segments=detector_segments,
            noise_sigma=noise_sigma,
            seed=detector_seed,
            envelope_ramp=0,
        ),
        classifier_script=OracleScript(
            segments=classifier_segments,
            noise_sigma=noise_sigma,
            seed=classifier_seed,
            envelope_ramp=DEFAULT_CLASSIFIER_RAMP,
        ),
        seed=seed,
    )


def ground_truth(scenario: Scenario) -> LabelSequence:
    """The scripted gesture labels in temporal order."""
    return LabelSequence(
        video_id=scenario.video_id,
        labels=tuple(g.label for g in scenario.gestures),
    )


def frame_source(scenario: Scenario) -> Iterator[Frame]:
    """Synthetic frames for the scenario; pixels are a shared constant buffer."""
    pixels = np.zeros((FRAME_SIZE, FRAME_SIZE, FRAME_CHANNELS), dtype=np.uint8)
    for index in range(scenario.duration_frames):
        yield Frame(index=index, timestamp_ms=index * 1000.0 / scenario.fps, pixels=pixels)


def oracle_backends(
    scenario: Scenario, detector_depth: int = 8, classifier_depth: int = 16
) -> tuple[OracleBackend, OracleBackend]:
    """Detector and classifier oracle backends bound to the scenario scripts."""
    detector = OracleBackend(
        scenario.detector_script, LabelSet.detector(), clip_depth=detector_depth
    )
    classifier = OracleBackend(
        scenario.classifier_script, LabelSet.jester(), clip_depth=classifier_depth
    )
    return detector, classifier


def _script_to_dict(script: OracleScript) -> dict:
    return {
        "noise_sigma": script.noise_sigma,
        "seed": script.seed,
        "envelope_ramp": script.envelope_ramp,
        "segments": [
            [s.start_frame, s.end_frame, s.class_index, s.peak_confidence]
            for s in script.segments
        ],
    }


def _script_from_dict(raw: dict) -> OracleScript:
    return OracleScript(
        segments=tuple(
            OracleSegment(int(s[0]), int(s[1]), int(s[2]), float(s[3]))
            for s in raw["segments"]
        ),
        noise_sigma=float(raw["noise_sigma"]),
        seed=int(raw["seed"]),
        envelope_ramp=int(raw["envelope_ramp"]),
    )


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r} to TOML")


def save_toml(scenario: Scenario, path: str | Path) -> None:
    """Write the scenario as TOML (readable back with load_toml)."""
    lines = [
        f"video_id = {_toml_value(scenario.video_id)}",
        f"duration_frames = {scenario.duration_frames}",
        f"fps = {_toml_value(scenario.fps)}",
        f"seed = {scenario.seed}",
        "",
    ]
    for gesture in scenario.gestures:
        lines += [
            "[[gestures]]",
            f"start = {gesture.start_frame}",
            f"end = {gesture.end_frame}",
            f"label = {_toml_value(gesture.label)}",
            "",
        ]
    for name, script in (
        ("detector_script", scenario.detector_script),
        ("classifier_script", scenario.classifier_script),
    ):
        data = _script_to_dict(script)
        lines += [
            f"[{name}]",
            f"noise_sigma = {_toml_value(data['noise_sigma'])}",
            f"seed = {data['seed']}",
            f"envelope_ramp = {data['envelope_ramp']}",
            f"segments = {_toml_value(data['segments'])}",
            "",
        ]
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def load_toml(path: str | Path) -> Scenario:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    gestures = tuple(
        ScriptedGesture(int(g["start"]), int(g["end"]), str(g["label"]))
        for g in raw.get("gestures", [])
    )
    return Scenario(
        video_id=str(raw["video_id"]),
        duration_frames=int(raw["duration_frames"]),
        fps=float(raw["fps"]),
        gestures=gestures,
        detector_script=_script_from_dict(raw["detector_script"]),
        classifier_script=_script_from_dict(raw["classifier_script"]),
        seed=int(raw["seed"]),
    )
