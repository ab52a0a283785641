"""Levenshtein distance/accuracy and run-level evaluation reports.

A run's quality is judged on label sequences: the predicted gesture
labels per video (in trigger order) against the ground-truth sequence.
Levenshtein accuracy is (1 - distance / target_length) * 100; it is
deliberately not clamped, so a prediction stream full of spurious
recognitions shows up as a negative score instead of being hidden.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import UndefinedMetricError


@dataclass(frozen=True)
class LabelSequence:
    """Ordered gesture labels for one video."""

    video_id: str
    labels: tuple[str, ...]


def levenshtein_distance(a: Sequence, b: Sequence) -> int:
    """Minimum number of insertions, deletions or substitutions turning a into b."""
    n, m = len(a), len(b)
    if n > m:
        a, b, n, m = b, a, m, n
    current = list(range(n + 1))
    for i in range(1, m + 1):
        previous, current = current, [i] + [0] * n
        for j in range(1, n + 1):
            insert = previous[j] + 1
            delete = current[j - 1] + 1
            change = previous[j - 1] + (a[j - 1] != b[i - 1])
            current[j] = min(insert, delete, change)
    return current[n]


def levenshtein_accuracy(target: Sequence, prediction: Sequence) -> float:
    """(1 - LD(target, prediction) / len(target)) * 100; unclamped, may be negative."""
    if len(target) == 0:
        raise UndefinedMetricError("accuracy is undefined for an empty target sequence")
    distance = levenshtein_distance(target, prediction)
    return (1.0 - distance / len(target)) * 100.0


@dataclass(frozen=True)
class VideoScore:
    video_id: str
    target_length: int
    distance: int
    accuracy: float


@dataclass
class EvalReport:
    """Per-video and pooled accuracy over a set of evaluated videos.

    pooled_accuracy uses summed distances over summed target lengths;
    macro_accuracy is the unweighted mean of the per-video accuracies.
    Orphan video ids appeared in the predictions but not in the truth
    and are excluded from both aggregates.
    """

    per_video: list[VideoScore]
    pooled_accuracy: float
    macro_accuracy: float
    total_targets: int
    total_distance: int
    orphan_video_ids: list[str]

    def to_json_dict(self) -> dict:
        return {
            "per_video": [
                {
                    "video": score.video_id,
                    "targets": score.target_length,
                    "distance": score.distance,
                    "accuracy": score.accuracy,
                }
                for score in self.per_video
            ],
            "pooled_accuracy": self.pooled_accuracy,
            "macro_accuracy": self.macro_accuracy,
            "total_targets": self.total_targets,
            "total_distance": self.total_distance,
            "orphans": self.orphan_video_ids,
        }


def _labels_of(entries: Sequence) -> list[str]:
    labels = []
    for entry in entries:
        label = getattr(entry, "label", entry)
        labels.append(str(label))
    return labels


def evaluate(events_by_video: Mapping[str, Sequence], truth: Sequence[LabelSequence]) -> EvalReport:
    """Score predictions against ground truth, per video and pooled.

    `events_by_video` maps video id to GestureEvents (or bare labels) in
    trigger order. Videos with no predictions cost their full target
    length in deletions.
    """
    seen = set()
    for sequence in truth:
        if sequence.video_id in seen:
            raise ValueError(f"duplicate truth video id {sequence.video_id!r}")
        seen.add(sequence.video_id)

    per_video = []
    total_distance = 0
    total_targets = 0
    for sequence in truth:
        predicted = _labels_of(events_by_video.get(sequence.video_id, ()))
        distance = levenshtein_distance(sequence.labels, predicted)
        accuracy = levenshtein_accuracy(sequence.labels, predicted)
        per_video.append(
            VideoScore(sequence.video_id, len(sequence.labels), distance, accuracy)
        )
        total_distance += distance
        total_targets += len(sequence.labels)

    orphans = sorted(set(events_by_video) - seen)
    if total_targets == 0:
        raise UndefinedMetricError("no target gestures to evaluate")
    pooled = (1.0 - total_distance / total_targets) * 100.0
    macro = sum(score.accuracy for score in per_video) / len(per_video)
    return EvalReport(
        per_video=per_video,
        pooled_accuracy=pooled,
        macro_accuracy=macro,
        total_targets=total_targets,
        total_distance=total_distance,
        orphan_video_ids=orphans,
    )


def read_truth_csv(path: str | Path) -> list[LabelSequence]:
    """Parse a ground-truth file: one `video_id;label1,label2,...` row per video."""
    sequences = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if ";" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'video_id;label,label,...'")
        video_id, _, label_part = line.partition(";")
        labels = tuple(label.strip() for label in label_part.split(",") if label.strip())
        if not video_id.strip() or not labels:
            raise ValueError(f"{path}:{line_no}: empty video id or label list")
        sequences.append(LabelSequence(video_id.strip(), labels))
    return sequences


def write_truth_csv(sequences: Sequence[LabelSequence], path: str | Path) -> None:
    lines = [f"{seq.video_id};{','.join(seq.labels)}" for seq in sequences]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_events_jsonl(path: str | Path) -> dict[str, list[str]]:
    """Group event labels by video id from a JSON-lines event file."""
    events: dict[str, list[tuple[int, str]]] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            video = str(record["video"])
            frame = int(record["frame"])
            label = str(record["label"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{line_no}: invalid event line: {exc}") from exc
        events.setdefault(video, []).append((frame, label))
    return {
        video: [label for _, label in sorted(entries)] for video, entries in events.items()
    }


def format_report(report: EvalReport) -> str:
    """Human-readable per-video table plus the pooled and macro accuracies."""
    width = max([len("video")] + [len(score.video_id) for score in report.per_video])
    lines = [f"{'video':<{width}}  {'targets':>7}  {'distance':>8}  {'accuracy':>9}"]
    for score in report.per_video:
        lines.append(
            f"{score.video_id:<{width}}  {score.target_length:>7}  "
            f"{score.distance:>8}  {score.accuracy:>8.2f}%"
        )
    lines.append(
        f"{'pooled':<{width}}  {report.total_targets:>7}  "
        f"{report.total_distance:>8}  {report.pooled_accuracy:>8.2f}%"
    )
    lines.append(f"{'macro mean':<{width}}  {'':>7}  {'':>8}  {report.macro_accuracy:>8.2f}%")
    if report.orphan_video_ids:
        lines.append(f"orphan predictions (not in truth, excluded): {', '.join(report.orphan_video_ids)}")
    return "\n".join(lines)
