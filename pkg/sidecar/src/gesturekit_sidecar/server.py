"""Wire-protocol server: checkpoints in, softmax probabilities out.

Speaks the newline-delimited JSON protocol over stdio or TCP, one
connection at a time, answering requests in arrival order:

    -> {"op": "hello"}
    <- {"op": "hello", "num_classes": N, "clip_depth": D,
        "input_size": 112, "labels": [...]}
    -> {"op": "infer", "id": K, "shape": [3, D, 112, 112], "data_b64": ...}
    <- {"op": "infer", "id": K, "probs": [...]}

Bad requests get {"op": "error", "id": K, "message": ...} and the
connection stays open.
"""

from __future__ import annotations

import base64
import json
import socket
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .models import PUBLISHED_PARAM_COUNTS, build_model, parameter_count_matches

INPUT_SIZE = 112

DETECTOR_LABELS = ["gesture", "no_gesture"]

JESTER_LABELS = [
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
]

DEFAULT_MEAN = (0.5, 0.5, 0.5)
DEFAULT_STD = (0.5, 0.5, 0.5)


class CheckpointMismatchError(RuntimeError):
    """Constructed/loaded model disagrees with the published figures."""


@dataclass
class ModelSpec:
    """What to serve: architecture, depth, classes, weights, normalization."""

    architecture: str
    clip_depth: int
    num_classes: int
    checkpoint_path: str | None = None
    mean: tuple[float, float, float] = DEFAULT_MEAN
    std: tuple[float, float, float] = DEFAULT_STD

    def labels(self) -> list[str]:
        if self.num_classes == 2:
            return list(DETECTOR_LABELS)
        if self.num_classes == 27:
            return list(JESTER_LABELS)
        return [f"class_{i}" for i in range(self.num_classes)]


def load_normalization(spec: ModelSpec) -> ModelSpec:
    """Pick up per-checkpoint normalization metadata when present.

    A `<checkpoint>.norm.json` file with {"mean": [...], "std": [...]}
    overrides the defaults; the training-time constants are otherwise
    unknown and ship with the checkpoint.
    """
    if spec.checkpoint_path is None:
        return spec
    meta_path = Path(str(spec.checkpoint_path) + ".norm.json")
    if not meta_path.exists():
        return spec
    meta = json.loads(meta_path.read_text())
    spec.mean = tuple(float(v) for v in meta["mean"])
    spec.std = tuple(float(v) for v in meta["std"])
    return spec


class InferenceSession:
    """A loaded, verified model plus the request handling around it."""

    def __init__(self, spec: ModelSpec, allow_param_mismatch: bool = False):
        self.spec = load_normalization(spec)
        self.model = build_model(spec.architecture, spec.clip_depth, spec.num_classes)
        if spec.checkpoint_path is not None:
            state = torch.load(spec.checkpoint_path, map_location="cpu", weights_only=True)
            self.model.load_state_dict(state)
        ok, actual, published = parameter_count_matches(
            spec.architecture, spec.clip_depth, self.model
        )
        self.param_count = actual
        self.published_count = published
        if not ok and not allow_param_mismatch:
            raise CheckpointMismatchError(
                f"{spec.architecture} has {actual} parameters, published figure is "
                f"{published:.0f} (diff {(actual - published) / published * 100.0:+.1f}%); "
                "pass --allow-param-mismatch to serve anyway"
            )
        self.model.eval()
        mean = torch.tensor(self.spec.mean, dtype=torch.float32).view(1, 3, 1, 1, 1)
        std = torch.tensor(self.spec.std, dtype=torch.float32).view(1, 3, 1, 1, 1)
        self._mean = mean
        self._std = std

    def hello(self) -> dict:
        return {
            "op": "hello",
            "num_classes": self.spec.num_classes,
            "clip_depth": self.spec.clip_depth,
            "input_size": INPUT_SIZE,
            "labels": self.spec.labels(),
        }

    def infer(self, request: dict) -> dict:
        request_id = request.get("id")
        try:
            raw = base64.b64decode(request["data_b64"], validate=True)
        except (KeyError, TypeError, ValueError) as exc:
            return {"op": "error", "id": request_id, "message": f"bad clip payload: {exc}"}
        expected = self.spec.clip_depth * INPUT_SIZE * INPUT_SIZE * 3
        if len(raw) != expected:
            return {
                "op": "error",
                "id": request_id,
                "message": f"clip payload is {len(raw)} bytes, expected {expected}",
            }
        frames = np.frombuffer(raw, dtype=np.uint8).reshape(
            self.spec.clip_depth, INPUT_SIZE, INPUT_SIZE, 3
        )
        probs = self.forward(frames)
        return {"op": "infer", "id": request_id, "probs": [float(p) for p in probs]}

    def forward(self, frames: np.ndarray) -> np.ndarray:
        """Normalize a (d, h, w, 3) uint8 clip and run the model."""
        clip = torch.from_numpy(frames.astype(np.float32) / 255.0)
        clip = clip.permute(3, 0, 1, 2).unsqueeze(0)  # -> (1, 3, d, h, w)
        clip = (clip - self._mean) / self._std
        with torch.no_grad():
            logits = self.model(clip)
            probs = torch.softmax(logits[0], dim=0)
        return probs.numpy()

    def handle_line(self, line: bytes) -> dict:
        try:
            request = json.loads(line)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            return {"op": "error", "id": None, "message": f"malformed request: {exc}"}
        op = request.get("op")
        if op == "hello":
            return self.hello()
        if op == "infer":
            return self.infer(request)
        return {"op": "error", "id": request.get("id"), "message": f"unknown op {op!r}"}


def serve_stream(session: InferenceSession, reader, writer) -> None:
    """Answer requests on one line stream until EOF."""
    for line in reader:
        if not line.strip():
            continue
        response = session.handle_line(line)
        writer.write((json.dumps(response) + "\n").encode("utf-8"))
        writer.flush()


def serve_stdio(session: InferenceSession) -> None:
    serve_stream(session, sys.stdin.buffer, sys.stdout.buffer)


def serve_tcp(session: InferenceSession, host: str, port: int, max_connections: int | None = None) -> None:
    """Accept connections one at a time, forever (or for max_connections)."""
    served = 0
    with socket.create_server((host, port)) as server:
        print(f"listening on {host}:{server.getsockname()[1]}", file=sys.stderr, flush=True)
        while max_connections is None or served < max_connections:
            conn, _ = server.accept()
            with conn:
                reader = conn.makefile("rb")
                writer = conn.makefile("wb")
                try:
                    serve_stream(session, reader, writer)
                except (OSError, ValueError):
                    pass
            served += 1
