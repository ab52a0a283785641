"""Frame ingestion, preprocessing, ring buffering and sliding-window extraction.

Every frame entering the pipeline is normalized to a 112x112 RGB image.
Consecutive frames are grouped into clips (the unit of inference): the
detector consumes short 8-frame clips, the classifier 16- or 32-frame
clips. Overlapping windows are extracted from a bounded FIFO buffer of
the most recent frames; extraction copies the covered range so snapshots
can be handed to inference workers while ingestion continues.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientHistoryError, InvalidFrameError, StreamGapError

FRAME_SIZE = 112
FRAME_CHANNELS = 3
CLIP_DEPTHS = (8, 16, 32)
DEFAULT_BUFFER_CAPACITY = 40


@dataclass
class RawFrame:
    """A frame as delivered by a source, before normalization.

    Attributes:
        width: Pixel columns, >= 1.
        height: Pixel rows, >= 1.
        pixels: uint8 array of shape (height, width, 3), RGB row-major.
        source_index: Ordinal position in the originating stream.
        timestamp_ms: Milliseconds since stream start.
    """

    width: int
    height: int
    pixels: np.ndarray
    source_index: int
    timestamp_ms: float

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidFrameError(
                f"frame dimensions must be positive, got {self.width}x{self.height}"
            )
        expected = (self.height, self.width, FRAME_CHANNELS)
        if self.pixels.shape != expected:
            raise InvalidFrameError(
                f"pixel buffer shape {self.pixels.shape} does not match {expected}"
            )


@dataclass
class Frame:
    """A preprocessed 112x112 RGB frame with a monotone index."""

    index: int
    timestamp_ms: float
    pixels: np.ndarray

    def __post_init__(self):
        expected = (FRAME_SIZE, FRAME_SIZE, FRAME_CHANNELS)
        if self.pixels.shape != expected:
            raise InvalidFrameError(
                f"frame pixels must have shape {expected}, got {self.pixels.shape}"
            )


@dataclass
class Clip:
    """A stack of `depth` consecutive frames, the unit of inference.

    `data` holds the frames in temporal order with shape
    (depth, 112, 112, 3); the logical clip layout is channels x depth x
    height x width.
    """

    depth: int
    start_index: int
    data: np.ndarray

    channels: int = FRAME_CHANNELS
    height: int = FRAME_SIZE
    width: int = FRAME_SIZE

    def __post_init__(self):
        if self.depth not in CLIP_DEPTHS:
            raise ValueError(f"clip depth must be one of {CLIP_DEPTHS}, got {self.depth}")
        expected = (self.depth, self.height, self.width, self.channels)
        if self.data.shape != expected:
            raise ValueError(f"clip data shape {self.data.shape} does not match {expected}")

    @property
    def end_index(self) -> int:
        return self.start_index + self.depth - 1


def _interp_axis(arr: np.ndarray, out_len: int, axis: int) -> np.ndarray:
    """Linear interpolation along one axis with half-pixel alignment."""
    in_len = arr.shape[axis]
    if in_len == out_len:
        return arr
    src = (np.arange(out_len) + 0.5) * (in_len / out_len) - 0.5
    src = np.clip(src, 0.0, in_len - 1.0)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, in_len - 1)
    frac = (src - lo).astype(np.float32)
    shape = [1] * arr.ndim
    shape[axis] = out_len
    lo_vals = np.take(arr, lo, axis=axis)
    hi_vals = np.take(arr, hi, axis=axis)
    return lo_vals + (hi_vals - lo_vals) * frac.reshape(shape)


def resize_bilinear(pixels: np.ndarray, out_height: int, out_width: int) -> np.ndarray:
    """Separable bilinear resize of an (H, W, C) uint8 image."""
    if pixels.shape[:2] == (out_height, out_width):
        return pixels
    work = pixels.astype(np.float32)
    work = _interp_axis(work, out_height, axis=0)
    work = _interp_axis(work, out_width, axis=1)
    return np.clip(np.rint(work), 0, 255).astype(np.uint8)


def preprocess(raw: RawFrame) -> Frame:
    """Normalize a raw frame: scale the shorter side to 112, center-crop.

    Scaling uses bilinear interpolation; the longer side is rounded
    half-up. Index and timestamp are preserved. Already-112x112 input
    passes through untouched.
    """
    if raw.width == FRAME_SIZE and raw.height == FRAME_SIZE:
        return Frame(index=raw.source_index, timestamp_ms=raw.timestamp_ms, pixels=raw.pixels)
    short = min(raw.width, raw.height)
    scale = FRAME_SIZE / short
    new_w = int(math.floor(raw.width * scale + 0.5))
    new_h = int(math.floor(raw.height * scale + 0.5))
    resized = resize_bilinear(raw.pixels, new_h, new_w)
    top = (new_h - FRAME_SIZE) // 2
    left = (new_w - FRAME_SIZE) // 2
    cropped = resized[top : top + FRAME_SIZE, left : left + FRAME_SIZE]
    return Frame(index=raw.source_index, timestamp_ms=raw.timestamp_ms, pixels=np.ascontiguousarray(cropped))


@dataclass
class FrameBuffer:
    """Bounded FIFO of the most recent frames, oldest evicted first.

    The buffered indices always form a contiguous range; pushing a
    non-consecutive index raises StreamGapError and leaves the buffer
    unchanged (the caller decides whether to reset).
    """

    capacity: int = DEFAULT_BUFFER_CAPACITY
    _frames: deque = field(default_factory=deque, repr=False)
    high_water: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("buffer capacity must be positive")

    def __len__(self) -> int:
        return len(self._frames)

    @property
    def first_index(self) -> int | None:
        return self._frames[0].index if self._frames else None

    @property
    def last_index(self) -> int | None:
        return self._frames[-1].index if self._frames else None

    def clear(self) -> None:
        self._frames.clear()

    def push(self, frame: Frame) -> Frame | None:
        """Append a frame; return the evicted frame if at capacity."""
        if self._frames and frame.index != self._frames[-1].index + 1:
            raise StreamGapError(
                f"frame index {frame.index} does not follow {self._frames[-1].index}"
            )
        self._frames.append(frame)
        evicted = None
        if len(self._frames) > self.capacity:
            evicted = self._frames.popleft()
        self.high_water = max(self.high_water, len(self._frames))
        return evicted

    def covers(self, start_index: int, end_index: int) -> bool:
        """Whether every frame in [start_index, end_index] is buffered."""
        if not self._frames or start_index > end_index:
            return False
        return self._frames[0].index <= start_index and end_index <= self._frames[-1].index

    def extract_clip(self, end_index: int, depth: int) -> Clip:
        """Copy out the clip of `depth` frames whose last frame is `end_index`."""
        start_index = end_index - depth + 1
        if not self.covers(start_index, end_index):
            raise InsufficientHistoryError(
                f"buffer holds [{self.first_index}, {self.last_index}], "
                f"clip needs [{start_index}, {end_index}]"
            )
        offset = start_index - self._frames[0].index
        frames = [self._frames[offset + i] for i in range(depth)]
        data = np.stack([f.pixels for f in frames])
        return Clip(depth=depth, start_index=start_index, data=data)

    def _windows(self, t: int, depth: int, count: int, stride: int) -> list[Clip]:
        oldest_end = t - (count - 1) * stride
        if not self.covers(oldest_end - depth + 1, t):
            raise InsufficientHistoryError(
                f"buffer holds [{self.first_index}, {self.last_index}], "
                f"{count} windows of depth {depth} ending at {t} need "
                f"[{oldest_end - depth + 1}, {t}]"
            )
        return [self.extract_clip(t - (count - 1 - i) * stride, depth) for i in range(count)]

    def detector_windows(self, t: int, depth: int = 8, k: int = 4, stride: int = 1) -> list[Clip]:
        """The k successive detector clips ending at t, oldest first."""
        if k < 1 or stride < 1:
            raise ValueError("window count and stride must be positive")
        return self._windows(t, depth, k, stride)

    def classifier_windows(self, t: int, depth: int = 16, n: int = 1, stride: int = 1) -> list[Clip]:
        """The n classifier clips ending at t, oldest first; middle clip is index n//2."""
        if n not in (1, 3, 5):
            raise ValueError(f"classifier window count must be 1, 3 or 5, got {n}")
        if depth not in (16, 32):
            raise ValueError(f"classifier depth must be 16 or 32, got {depth}")
        if stride < 1:
            raise ValueError("stride must be positive")
        return self._windows(t, depth, n, stride)


def clip_from_frames(frames: list[Frame], end_offset: int, depth: int) -> Clip:
    """Build a clip from a fully materialized frame list (offline path).

    `end_offset` is a position in `frames`, not a stream index.
    """
    start = end_offset - depth + 1
    if start < 0 or end_offset >= len(frames):
        raise InsufficientHistoryError(
            f"frame list of length {len(frames)} cannot supply clip ending at offset {end_offset}"
        )
    data = np.stack([f.pixels for f in frames[start : end_offset + 1]])
    return Clip(depth=depth, start_index=frames[start].index, data=data)
