"""Frame sources: image directories, synthetic streams, and raw stdin.

All sources yield RawFrame (or preprocessed Frame) objects in index
order. I/O problems surface as SourceError so the pipeline can stop
with a truncated summary instead of crashing.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO, Iterator

import numpy as np

from .errors import SourceError
from .stream import FRAME_CHANNELS, FRAME_SIZE, Frame, RawFrame

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp")


def frames_from_directory(path: str | Path, fps: float = 30.0) -> Iterator[RawFrame]:
    """Yield frames from a directory of numbered images (one video per directory).

    Files are consumed in sorted name order, which matches the usual
    %05d.jpg numbering.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise SourceError(f"not a directory: {directory}")
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise SourceError("Pillow is required for image directory sources") from exc
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise SourceError(f"no image files in {directory}")
    for index, file in enumerate(files):
        try:
            with Image.open(file) as img:
                rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except OSError as exc:
            raise SourceError(f"failed to read {file}: {exc}") from exc
        height, width = rgb.shape[:2]
        yield RawFrame(
            width=width,
            height=height,
            pixels=rgb,
            source_index=index,
            timestamp_ms=index * 1000.0 / fps,
        )


def synthetic_frames(count: int, fps: float = 30.0, fill: int = 0) -> Iterator[Frame]:
    """Yield `count` constant 112x112 frames sharing one pixel buffer.

    Pixel content is irrelevant to oracle/stub backends, so the shared
    buffer keeps per-frame cost constant for throughput runs.
    """
    pixels = np.full((FRAME_SIZE, FRAME_SIZE, FRAME_CHANNELS), fill, dtype=np.uint8)
    for index in range(count):
        yield Frame(index=index, timestamp_ms=index * 1000.0 / fps, pixels=pixels)


def frames_from_stdin(stream: BinaryIO, fps: float = 30.0) -> Iterator[RawFrame]:
    """Yield frames from a length-prefixed raw RGB stream.

    Wire format per frame: 4-byte big-endian width, 4-byte big-endian
    height, then width*height*3 bytes of RGB pixels. Ends cleanly at
    EOF on a frame boundary; a partial frame raises SourceError.
    """
    index = 0
    while True:
        header = stream.read(8)
        if not header:
            return
        if len(header) < 8:
            raise SourceError("truncated frame header on stdin")
        width, height = struct.unpack(">II", header)
        if width < 1 or height < 1:
            raise SourceError(f"invalid frame dimensions {width}x{height} on stdin")
        nbytes = width * height * FRAME_CHANNELS
        payload = stream.read(nbytes)
        if len(payload) < nbytes:
            raise SourceError("truncated frame payload on stdin")
        pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, FRAME_CHANNELS)
        yield RawFrame(
            width=width,
            height=height,
            pixels=pixels,
            source_index=index,
            timestamp_ms=index * 1000.0 / fps,
        )
        index += 1
