"""Frames, the ring buffer, and overlapping clip windows.

The stream layer normalizes every incoming frame to 112x112 RGB and
keeps the most recent frames in a bounded FIFO. Detector and classifier
never see single frames: they consume overlapping clips extracted from
that buffer.
"""

import numpy as np

from gesturekit import Frame, FrameBuffer, RawFrame, preprocess

# A raw camera frame (160x120) becomes a 112x112 frame: the shorter
# side scales to 112 and the width is center-cropped.
raw = RawFrame(
    width=160,
    height=120,
    pixels=np.random.default_rng(0).integers(0, 256, size=(120, 160, 3), dtype=np.uint8),
    source_index=0,
    timestamp_ms=0.0,
)
frame = preprocess(raw)
print(f"preprocessed {raw.width}x{raw.height} -> {frame.pixels.shape}")

# Fill a buffer with 20 consecutive frames.
buffer = FrameBuffer(capacity=40)
pixels = np.zeros((112, 112, 3), dtype=np.uint8)
for i in range(20):
    buffer.push(Frame(index=i, timestamp_ms=i * 33.3, pixels=pixels))
print(f"buffer holds frames [{buffer.first_index}, {buffer.last_index}]")

# The detector looks at four successive 8-frame clips, stride 1.
windows = buffer.detector_windows(t=19, depth=8, k=4, stride=1)
print("detector windows:", [(c.start_index, c.end_index) for c in windows])

# The classifier uses one, three or five deeper clips; the middle
# window is the anchor.
windows = buffer.classifier_windows(t=19, depth=16, n=3)
print("classifier windows:", [(c.start_index, c.end_index) for c in windows])
print("middle window:", windows[len(windows) // 2].start_index, "-", windows[len(windows) // 2].end_index)
