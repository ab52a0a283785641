"""Talking to an external neural backend over the wire protocol.

Backends live behind newline-delimited JSON on TCP or a subprocess's
stdio: one hello for metadata, then infer requests carrying base64
clips and ids. This demo spawns a toy subprocess backend and drives it
through the same RemoteBackend client the pipeline would use.
"""

import sys
import tempfile
import textwrap
from pathlib import Path

import numpy as np

from gesturekit import Clip, RemoteBackend

TOY_BACKEND = textwrap.dedent(
    """
    import base64, json, sys
    import numpy as np
    for line in sys.stdin:
        req = json.loads(line)
        if req["op"] == "hello":
            resp = {"op": "hello", "num_classes": 2, "clip_depth": 8,
                    "input_size": 112, "labels": ["gesture", "no_gesture"]}
        else:
            pixels = np.frombuffer(base64.b64decode(req["data_b64"]), dtype=np.uint8)
            brightness = float(pixels.mean()) / 255.0
            resp = {"op": "infer", "id": req["id"],
                    "probs": [brightness, 1.0 - brightness]}
        sys.stdout.write(json.dumps(resp) + "\\n")
        sys.stdout.flush()
    """
)

script_path = Path(tempfile.mkstemp(suffix=".py")[1])
script_path.write_text(TOY_BACKEND)
backend = RemoteBackend.from_command(f"{sys.executable} {script_path}")
info = backend.handshake()
print(f"handshake: {info.num_classes} classes, depth {info.clip_depth}, labels {info.label_set.labels}")

for fill, name in [(230, "bright clip"), (20, "dark clip")]:
    clip = Clip(depth=8, start_index=0, data=np.full((8, 112, 112, 3), fill, dtype=np.uint8))
    probs = backend.infer(clip)
    print(f"{name}: p(gesture) = {probs.values[0]:.3f}, p(no_gesture) = {probs.values[1]:.3f}")

backend.close()
script_path.unlink()
print("done; the sidecar server speaks exactly this protocol with real 3D CNNs.")
