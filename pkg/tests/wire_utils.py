"""Test doubles for the NDJSON inference wire protocol."""

import base64
import json
import socket
import threading

import numpy as np


def serve_lines(handler):
    """Start a line-oriented fake backend on one end of a socketpair.

    `handler(request_dict) -> list[bytes]` returns raw lines to send
    back (allowing malformed or reordered responses). Returns the
    client-side (reader, writer) file pair and the server socket.
    """
    server_sock, client_sock = socket.socketpair()

    def loop():
        reader = server_sock.makefile("rb")
        writer = server_sock.makefile("wb")
        try:
            for line in reader:
                request = json.loads(line)
                for response in handler(request):
                    writer.write(response)
                writer.flush()
        except (OSError, ValueError, json.JSONDecodeError):
            pass
        finally:
            try:
                server_sock.close()
            except OSError:
                pass

    thread = threading.Thread(target=loop, daemon=True)
    thread.start()
    return client_sock.makefile("rb"), client_sock.makefile("wb"), client_sock


def jline(payload: dict) -> bytes:
    return (json.dumps(payload) + "\n").encode()


def uniform_backend_handler(num_classes=27, clip_depth=16, labels=None):
    """Well-behaved backend: hello metadata plus uniform probabilities."""
    labels = labels or [f"class_{i}" for i in range(num_classes)]

    def handler(request):
        if request["op"] == "hello":
            return [
                jline(
                    {
                        "op": "hello",
                        "num_classes": num_classes,
                        "clip_depth": clip_depth,
                        "input_size": 112,
                        "labels": labels,
                    }
                )
            ]
        if request["op"] == "infer":
            raw = base64.b64decode(request["data_b64"])
            assert len(raw) == clip_depth * 112 * 112 * 3
            probs = list(np.full(num_classes, 1.0 / num_classes))
            return [jline({"op": "infer", "id": request["id"], "probs": probs})]
        return []

    return handler
