"""Wire-protocol client for external neural backends.

The protocol is newline-delimited JSON over TCP or a subprocess's
stdio, one document per line:

    -> {"op": "hello"}
    <- {"op": "hello", "num_classes": N, "clip_depth": D,
        "input_size": 112, "labels": [...]}
    -> {"op": "infer", "id": K, "shape": [3, D, 112, 112],
        "data_b64": "<base64 of d*h*w*3 uint8 RGB>"}
    <- {"op": "infer", "id": K, "probs": [f0, ..., fN-1]}
    <- {"op": "error", "id": K, "message": "..."}

Responses may arrive out of order on the wire; the client matches them
to requests by id and delivers them to callers in request order.
"""

from __future__ import annotations

import base64
import json
import queue
import shlex
import socket
import subprocess
import threading
from typing import BinaryIO, Callable

from .backend import BackendInfo, LabelSet, ProbabilityVector
from .errors import (
    BackendTimeoutError,
    BackendUnavailableError,
    ProtocolViolationError,
    RemoteBackendError,
    ShapeMismatchError,
)
from .stream import FRAME_SIZE, Clip

DEFAULT_TIMEOUT_S = 5.0

_EOF = object()


class RemoteBackend:
    """Client half of the inference wire protocol.

    Writes are serialized behind a lock; a reader thread drains the
    connection so out-of-order responses can be demultiplexed by id.
    """

    def __init__(
        self,
        reader: BinaryIO,
        writer: BinaryIO,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        on_close: Callable[[], None] | None = None,
    ):
        self._writer = writer
        self._timeout_s = timeout_s
        self._on_close = on_close
        self._write_lock = threading.Lock()
        self._next_id = 0
        self._inbox: queue.Queue = queue.Queue()
        self._parked: dict[int, dict] = {}
        self._seen_ids: set[int] = set()
        self._info: BackendInfo | None = None
        self._closed = False
        self._reader_thread = threading.Thread(
            target=self._drain, args=(reader,), daemon=True
        )
        self._reader_thread.start()

    @classmethod
    def from_tcp(cls, host: str, port: int, timeout_s: float = DEFAULT_TIMEOUT_S) -> "RemoteBackend":
        try:
            sock = socket.create_connection((host, port), timeout=timeout_s)
        except OSError as exc:
            raise BackendUnavailableError(f"cannot connect to {host}:{port}: {exc}") from exc
        reader = sock.makefile("rb")
        writer = sock.makefile("wb")
        return cls(reader, writer, timeout_s=timeout_s, on_close=sock.close)

    @classmethod
    def from_command(cls, command: str, timeout_s: float = DEFAULT_TIMEOUT_S) -> "RemoteBackend":
        try:
            proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE
            )
        except OSError as exc:
            raise BackendUnavailableError(f"cannot start backend command: {exc}") from exc

        def shutdown():
            proc.terminate()
            try:
                proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                proc.kill()

        return cls(proc.stdout, proc.stdin, timeout_s=timeout_s, on_close=shutdown)

    def _drain(self, reader: BinaryIO) -> None:
        try:
            for line in reader:
                self._inbox.put(line)
        except (OSError, ValueError):
            pass
        self._inbox.put(_EOF)

    def _send(self, message: dict) -> None:
        payload = (json.dumps(message) + "\n").encode("utf-8")
        try:
            self._writer.write(payload)
            self._writer.flush()
        except (OSError, ValueError, BrokenPipeError) as exc:
            raise BackendUnavailableError(f"connection closed while sending: {exc}") from exc

    def _next_message(self) -> dict:
        """Read, parse and validate the next message off the wire."""
        try:
            item = self._inbox.get(timeout=self._timeout_s)
        except queue.Empty:
            raise BackendTimeoutError(
                f"no response within {self._timeout_s * 1000:.0f} ms"
            ) from None
        if item is _EOF:
            raise BackendUnavailableError("connection closed by backend")
        try:
            message = json.loads(item)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ProtocolViolationError(f"malformed message: {item[:120]!r}") from exc
        if not isinstance(message, dict) or "op" not in message:
            raise ProtocolViolationError(f"message without op: {message!r}")
        return message

    def handshake(self) -> BackendInfo:
        """Exchange hellos; returns and caches the backend's metadata."""
        self._send({"op": "hello"})
        message = self._next_message()
        if message.get("op") != "hello":
            raise ProtocolViolationError(f"expected hello response, got {message!r}")
        try:
            labels = tuple(str(label) for label in message["labels"])
            info = BackendInfo(
                num_classes=int(message["num_classes"]),
                clip_depth=int(message["clip_depth"]),
                input_size=int(message["input_size"]),
                label_set=LabelSet(id=f"remote:{len(labels)}", labels=labels),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolViolationError(f"invalid hello response: {message!r}") from exc
        self._info = info
        return info

    @property
    def info(self) -> BackendInfo:
        if self._info is None:
            return self.handshake()
        return self._info

    def request(self, clip: Clip) -> int:
        """Send one infer request; returns its id for later collection."""
        info = self.info
        if clip.depth != info.clip_depth:
            raise ShapeMismatchError(
                f"backend expects clip depth {info.clip_depth}, got {clip.depth}"
            )
        with self._write_lock:
            request_id = self._next_id
            self._next_id += 1
            self._send(
                {
                    "op": "infer",
                    "id": request_id,
                    "shape": [clip.channels, clip.depth, FRAME_SIZE, FRAME_SIZE],
                    "data_b64": base64.b64encode(clip.data.tobytes()).decode("ascii"),
                }
            )
        return request_id

    def collect(self, request_id: int) -> ProbabilityVector:
        """Wait for the response matching `request_id`."""
        while request_id not in self._parked:
            message = self._next_message()
            op = message.get("op")
            if op not in ("infer", "error"):
                raise ProtocolViolationError(f"unexpected op {op!r} while awaiting infer")
            try:
                response_id = int(message["id"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolViolationError(f"response without valid id: {message!r}") from exc
            if response_id in self._seen_ids:
                raise ProtocolViolationError(f"duplicate response id {response_id}")
            if response_id >= self._next_id:
                raise ProtocolViolationError(f"response id {response_id} was never requested")
            self._seen_ids.add(response_id)
            self._parked[response_id] = message
        message = self._parked.pop(request_id)
        if message["op"] == "error":
            raise RemoteBackendError(str(message.get("message", "unspecified backend error")))
        probs = message.get("probs")
        if not isinstance(probs, list):
            raise ProtocolViolationError(f"infer response without probs: {message!r}")
        if len(probs) != self.info.num_classes:
            raise ShapeMismatchError(
                f"backend returned {len(probs)} probabilities, expected {self.info.num_classes}"
            )
        try:
            return ProbabilityVector(
                values=[float(p) for p in probs], label_set_id=self.info.label_set.id
            )
        except (TypeError, ValueError) as exc:
            raise ProtocolViolationError(f"invalid probabilities: {probs!r}") from exc

    def infer(self, clip: Clip) -> ProbabilityVector:
        return self.collect(self.request(clip))

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._writer.close()
        except OSError:
            pass
        if self._on_close is not None:
            self._on_close()

    def __enter__(self) -> "RemoteBackend":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
