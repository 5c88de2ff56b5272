"""Streaming prediction service over newline-delimited JSON.

One message per line, UTF-8. Requests are frame messages:

    {"type":"frame","id":7,"landmarks":[[x,y,z,v], ... 33 rows ...]}

(`id` is optional; when present it must be an integer and is echoed
back). Every well-formed frame produces exactly one prediction line:

    {"type":"prediction","id":7,"gesture":"left","probs":{...},"model":"<checksum>"}

with one probability per gesture class, keyed by class name in ordinal
order. Every malformed line produces exactly one error line:

    {"type":"error","reason":"parse"}

Reasons: "parse" (not JSON, wrong envelope, non-numeric or out-of-range
values), "arity" (landmark array is not 33 rows of 4), "nonfinite" (a
NaN or infinite coordinate). Predictions are stateless: each depends
only on the model and the frame, so the service can run over TCP
(threaded, one connection per client) or a stdin/stdout pipe with
identical payloads. The model is loaded once and shared read-only.
"""

from __future__ import annotations

import json
import math
import socketserver

import numpy as np

from .core import CHANNELS, CLASS_LABELS, NUM_LANDMARKS, PoseFrame
from .mlp import MlpModel, predict


class ProtocolError(ValueError):
    """A request line violated the wire grammar; `reason` is the error code."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(detail or reason)
        self.reason = reason


def parse_frame_line(line: str) -> tuple[PoseFrame, int | None]:
    """Validate one request line; returns the frame and the optional id."""
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError("parse", f"invalid JSON: {exc.msg}") from None
    if not isinstance(message, dict):
        raise ProtocolError("parse", "message is not an object")
    if message.get("type") != "frame":
        raise ProtocolError("parse", "message type is not 'frame'")
    frame_id = message.get("id")
    if frame_id is not None and (not isinstance(frame_id, int) or isinstance(frame_id, bool)):
        raise ProtocolError("parse", "id must be an integer")
    landmarks = message.get("landmarks")
    if not isinstance(landmarks, list):
        raise ProtocolError("parse", "landmarks must be an array")
    if len(landmarks) != NUM_LANDMARKS:
        raise ProtocolError("arity", f"expected {NUM_LANDMARKS} landmarks")
    for row in landmarks:
        if not isinstance(row, list) or len(row) != CHANNELS:
            raise ProtocolError("arity", f"each landmark needs {CHANNELS} values")
        for value in row:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ProtocolError("parse", "landmark values must be numbers")
            if not math.isfinite(value):
                raise ProtocolError("nonfinite", "landmark values must be finite")
        if not 0.0 <= row[3] <= 1.0:
            raise ProtocolError("parse", "visibility must be in [0, 1]")
    return PoseFrame(np.array(landmarks, dtype=np.float64)), frame_id


def prediction_line(
    model: MlpModel, checksum: str, frame: PoseFrame, frame_id: int | None
) -> str:
    gesture, probs = predict(model, frame)
    message: dict = {"type": "prediction"}
    if frame_id is not None:
        message["id"] = frame_id
    message["gesture"] = gesture.label
    message["probs"] = {label: float(p) for label, p in zip(CLASS_LABELS, probs)}
    message["model"] = checksum
    return json.dumps(message, separators=(",", ":"))


def error_line(reason: str) -> str:
    return json.dumps({"type": "error", "reason": reason}, separators=(",", ":"))


def handle_line(line: str, model: MlpModel, checksum: str, transform=None) -> str:
    """One line in, exactly one line out; shared by every transport.

    `transform` optionally preprocesses the frame (a checkpoint trained
    on normalized coordinates needs its inputs normalized the same way);
    a frame the transform cannot process numerically answers "nonfinite".
    """
    try:
        frame, frame_id = parse_frame_line(line)
        if transform is not None:
            frame = transform(frame)
    except ProtocolError as exc:
        return error_line(exc.reason)
    except ValueError:
        return error_line("nonfinite")
    return prediction_line(model, checksum, frame, frame_id)


def serve_stream(model: MlpModel, checksum: str, in_stream, out_stream, transform=None) -> int:
    """Answer every line of a text stream until EOF; returns the error count."""
    errors = 0
    for line in in_stream:
        if not line.strip():
            continue
        reply = handle_line(line, model, checksum, transform)
        out_stream.write(reply + "\n")
        out_stream.flush()
        if reply.startswith('{"type":"error"'):
            errors += 1
    return errors


class _ConnectionHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server = self.server
        try:
            for raw in self.rfile:
                line = raw.decode("utf-8", errors="replace")
                if not line.strip():
                    continue
                reply = handle_line(line, server.model, server.checksum, server.transform)
                self.wfile.write(reply.encode("utf-8") + b"\n")
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass  # client went away; nothing to answer


class PredictionServer(socketserver.ThreadingTCPServer):
    """Threaded TCP transport; connections are independent, lines sequential."""

    allow_reuse_address = True
    daemon_threads = True
    block_on_close = False  # shutdown must not wait for idle connections to hang up

    def __init__(self, address: tuple[str, int], model: MlpModel, checksum: str, transform=None):
        super().__init__(address, _ConnectionHandler)
        self.model = model
        self.checksum = checksum
        self.transform = transform

    @property
    def bound_address(self) -> tuple[str, int]:
        host, port = self.server_address[:2]
        return host, port
