"""File formats: newline-delimited dataset records and model checkpoints.

Dataset files are UTF-8 JSON Lines, one sample per line:

    {"subject": "s00", "label": "left", "distance_m": 1.0,
     "landmarks": [[x, y, z, visibility], ... 33 entries ...]}

Checkpoints are a small versioned JSON envelope; weight matrices and
biases are base64-encoded little-endian float64 payloads (row-major), so
round trips are bit-exact while the header stays readable. Floats in
dataset files use Python's shortest round-trip decimal representation.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .core import (
    CHANNELS,
    CLASS_LABELS,
    NUM_LANDMARKS,
    Dataset,
    GestureClass,
    PoseFrame,
    Sample,
)
from .mlp import DenseLayer, MlpModel

CHECKPOINT_VERSION = 1


class DatasetFormatError(ValueError):
    """A dataset file record failed validation; message names the line."""


class CheckpointError(ValueError):
    """A checkpoint file is corrupt, mismatched, or internally inconsistent."""


def _sample_to_record(sample: Sample) -> dict:
    return {
        "subject": sample.subject,
        "label": sample.label.label,
        "distance_m": sample.distance_m,
        "landmarks": [[float(v) for v in row] for row in sample.frame.points],
    }


def _record_to_sample(record: dict, where: str) -> Sample:
    if not isinstance(record, dict):
        raise DatasetFormatError(f"{where}: record is not an object")
    for key in ("subject", "label", "distance_m", "landmarks"):
        if key not in record:
            raise DatasetFormatError(f"{where}: missing field {key!r}")
    subject = record["subject"]
    if not isinstance(subject, str) or not subject:
        raise DatasetFormatError(f"{where}: subject must be a non-empty string")
    try:
        label = GestureClass.from_label(str(record["label"]))
    except ValueError as exc:
        raise DatasetFormatError(f"{where}: {exc}") from None
    distance = record["distance_m"]
    if not isinstance(distance, (int, float)) or isinstance(distance, bool):
        raise DatasetFormatError(f"{where}: distance_m must be a number")
    if not (math.isfinite(distance) and distance > 0):
        raise DatasetFormatError(f"{where}: distance_m must be positive and finite")
    landmarks = record["landmarks"]
    if not isinstance(landmarks, list) or len(landmarks) != NUM_LANDMARKS:
        got = len(landmarks) if isinstance(landmarks, list) else type(landmarks).__name__
        raise DatasetFormatError(f"{where}: expected {NUM_LANDMARKS} landmarks, got {got}")
    for i, row in enumerate(landmarks):
        if not isinstance(row, list) or len(row) != CHANNELS:
            raise DatasetFormatError(
                f"{where}: landmark {i} must be a {CHANNELS}-element array"
            )
        for v in row:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise DatasetFormatError(f"{where}: landmark {i} has a non-numeric entry")
            if not math.isfinite(v):
                raise DatasetFormatError(f"{where}: landmark {i} has a non-finite coordinate")
    try:
        frame = PoseFrame(np.array(landmarks, dtype=np.float64))
        return Sample(frame=frame, label=label, subject=subject, distance_m=float(distance))
    except ValueError as exc:
        raise DatasetFormatError(f"{where}: {exc}") from None


def write_dataset(ds: Dataset, path) -> None:
    """Write one JSON record per line; read_dataset inverts this exactly."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for sample in ds:
            fh.write(json.dumps(_sample_to_record(sample)) + "\n")


def read_dataset(path) -> Dataset:
    """Parse and validate a dataset file, preserving record order.

    Raises DatasetFormatError naming the offending line on any invalid
    record; blank lines are rejected rather than skipped.
    """
    path = Path(path)
    samples = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            where = f"{path}:{lineno}"
            stripped = line.strip()
            if not stripped:
                raise DatasetFormatError(f"{where}: blank line in dataset file")
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{where}: invalid JSON ({exc.msg})") from None
            samples.append(_record_to_sample(record, where))
    return Dataset(tuple(samples))


def _encode_array(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode_array(payload: str, shape: tuple[int, ...], what: str) -> np.ndarray:
    try:
        raw = base64.b64decode(payload.encode("ascii"), validate=True)
    except Exception:
        raise CheckpointError(f"corrupt base64 payload for {what}") from None
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise CheckpointError(
            f"payload for {what} holds {len(raw)} bytes, expected {expected}"
        )
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def model_checksum(model: MlpModel) -> str:
    """Stable hex digest of the model's parameters (first 16 hex chars of SHA-256)."""
    h = hashlib.sha256()
    for layer in model.layers:
        h.update(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    return h.hexdigest()[:16]


def save_model(model: MlpModel, path, metadata: dict | None = None) -> None:
    """Write a versioned checkpoint; parameters are stored bit-exactly."""
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "dims": list(model.dims),
        "classes": list(CLASS_LABELS),
        "layers": [
            {
                "weights": _encode_array(layer.weights),
                "bias": _encode_array(layer.bias),
            }
            for layer in model.layers
        ],
        "metadata": metadata or {},
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model(path) -> tuple[MlpModel, dict]:
    """Read a checkpoint back; returns (model, metadata).

    Rejects unknown format versions, class tables that do not match the
    gesture vocabulary, inconsistent dimensions, and truncated payloads.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from None
    if not isinstance(doc, dict):
        raise CheckpointError(f"{path}: corrupt checkpoint (not an object)")
    version = doc.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {version!r} (expected {CHECKPOINT_VERSION})"
        )
    classes = doc.get("classes")
    if classes != list(CLASS_LABELS):
        raise CheckpointError(f"{path}: class table does not match the gesture vocabulary")
    dims = doc.get("dims")
    if (
        not isinstance(dims, list)
        or len(dims) < 2
        or not all(isinstance(d, int) and d > 0 for d in dims)
    ):
        raise CheckpointError(f"{path}: invalid dims {dims!r}")
    layer_docs = doc.get("layers")
    if not isinstance(layer_docs, list) or len(layer_docs) != len(dims) - 1:
        raise CheckpointError(f"{path}: layer count does not match dims")
    layers = []
    for k, layer_doc in enumerate(layer_docs):
        if not isinstance(layer_doc, dict) or "weights" not in layer_doc or "bias" not in layer_doc:
            raise CheckpointError(f"{path}: layer {k} entry is malformed")
        in_dim, out_dim = dims[k], dims[k + 1]
        weights = _decode_array(layer_doc["weights"], (out_dim, in_dim), f"layer {k} weights")
        bias = _decode_array(layer_doc["bias"], (out_dim,), f"layer {k} bias")
        try:
            layers.append(DenseLayer(weights, bias))
        except ValueError as exc:
            raise CheckpointError(f"{path}: layer {k}: {exc}") from None
    try:
        model = MlpModel(layers)
    except ValueError as exc:
        raise CheckpointError(f"{path}: {exc}") from None
    metadata = doc.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise CheckpointError(f"{path}: metadata must be an object")
    return model, metadata
