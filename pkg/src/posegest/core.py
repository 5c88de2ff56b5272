"""Domain types shared across the toolkit: landmarks, frames, labels, samples.

A pose frame is a fixed 33-landmark snapshot in the BlazePose topology,
each landmark carrying (x, y, z, visibility). Coordinates are accepted
as-is from the upstream pose estimator (typically image-normalized x/y
with a relative-depth z); visibility is a confidence in [0, 1] and is
treated as an ordinary fourth input channel, never used for masking.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

NUM_LANDMARKS = 33
CHANNELS = 4  # x, y, z, visibility
FRAME_WIDTH = NUM_LANDMARKS * CHANNELS  # 132

# BlazePose 33-keypoint index map. Index order is load-bearing: dataset
# files, the wire protocol and the synthetic generator all rely on it.
LANDMARK_NAMES = (
    "nose",
    "left_eye_inner", "left_eye", "left_eye_outer",
    "right_eye_inner", "right_eye", "right_eye_outer",
    "left_ear", "right_ear",
    "mouth_left", "mouth_right",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_pinky", "right_pinky",
    "left_index", "right_index",
    "left_thumb", "right_thumb",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_heel", "right_heel",
    "left_foot_index", "right_foot_index",
)
assert len(LANDMARK_NAMES) == NUM_LANDMARKS

LANDMARK_INDEX = {name: i for i, name in enumerate(LANDMARK_NAMES)}


class GestureClass(Enum):
    """The eight static gesture labels, with fixed ordinal indices 0..7.

    The index doubles as the classifier's output slot, so the mapping
    must never be reordered. Serialized form is the lowercase name.
    """

    ATTENTION = 0
    RIGHT = 1
    LEFT = 2
    STOP = 3
    YES = 4
    SHRUG = 5
    RANDOM = 6
    STATIC = 7

    @property
    def index(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "GestureClass":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown gesture label {label!r}") from None

    @classmethod
    def from_index(cls, index: int) -> "GestureClass":
        try:
            return cls(index)
        except ValueError:
            raise ValueError(f"gesture index out of range: {index}") from None


NUM_CLASSES = len(GestureClass)  # 8
CLASS_LABELS = tuple(c.label for c in GestureClass)


@dataclass(frozen=True)
class Landmark:
    """One body keypoint: estimator coordinates plus a visibility score."""

    x: float
    y: float
    z: float
    visibility: float

    def __post_init__(self):
        for name in ("x", "y", "z", "visibility"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"landmark {name} is not finite: {v!r}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility out of [0, 1]: {self.visibility!r}")


@dataclass(frozen=True)
class PoseFrame:
    """An immutable 33-landmark snapshot; the classifier's input unit.

    Stored as a read-only (33, 4) float64 array in landmark order, each
    row (x, y, z, visibility).
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (NUM_LANDMARKS, CHANNELS):
            raise ValueError(
                f"pose frame must be ({NUM_LANDMARKS}, {CHANNELS}), got {pts.shape}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("pose frame contains non-finite values")
        vis = pts[:, 3]
        if np.any(vis < 0.0) or np.any(vis > 1.0):
            raise ValueError("pose frame visibility outside [0, 1]")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_landmarks(cls, landmarks) -> "PoseFrame":
        lms = list(landmarks)
        if len(lms) != NUM_LANDMARKS:
            raise ValueError(f"expected {NUM_LANDMARKS} landmarks, got {len(lms)}")
        return cls(np.array([[lm.x, lm.y, lm.z, lm.visibility] for lm in lms]))

    def landmark(self, index: int) -> Landmark:
        x, y, z, v = self.points[index]
        return Landmark(float(x), float(y), float(z), float(v))

    @property
    def landmarks(self) -> list[Landmark]:
        return [self.landmark(i) for i in range(NUM_LANDMARKS)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PoseFrame):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


def flatten_frame(frame: PoseFrame) -> np.ndarray:
    """Flatten to a 132-vector in landmark-major order (x,y,z,v per landmark)."""
    return frame.points.reshape(FRAME_WIDTH).copy()


def unflatten_frame(vec) -> PoseFrame:
    """Inverse of flatten_frame; rejects vectors of the wrong length."""
    arr = np.asarray(vec, dtype=np.float64)
    if arr.shape != (FRAME_WIDTH,):
        raise ValueError(f"expected a flat vector of length {FRAME_WIDTH}, got {arr.shape}")
    return PoseFrame(arr.reshape(NUM_LANDMARKS, CHANNELS))


@dataclass(frozen=True)
class Sample:
    """One labeled frame from one subject at a known camera distance."""

    frame: PoseFrame
    label: GestureClass
    subject: str
    distance_m: float

    def __post_init__(self):
        if not isinstance(self.frame, PoseFrame):
            raise TypeError(f"frame must be a PoseFrame, got {type(self.frame).__name__}")
        if not isinstance(self.label, GestureClass):
            raise TypeError(f"label must be a GestureClass, got {type(self.label).__name__}")
        if not isinstance(self.subject, str) or not self.subject:
            raise ValueError("subject must be a non-empty string")
        if not (np.isfinite(self.distance_m) and self.distance_m > 0):
            raise ValueError(f"distance_m must be positive, got {self.distance_m!r}")


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of samples."""

    samples: tuple[Sample, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i) -> Sample:
        return self.samples[i]

    def class_histogram(self) -> dict[GestureClass, int]:
        """Per-class sample counts; every class is present (0 when unused)."""
        counts = Counter(s.label for s in self.samples)
        return {c: counts.get(c, 0) for c in GestureClass}

    def subjects(self) -> list[str]:
        """Distinct subject identifiers in lexicographic order."""
        return sorted({s.subject for s in self.samples})
