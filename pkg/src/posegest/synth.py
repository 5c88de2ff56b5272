"""Deterministic synthetic pose dataset generator.

Stands in for a recorded gesture corpus: every sample is built from a
canonical standing skeleton plus a per-class displacement recipe, a
seeded per-subject style (handedness, amplitude, build, framing), a
camera-distance transform, and Gaussian coordinate noise.

Geometry is image-normalized: x grows to the right of the image, y grows
downward, z is relative depth (negative = toward the camera). The subject
faces the camera, so their left side sits at x > 0.5. The stop and yes
recipes share the same arm pose and differ only at the hand landmarks
(wrists, pinkies, indexes, thumbs) by a small offset, which makes the
pair genuinely confusable at range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    LANDMARK_INDEX,
    NUM_LANDMARKS,
    Dataset,
    GestureClass,
    PoseFrame,
    Sample,
)

# Landmark index pairs swapped by a body-midline mirror; nose is self-paired.
MIRROR_PAIRS = (
    (1, 4), (2, 5), (3, 6), (7, 8), (9, 10), (11, 12), (13, 14),
    (15, 16), (17, 18), (19, 20), (21, 22), (23, 24), (25, 26),
    (27, 28), (29, 30), (31, 32),
)

# Wrists, pinkies, indexes, thumbs: the only rows where stop and yes differ.
HAND_LANDMARKS = tuple(range(15, 23))

# Left-side and center landmarks of the canonical standing pose:
# (x, y, z, visibility). The right side is generated by mirroring, so the
# base skeleton is exactly symmetric about x = 0.5.
_BASE_LEFT_AND_CENTER = {
    "nose": (0.500, 0.220, -0.050, 0.99),
    "left_eye_inner": (0.515, 0.205, -0.050, 0.99),
    "left_eye": (0.525, 0.205, -0.050, 0.99),
    "left_eye_outer": (0.535, 0.205, -0.050, 0.99),
    "left_ear": (0.550, 0.215, -0.020, 0.98),
    "mouth_left": (0.520, 0.240, -0.040, 0.99),
    "left_shoulder": (0.600, 0.330, 0.000, 0.99),
    "left_elbow": (0.630, 0.460, 0.000, 0.98),
    "left_wrist": (0.640, 0.580, -0.020, 0.97),
    "left_pinky": (0.645, 0.620, -0.020, 0.96),
    "left_index": (0.640, 0.625, -0.030, 0.96),
    "left_thumb": (0.630, 0.615, -0.030, 0.96),
    "left_hip": (0.560, 0.600, 0.000, 0.99),
    "left_knee": (0.555, 0.760, 0.010, 0.95),
    "left_ankle": (0.550, 0.900, 0.020, 0.93),
    "left_heel": (0.545, 0.930, 0.030, 0.91),
    "left_foot_index": (0.560, 0.950, -0.020, 0.90),
}


def _build_base() -> np.ndarray:
    pts = np.zeros((NUM_LANDMARKS, 4))
    for name, row in _BASE_LEFT_AND_CENTER.items():
        pts[LANDMARK_INDEX[name]] = row
    for left, right in MIRROR_PAIRS:
        x, y, z, v = pts[left]
        pts[right] = (1.0 - x, y, z, v)
    return pts


_BASE = _build_base()
_BASE.flags.writeable = False


def base_skeleton() -> np.ndarray:
    """Copy of the canonical (33, 4) standing skeleton."""
    return _BASE.copy()


def mirror_points(points: np.ndarray) -> np.ndarray:
    """Reflect a (33, 4) landmark array about the body midline x = 0.5."""
    out = points.copy()
    for left, right in MIRROR_PAIRS:
        out[[left, right]] = points[[right, left]]
    out[:, 0] = 1.0 - out[:, 0]
    return out


def _mirror_recipe(recipe: dict[str, tuple[float, float, float]]):
    """Swap a displacement recipe to the other body side (x deltas negate)."""
    swapped = {}
    for name, (dx, dy, dz) in recipe.items():
        if name.startswith("left_"):
            other = "right_" + name[len("left_"):]
        elif name.startswith("right_"):
            other = "left_" + name[len("right_"):]
        elif name == "mouth_left":
            other = "mouth_right"
        elif name == "mouth_right":
            other = "mouth_left"
        else:
            other = name
        swapped[other] = (-dx, dy, dz)
    return swapped


# Displacement recipes at amplitude 1.0, keyed by landmark name.
_LEFT_RECIPE = {
    "left_elbow": (0.130, -0.130, 0.000),
    "left_wrist": (0.280, -0.250, 0.000),
    "left_pinky": (0.305, -0.290, 0.000),
    "left_index": (0.315, -0.295, 0.000),
    "left_thumb": (0.305, -0.280, 0.000),
}

_ATTENTION_RECIPE = {
    "left_elbow": (0.020, -0.260, -0.020),
    "right_elbow": (-0.020, -0.260, -0.020),
    "left_wrist": (-0.060, -0.480, -0.040),
    "right_wrist": (0.060, -0.480, -0.040),
    "left_pinky": (-0.065, -0.510, -0.040),
    "right_pinky": (0.065, -0.510, -0.040),
    "left_index": (-0.060, -0.515, -0.040),
    "right_index": (0.060, -0.515, -0.040),
    "left_thumb": (-0.055, -0.505, -0.040),
    "right_thumb": (0.055, -0.505, -0.040),
}

# Stop and yes share this arm raise (subject's right forearm lifted,
# canonical side; handedness may flip it per subject).
_RAISED_FOREARM = {
    "right_elbow": (-0.010, -0.100, -0.040),
}

_STOP_HANDS = {
    "right_wrist": (0.010, -0.300, -0.100),
    "right_pinky": (-0.010, -0.400, -0.120),
    "right_index": (0.015, -0.410, -0.120),
    "right_thumb": (0.025, -0.365, -0.110),
}

_YES_HANDS = {
    "right_wrist": (0.015, -0.265, -0.055),
    "right_pinky": (0.005, -0.320, -0.060),
    "right_index": (0.015, -0.330, -0.060),
    "right_thumb": (0.015, -0.365, -0.050),
}

# Palms-up shrug: shoulders toward the ears, elbows flared, forearms
# swung wide so the hands sit well outside the body at waist height.
# Symmetric and wide, unlike the one-armed raises; hands clearly moved,
# unlike the idle stance.
_SHRUG_RECIPE = {
    "left_shoulder": (0.012, -0.065, -0.010),
    "right_shoulder": (-0.012, -0.065, -0.010),
    "left_elbow": (0.110, -0.040, -0.010),
    "right_elbow": (-0.110, -0.040, -0.010),
    "left_wrist": (0.155, -0.140, -0.040),
    "right_wrist": (-0.155, -0.140, -0.040),
    "left_pinky": (0.175, -0.150, -0.040),
    "right_pinky": (-0.175, -0.150, -0.040),
    "left_index": (0.180, -0.145, -0.045),
    "right_index": (-0.180, -0.145, -0.045),
    "left_thumb": (0.165, -0.135, -0.045),
    "right_thumb": (-0.165, -0.135, -0.045),
}

_RECIPES = {
    GestureClass.ATTENTION: _ATTENTION_RECIPE,
    GestureClass.LEFT: _LEFT_RECIPE,
    GestureClass.RIGHT: _mirror_recipe(_LEFT_RECIPE),
    GestureClass.STOP: {**_RAISED_FOREARM, **_STOP_HANDS},
    GestureClass.YES: {**_RAISED_FOREARM, **_YES_HANDS},
    GestureClass.SHRUG: _SHRUG_RECIPE,
    GestureClass.STATIC: {},
}

# Gestures whose recipe may be performed with either arm.
_FLIPPABLE = frozenset({GestureClass.STOP, GestureClass.YES})

# Visibility decay per meter beyond the nearest recording distance.
_VIS_DECAY = 0.045


@dataclass(frozen=True)
class SubjectStyle:
    """Per-subject performance style, drawn once per subject."""

    flip: bool = False  # use the other arm, where the gesture allows it
    amplitude: float = 1.0  # displacement scale
    build: float = 1.0  # overall skeleton scale about the hip center
    shift_x: float = 0.0  # framing offset in the image plane
    shift_y: float = 0.0


NEUTRAL_STYLE = SubjectStyle()


def _draw_style(rng: np.random.Generator) -> SubjectStyle:
    return SubjectStyle(
        flip=bool(rng.integers(0, 2)),
        amplitude=float(rng.uniform(0.85, 1.15)),
        build=float(rng.uniform(0.93, 1.07)),
        shift_x=float(rng.uniform(-0.04, 0.04)),
        shift_y=float(rng.uniform(-0.02, 0.02)),
    )


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters; the whole dataset is a pure function of these."""

    subjects: int = 8
    samples_per_class_per_subject: int = 5
    distances: tuple[float, ...] = (1.0, 4.0, 6.0)
    noise_std: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.subjects < 1:
            raise ValueError(f"subjects must be >= 1, got {self.subjects}")
        if self.samples_per_class_per_subject < 1:
            raise ValueError(
                f"samples_per_class_per_subject must be >= 1, got {self.samples_per_class_per_subject}"
            )
        if not self.distances or any(d <= 0 for d in self.distances):
            raise ValueError(f"distances must be positive, got {self.distances!r}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")
        object.__setattr__(self, "distances", tuple(float(d) for d in self.distances))


def _random_arm_recipe(rng: np.random.Generator):
    """Fresh displacement of both arms, bounded to plausible joint ranges.

    The wrist box is wide in the image plane but shallow in depth, so a
    draw rarely lands on the palm-forward stop pose; the deliberate
    stop/yes overlap stays the dominant source of confusion.
    """
    recipe = {}
    for side in ("left", "right"):
        wrist = np.array(
            [
                rng.uniform(-0.32, 0.32),
                rng.uniform(-0.52, 0.10),
                rng.uniform(-0.07, 0.03),
            ]
        )
        elbow = 0.45 * wrist + rng.uniform(-0.05, 0.05, 3)
        recipe[f"{side}_elbow"] = tuple(elbow)
        recipe[f"{side}_wrist"] = tuple(wrist)
        for part in ("pinky", "index", "thumb"):
            recipe[f"{side}_{part}"] = tuple(wrist + rng.uniform(-0.035, 0.035, 3))
    return recipe


def _archetype_points(
    gesture: GestureClass,
    style: SubjectStyle,
    distance_m: float,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Noiseless (33, 4) landmark array for one gesture performance."""
    if gesture is GestureClass.RANDOM:
        if rng is None:
            raise ValueError("the random gesture needs an RNG to sample its pose")
        recipe = _random_arm_recipe(rng)
    else:
        recipe = _RECIPES[gesture]
        if style.flip and gesture in _FLIPPABLE:
            recipe = _mirror_recipe(recipe)

    pts = base_skeleton()
    for name, (dx, dy, dz) in recipe.items():
        idx = LANDMARK_INDEX[name]
        pts[idx, 0] += style.amplitude * dx
        pts[idx, 1] += style.amplitude * dy
        pts[idx, 2] += style.amplitude * dz

    # Build scale about the hip center, then framing shift. No-op transforms
    # are skipped outright so the neutral style is an exact identity.
    if style.build != 1.0:
        hip_center = 0.5 * (
            _BASE[LANDMARK_INDEX["left_hip"]] + _BASE[LANDMARK_INDEX["right_hip"]]
        )
        pts[:, 0] = hip_center[0] + (pts[:, 0] - hip_center[0]) * style.build
        pts[:, 1] = hip_center[1] + (pts[:, 1] - hip_center[1]) * style.build
        pts[:, 2] *= style.build
    if style.shift_x != 0.0:
        pts[:, 0] += style.shift_x
    if style.shift_y != 0.0:
        pts[:, 1] += style.shift_y

    # Distance: the figure shrinks toward the frame center and landmark
    # confidence drops.
    if distance_m != 1.0:
        pts[:, 0] = 0.5 + (pts[:, 0] - 0.5) / distance_m
        pts[:, 1] = 0.5 + (pts[:, 1] - 0.5) / distance_m
        pts[:, 2] /= distance_m
        pts[:, 3] = np.clip(pts[:, 3] * (1.0 - _VIS_DECAY * (distance_m - 1.0)), 0.0, 1.0)
    return pts


def archetype_frame(
    gesture: GestureClass,
    style: SubjectStyle = NEUTRAL_STYLE,
    distance_m: float = 1.0,
    rng: np.random.Generator | None = None,
) -> PoseFrame:
    """The noiseless frame for one gesture under a style and distance."""
    return PoseFrame(_archetype_points(gesture, style, distance_m, rng))


def subject_styles(config: SynthConfig) -> dict[str, SubjectStyle]:
    """The per-subject styles generate() will use, keyed by subject id."""
    rng = np.random.default_rng(config.seed)
    return {f"s{i:02d}": _draw_style(rng) for i in range(config.subjects)}


def generate(config: SynthConfig) -> Dataset:
    """Build the full synthetic dataset for a config, deterministically.

    Sample count is subjects x 8 classes x samples_per_class_per_subject
    x len(distances). Styles are drawn first, then samples in subject /
    class / repetition / distance order, all from one seeded stream.
    """
    rng = np.random.default_rng(config.seed)
    styles = {f"s{i:02d}": _draw_style(rng) for i in range(config.subjects)}

    samples = []
    for subject, style in styles.items():
        for gesture in GestureClass:
            for _ in range(config.samples_per_class_per_subject):
                for distance in config.distances:
                    pts = _archetype_points(gesture, style, distance, rng)
                    noise = rng.normal(0.0, 1.0, (NUM_LANDMARKS, 3))
                    pts[:, :3] += config.noise_std * noise
                    samples.append(
                        Sample(
                            frame=PoseFrame(pts),
                            label=gesture,
                            subject=subject,
                            distance_m=distance,
                        )
                    )
    return Dataset(tuple(samples))
