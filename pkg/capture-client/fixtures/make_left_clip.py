"""Regenerate left-raised.jsonl, the recorded-clip fixture for client tests.

The clip imitates what a pose extractor emits while someone holds a raised
left arm at one meter: one JSON value per line, either a 33x4 landmark array
or null for a frame where detection found nobody.  Frames are the left-arm
archetype from the posegest synth module plus mild per-frame jitter, so a
model trained on the synthetic dataset recognizes them as "left" with room
to spare.

Run from this directory with the posegest package installed:

    python3 make_left_clip.py
"""

import json
import pathlib

import numpy as np

from posegest.core import GestureClass
from posegest.synth import archetype_frame

FRAMES = 24
NO_POSE_AT = {5, 13}  # detector dropouts sprinkled mid-clip
JITTER_STD = 0.01
SEED = 214

out = pathlib.Path(__file__).with_name("left-raised.jsonl")
rng = np.random.default_rng(SEED)
base = archetype_frame(GestureClass.LEFT).points

lines = []
for i in range(FRAMES):
    if i in NO_POSE_AT:
        lines.append("null")
        continue
    pts = base.copy()
    pts[:, :3] += rng.normal(0.0, JITTER_STD, (33, 3))
    lines.append(json.dumps([[float(v) for v in row] for row in pts]))

out.write_text("\n".join(lines) + "\n")
print(f"wrote {out} ({FRAMES} frames, {len(NO_POSE_AT)} without a pose)")
