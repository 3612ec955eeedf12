"""Keep the frames that differ most from the rest of the clip.

A mostly static clip with two bursts of motion: the selector keeps the
burst frames and drops the near-duplicates, preserving temporal order.

Run: python3 demos/keyframes.py
"""

import numpy as np

from mifi.data import keyframe_select
from mifi.data.keyframes import frame_difference_totals

rng = np.random.default_rng(0)
clip = np.repeat(rng.normal(size=(8, 1, 4, 4)), 10, axis=1)  # C x T x W x H, static
clip[:, 3] += 3.0
clip[:, 7] -= 2.0
clip += rng.normal(scale=0.05, size=clip.shape)

totals = frame_difference_totals(clip)
print("difference totals:", np.round(totals, 1))
kept = keyframe_select(clip, 3)
idx = [int(np.flatnonzero([np.array_equal(kept[:, k], clip[:, t]) for t in range(clip.shape[1])])[0]) for k in range(3)]
print("kept frames:", idx)
