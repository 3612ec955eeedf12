from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError


def frame_difference_totals(frames, axis: int = 1) -> np.ndarray:
    """Sum over all other frames of the L1 distance to each frame."""
    x = np.moveaxis(np.asarray(frames, dtype=np.float64), axis, 0)
    flat = x.reshape(x.shape[0], -1)
    totals = np.zeros(flat.shape[0])
    for i in range(flat.shape[0]):
        totals[i] = np.abs(flat - flat[i]).sum()
    return totals


def keyframe_select(frames, n: int, axis: int = 1) -> np.ndarray:
    """Keep the ``n`` frames that differ most from the rest, in original order.

    ``axis`` is the temporal axis (1 for C x T x W x H clips). Frames are
    ranked by their total L1 difference to every other frame; equal totals
    prefer the earlier frame.
    """
    x = np.asarray(frames)
    if x.ndim == 0:
        raise InvalidInputError("keyframe selection needs a temporal axis")
    T = x.shape[axis]
    if not 1 <= n <= T:
        raise InvalidInputError(f"cannot keep {n} of {T} frames")
    totals = frame_difference_totals(x, axis)
    order = np.lexsort((np.arange(T), -totals))
    keep = np.sort(order[:n])
    return np.take(x, keep, axis=axis)
