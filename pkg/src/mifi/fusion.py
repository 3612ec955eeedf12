"""Feature-level fusion of two (or more) camera views.

All operators take per-view C x T x W x H feature clips. Views are always
combined in camera-id order: camera 1 first, then camera 2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import InvalidInputError, ShapeError


class FusionMode(enum.Enum):
    SUM = "sum"
    CHANNEL_CONCAT = "concat-c"
    TEMPORAL_CONCAT = "concat-t"
    EARLY_TEMPORAL = "early"

    @classmethod
    def parse(cls, value) -> "FusionMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise InvalidInputError(f"unknown fusion mode {value!r}; choose one of {choices}") from None


@dataclass(frozen=True)
class FusedFeature:
    tensor: np.ndarray
    mode: FusionMode
    source_shapes: tuple[tuple[int, ...], ...]


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 4 or b.ndim != 4:
        raise ShapeError(f"fusion expects rank-4 tensors, got shapes {a.shape} and {b.shape}")
    if a.shape != b.shape:
        raise ShapeError(f"view shapes differ: {a.shape} vs {b.shape}")
    return a, b


def fuse_sum(a, b) -> FusedFeature:
    a, b = _check_pair(a, b)
    return FusedFeature(a + b, FusionMode.SUM, (a.shape, b.shape))


def fuse_channel_concat(a, b) -> FusedFeature:
    a, b = _check_pair(a, b)
    return FusedFeature(np.concatenate([a, b], axis=0), FusionMode.CHANNEL_CONCAT, (a.shape, b.shape))


def fuse_temporal_concat(a, b) -> FusedFeature:
    a, b = _check_pair(a, b)
    return FusedFeature(np.concatenate([a, b], axis=1), FusionMode.TEMPORAL_CONCAT, (a.shape, b.shape))


def fuse_early(a_frames, b_frames) -> np.ndarray:
    """Temporal concatenation of raw input cubes, before any feature mapping."""
    a, b = _check_pair(a_frames, b_frames)
    return np.concatenate([a, b], axis=1)


_AXIS = {FusionMode.CHANNEL_CONCAT: 0, FusionMode.TEMPORAL_CONCAT: 1, FusionMode.EARLY_TEMPORAL: 1}


def fuse(views, mode) -> FusedFeature:
    """Fuse an ordered sequence of view clips with ``mode``.

    More than two views fold left in the given order, which for these
    operators is the same as summing or concatenating them all at once.
    """
    mode = FusionMode.parse(mode)
    views = [np.asarray(v) for v in views]
    if len(views) < 2:
        raise InvalidInputError("fusion needs at least two views")
    for v in views[1:]:
        _check_pair(views[0], v)
    if mode is FusionMode.SUM:
        tensor = reduce(np.add, views)
    else:
        tensor = np.concatenate(views, axis=_AXIS[mode])
    return FusedFeature(tensor, mode, tuple(v.shape for v in views))


def fused_dim(mode, channels: int, n_views: int = 2) -> int:
    """Pooled feature length the classifier head sees for ``mode``."""
    mode = FusionMode.parse(mode)
    if mode is FusionMode.CHANNEL_CONCAT:
        return n_views * channels
    return channels
