"""Dense-tensor helpers: softmax, pooling and seeded randomness.

Tensors are plain ``numpy`` arrays. Features are stored as float32 in
(channel, temporal, width, height) order; verification code may pass
float64 arrays and gets float64 back.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, ShapeError

FEATURE_DTYPE = np.float32


def softmax(logits, axis: int = -1) -> np.ndarray:
    """Numerically stable softmax along ``axis``.

    Accepts a single logit vector or a batch. Float inputs keep their
    precision; integer inputs are promoted to float64.
    """
    z = np.asarray(logits)
    if not np.issubdtype(z.dtype, np.floating):
        z = z.astype(np.float64)
    if z.size == 0 or z.shape[axis] < 1:
        raise InvalidInputError("softmax needs at least one logit")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("softmax received non-finite logits")
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def global_average_pool(feature) -> np.ndarray:
    """Mean over the temporal and spatial axes of a C x T x W x H tensor."""
    x = np.asarray(feature)
    if x.ndim != 4:
        raise ShapeError(f"expected a rank-4 C x T x W x H tensor, got shape {x.shape}")
    return x.mean(axis=(1, 2, 3))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed`` and optional stream ids.

    Philox output depends only on the key, so a given ``(seed, *stream)``
    yields the same draws on every platform.
    """
    if seed < 0:
        raise InvalidInputError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence([int(seed), *map(int, stream)])
    return np.random.Generator(np.random.Philox(ss))


def rng_normal(rng: np.random.Generator, n: int, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
    if std < 0:
        raise InvalidInputError(f"std must be >= 0, got {std}")
    if n < 0:
        raise InvalidInputError(f"count must be >= 0, got {n}")
    return rng.normal(mean, std, size=n)
