"""Pooled-linear classifier head and its plain SGD update.

The head sees the global-average-pooled fused feature (length D) and maps
it to class logits with one affine layer. Backbone features are frozen,
so these are the only trained parameters.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericError, ShapeError
from .data.container import load_features, save_features
from .fusion import FusedFeature
from .losses import LossKind, batch_loss, central_difference, relative_error
from .numerics import FEATURE_DTYPE, global_average_pool, make_rng, softmax

N_CLASSES = 16


@dataclass
class HeadParams:
    weight: np.ndarray  # n_classes x D
    bias: np.ndarray  # n_classes

    def __post_init__(self):
        self.weight = np.asarray(self.weight)
        self.bias = np.asarray(self.bias)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(f"inconsistent head shapes {self.weight.shape} and {self.bias.shape}")

    @property
    def n_classes(self) -> int:
        return self.weight.shape[0]

    @property
    def in_features(self) -> int:
        return self.weight.shape[1]

    @property
    def n_parameters(self) -> int:
        return self.weight.size + self.bias.size

    def copy(self) -> "HeadParams":
        return HeadParams(self.weight.copy(), self.bias.copy())


def init_head(in_features: int, n_classes: int = N_CLASSES, seed: int = 0, std: float = 0.01) -> HeadParams:
    """Weights ~ N(0, std), zero bias, drawn from a dedicated seeded stream."""
    if in_features < 1 or n_classes < 2:
        raise InvalidInputError("head needs at least one input feature and two classes")
    rng = make_rng(seed, 0x4EAD)
    w = rng.normal(0.0, std, size=(n_classes, in_features)).astype(FEATURE_DTYPE)
    return HeadParams(w, np.zeros(n_classes, dtype=FEATURE_DTYPE))


@dataclass(frozen=True)
class SgdConfig:
    lr0: float = 0.1
    decay_epochs: tuple[int, ...] = (30, 50)
    decay_factor: float = 0.1
    epochs: int = 100
    batch_size: int = 32

    def __post_init__(self):
        object.__setattr__(self, "decay_epochs", tuple(int(e) for e in self.decay_epochs))
        if self.lr0 <= 0:
            raise InvalidInputError(f"learning rate must be positive, got {self.lr0}")
        if not 0 < self.decay_factor < 1:
            raise InvalidInputError(f"decay factor must be in (0, 1), got {self.decay_factor}")
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidInputError("epochs and batch size must be positive")
        d = self.decay_epochs
        if any(b <= a for a, b in zip(d, d[1:])) or any(e < 0 or e >= self.epochs for e in d):
            raise InvalidInputError(f"decay epochs {list(d)} must be strictly increasing and < {self.epochs}")


def lr_at(epoch: int, config: SgdConfig) -> float:
    if not 0 <= epoch < config.epochs:
        raise InvalidInputError(f"epoch {epoch} outside [0, {config.epochs})")
    passed = sum(1 for d in config.decay_epochs if epoch >= d)
    return config.lr0 * config.decay_factor**passed


def logits_from_pooled(pooled, params: HeadParams) -> np.ndarray:
    pooled = np.asarray(pooled)
    if pooled.shape[-1] != params.in_features:
        raise ShapeError(f"pooled length {pooled.shape[-1]} does not match head input {params.in_features}")
    return pooled @ params.weight.T + params.bias


def head_forward(fused, params: HeadParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(logits, probs, pooled)`` for one fused clip."""
    tensor = fused.tensor if isinstance(fused, FusedFeature) else fused
    pooled = global_average_pool(tensor)
    logits = logits_from_pooled(pooled, params)
    return logits, softmax(logits), pooled


def head_backward(pooled, grad_logits) -> tuple[np.ndarray, np.ndarray]:
    """Parameter gradients for a single pooled vector or a batch (summed over rows)."""
    pooled = np.asarray(pooled)
    grad_logits = np.asarray(grad_logits)
    if pooled.ndim != grad_logits.ndim or pooled.shape[:-1] != grad_logits.shape[:-1]:
        raise ShapeError(f"cannot pair pooled {pooled.shape} with logit gradient {grad_logits.shape}")
    if pooled.ndim == 1:
        return np.outer(grad_logits, pooled), grad_logits.copy()
    return grad_logits.T @ pooled, grad_logits.sum(axis=0)


def sgd_step(params: HeadParams, grads: tuple[np.ndarray, np.ndarray], lr: float) -> HeadParams:
    if lr <= 0:
        raise InvalidInputError(f"learning rate must be positive, got {lr}")
    gw, gb = (np.asarray(g) for g in grads)
    if gw.shape != params.weight.shape or gb.shape != params.bias.shape:
        raise ShapeError("gradient shapes do not match parameters")
    if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
        raise NumericError("refusing an update with non-finite gradients")
    dtype = params.weight.dtype
    return HeadParams((params.weight - lr * gw).astype(dtype), (params.bias - lr * gb).astype(params.bias.dtype))


def mean_loss_and_grads(kind: LossKind, pooled, targets, params: HeadParams, epoch=None):
    """Batch-mean loss and its gradients w.r.t. weight and bias."""
    logits = logits_from_pooled(pooled, params)
    probs = softmax(logits.astype(np.float64))
    values, g = batch_loss(kind, probs, targets, epoch)
    n = len(values)
    gw, gb = head_backward(np.asarray(pooled, dtype=np.float64), g / n)
    return float(values.mean()), gw, gb


def head_finite_diff_check(kind: LossKind, features, targets, params: HeadParams, epoch=None, h: float = 1e-3) -> float:
    """Max relative error of the full pipeline gradient (pool -> linear -> softmax -> loss).

    ``features`` is a batch of C x T x W x H tensors; every weight and bias
    entry is perturbed in float64.
    """
    feats = np.asarray(features, dtype=np.float64)
    pooled = np.stack([global_average_pool(f) for f in feats])
    w0 = np.asarray(params.weight, dtype=np.float64)
    b0 = np.asarray(params.bias, dtype=np.float64)
    _, gw, gb = mean_loss_and_grads(kind, pooled, targets, HeadParams(w0, b0), epoch)

    def loss_at(w, b):
        logits = pooled @ w.T + b
        values, _ = batch_loss(kind, softmax(logits), targets, epoch)
        return float(values.mean())

    num_w = central_difference(lambda w: loss_at(w.reshape(w0.shape), b0), w0.ravel(), h).reshape(w0.shape)
    num_b = central_difference(lambda b: loss_at(w0, b), b0, h)
    return max(relative_error(gw, num_w), relative_error(gb, num_b))


def save_head(params: HeadParams, directory, meta: dict | None = None) -> None:
    """Weight and bias as feature containers plus a ``head.json`` sidecar."""
    os.makedirs(directory, exist_ok=True)
    save_features(params.weight, os.path.join(directory, "weight.mifi"))
    save_features(params.bias, os.path.join(directory, "bias.mifi"))
    info = {"n_classes": params.n_classes, "in_features": params.in_features, "n_parameters": params.n_parameters}
    info.update(meta or {})
    with open(os.path.join(directory, "head.json"), "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_head(directory) -> tuple[HeadParams, dict]:
    meta_path = os.path.join(directory, "head.json")
    if not os.path.exists(meta_path):
        raise FileNotFoundError(f"no trained head in {directory}")
    with open(meta_path) as fh:
        meta = json.load(fh)
    params = HeadParams(load_features(os.path.join(directory, "weight.mifi")), load_features(os.path.join(directory, "bias.mifi")))
    return params, meta
