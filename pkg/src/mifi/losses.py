"""Classification losses on softmax outputs and their logit gradients.

Every loss here is a function of the target-class probability ``p_t``
only. For such a loss ``L(p_t)`` the gradient with respect to the logits
is ``s(p_t) * (onehot - p)`` where ``s = p_t * dL/dp_t``, so each kind
just supplies its value and its ``s``.

Probabilities are clamped to ``[EPS, 1 - EPS]`` before any logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InvalidInputError, NumericError
from .numerics import softmax

EPS = 1e-7


@dataclass(frozen=True)
class CaslConfig:
    beta: float = 4.0
    gamma: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 4.0
    total_epochs: int = 100

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise InvalidInputError(f"beta must be positive, got {self.beta}")
        for name in ("gamma", "lambda1", "lambda2"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidInputError(f"{name} must be finite and >= 0, got {v}")
        if int(self.total_epochs) != self.total_epochs or self.total_epochs < 1:
            raise InvalidInputError(f"total_epochs must be a positive integer, got {self.total_epochs}")


@dataclass(frozen=True)
class LossValue:
    value: float
    grad_logits: np.ndarray


def _check_prob(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.result_type(np.asarray(p).dtype, np.float32))
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise InvalidInputError("probability must lie in [0, 1]")
    return np.clip(p, EPS, 1 - EPS)


def casl_alpha(epoch: int, config: CaslConfig) -> float:
    """Cyclical weight between the easy-sample and hard-sample terms.

    Falls linearly from 1 at epoch 0 to 0 at ``total_epochs / beta``,
    then rises back to 1 at ``total_epochs``.
    """
    et = config.total_epochs
    if not 0 <= epoch <= et:
        raise InvalidInputError(f"epoch {epoch} outside [0, {et}]")
    # one rounding per branch keeps grid points such as 1/3 exact
    scaled = config.beta * epoch
    if scaled <= et:
        alpha = (et - scaled) / et
    else:
        alpha = (scaled - et) / (et * (config.beta - 1.0))
    return min(1.0, max(0.0, alpha))


def _check_exponents(**exponents) -> None:
    for name, value in exponents.items():
        if not value >= 0:
            raise InvalidInputError(f"{name} must be >= 0, got {value}")


def casl_le(p, gamma: float):
    """``-(1 + p)**gamma * log(p)``; plain ``-log(p)`` when gamma is 0."""
    _check_exponents(gamma=gamma)
    p = _check_prob(p)
    return -((1 + p) ** gamma) * np.log(p)


def casl_lh(p, lambda1: float, lambda2: float):
    """``-(1 - p)**lambda1 * log(p) - p**lambda2 * log(1 - p)``."""
    _check_exponents(lambda1=lambda1, lambda2=lambda2)
    p = _check_prob(p)
    return -((1 - p) ** lambda1) * np.log(p) - p**lambda2 * np.log1p(-p)


def _le_scale(p, gamma):
    # p * d/dp of casl_le
    lead = 0.0 if gamma == 0 else -gamma * p * (1 + p) ** (gamma - 1) * np.log(p)
    return lead - (1 + p) ** gamma


def _focal_scale(p, lam):
    # p * d/dp of -(1 - p)**lam * log(p)
    lead = 0.0 if lam == 0 else lam * p * (1 - p) ** (lam - 1) * np.log(p)
    return lead - (1 - p) ** lam


def _lh_scale(p, lambda1, lambda2):
    # p * d/dp of casl_lh
    second = p ** (lambda2 + 1) / (1 - p)
    if lambda2 != 0:
        second = second - lambda2 * p**lambda2 * np.log1p(-p)
    return _focal_scale(p, lambda1) + second


@dataclass(frozen=True)
class CrossEntropy:
    name = "ce"

    def value(self, p, epoch=None):
        return -np.log(p)

    def scale(self, p, epoch=None):
        return -np.ones_like(p)


@dataclass(frozen=True)
class FocalLoss:
    gamma: float = 2.0
    name = "fl"

    def value(self, p, epoch=None):
        return -((1 - p) ** self.gamma) * np.log(p)

    def scale(self, p, epoch=None):
        return _focal_scale(p, self.gamma)


@dataclass(frozen=True)
class AsymmetricLoss:
    lambda1: float = 1.0
    lambda2: float = 4.0
    name = "asl"

    def value(self, p, epoch=None):
        return -((1 - p) ** self.lambda1) * np.log(p) - p**self.lambda2 * np.log1p(-p)

    def scale(self, p, epoch=None):
        return _lh_scale(p, self.lambda1, self.lambda2)


@dataclass(frozen=True)
class CyclicalFocalLoss:
    config: CaslConfig = field(default_factory=CaslConfig)
    name = "casl"

    def alpha(self, epoch) -> float:
        if epoch is None:
            raise InvalidInputError("the cyclical focal loss needs the current epoch")
        return casl_alpha(epoch, self.config)

    def value(self, p, epoch=None):
        a = self.alpha(epoch)
        c = self.config
        le = -((1 + p) ** c.gamma) * np.log(p)
        lh = -((1 - p) ** c.lambda1) * np.log(p) - p**c.lambda2 * np.log1p(-p)
        return a * le + (1 - a) * lh

    def scale(self, p, epoch=None):
        a = self.alpha(epoch)
        c = self.config
        return a * _le_scale(p, c.gamma) + (1 - a) * _lh_scale(p, c.lambda1, c.lambda2)


LossKind = Union[CrossEntropy, FocalLoss, AsymmetricLoss, CyclicalFocalLoss]
LOSS_NAMES = ("ce", "fl", "asl", "casl")


def make_loss(
    name: str,
    *,
    beta: float = 4.0,
    gamma: float = 0.0,
    lambda1: float = 0.0,
    lambda2: float = 4.0,
    total_epochs: int = 100,
    gamma_fl: float = 2.0,
    asl_lambda1: float = 1.0,
    asl_lambda2: float = 4.0,
) -> LossKind:
    """Build a loss from its config name and the flat hyperparameter keys."""
    name = str(name).lower()
    if name == "ce":
        return CrossEntropy()
    if name == "fl":
        return FocalLoss(gamma_fl)
    if name == "asl":
        return AsymmetricLoss(asl_lambda1, asl_lambda2)
    if name == "casl":
        return CyclicalFocalLoss(CaslConfig(beta, gamma, lambda1, lambda2, total_epochs))
    raise InvalidInputError(f"unknown loss {name!r}; choose one of {', '.join(LOSS_NAMES)}")


def _targets(targets, n_classes: int) -> np.ndarray:
    t = np.asarray(targets)
    if not np.issubdtype(t.dtype, np.integer):
        raise InvalidInputError("targets must be integer class indices")
    if np.any(t < 0) or np.any(t >= n_classes):
        raise InvalidInputError(f"target outside [0, {n_classes})")
    return t


def batch_loss(kind: LossKind, probs, targets, epoch=None) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample loss values and logit gradients for a batch.

    ``probs`` is N x n (softmax output), ``targets`` has length N. Returns
    ``(values, grads)`` with shapes (N,) and (N, n); the gradient of the
    batch mean is ``grads / N``.
    """
    probs = np.atleast_2d(probs)
    n = probs.shape[1]
    t = _targets(np.atleast_1d(targets), n)
    rows = np.arange(probs.shape[0])
    pt = np.clip(probs[rows, t], EPS, 1 - EPS)
    values = kind.value(pt, epoch)
    s = kind.scale(pt, epoch)
    grads = -s[:, None] * probs
    grads[rows, t] += s
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(grads))):
        raise NumericError(f"non-finite {kind.name} loss")
    return values, grads


def _single(kind: LossKind, probs, target, epoch) -> LossValue:
    probs = np.asarray(probs)
    if probs.ndim != 1:
        raise InvalidInputError("expected a single probability vector")
    if abs(float(probs.sum()) - 1.0) > 1e-5:
        raise InvalidInputError("probabilities must sum to 1")
    values, grads = batch_loss(kind, probs[None, :], [target], epoch)
    return LossValue(float(values[0]), grads[0])


def cross_entropy(probs, target: int) -> LossValue:
    return _single(CrossEntropy(), probs, target, None)


def focal_loss(probs, target: int, gamma_fl: float = 2.0) -> LossValue:
    return _single(FocalLoss(gamma_fl), probs, target, None)


def asymmetric_loss(probs, target: int, lambda1p: float = 1.0, lambda2p: float = 4.0) -> LossValue:
    return _single(AsymmetricLoss(lambda1p, lambda2p), probs, target, None)


def casl_loss(probs, target: int, epoch: int, config: CaslConfig = CaslConfig()) -> LossValue:
    return _single(CyclicalFocalLoss(config), probs, target, epoch)


def loss_value_from_logits(kind: LossKind, logits, target: int, epoch=None) -> float:
    probs = softmax(logits)
    values, _ = batch_loss(kind, probs[None, :], [target], epoch)
    return float(values[0])


def loss_grad_wrt_logits(kind: LossKind, logits, target: int, epoch=None) -> np.ndarray:
    probs = softmax(logits)
    _, grads = batch_loss(kind, probs[None, :], [target], epoch)
    return grads[0]


def central_difference(f, x: np.ndarray, h: float) -> np.ndarray:
    """Coordinate-wise central differences of scalar ``f`` at ``x`` (float64)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step.flat[i] = h
        out.flat[i] = (f(x + step) - f(x - step)) / (2 * h)
    return out


def relative_error(analytic, numeric) -> float:
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))))


def finite_diff_check(kind: LossKind, logits, target: int, epoch=None, h: float = 1e-3, dtype=np.float64) -> float:
    """Max relative error between the analytic logit gradient and central differences.

    The reference differences are always taken in float64; ``dtype``
    selects the precision of the analytic side.
    """
    if h <= 0:
        raise InvalidInputError(f"step must be positive, got {h}")
    z = np.asarray(logits, dtype=np.float64)
    analytic = loss_grad_wrt_logits(kind, z.astype(dtype), target, epoch)
    numeric = central_difference(lambda x: loss_value_from_logits(kind, x, target, epoch), z, h)
    return relative_error(analytic, numeric)
