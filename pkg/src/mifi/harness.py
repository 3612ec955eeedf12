"""Training and evaluation of the classifier head on fused features.

Backbone features are fixed inputs, so each sample's pooled (fused)
feature is computed once and the head is trained on those vectors with
mini-batch SGD.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass

import numpy as np

from .data.dataset import Dataset
from .errors import InvalidInputError, NumericError, ShapeError
from .fusion import FusionMode, fuse
from .head import HeadParams, SgdConfig, init_head, logits_from_pooled, lr_at, mean_loss_and_grads, sgd_step
from .losses import CyclicalFocalLoss, LossKind
from .numerics import global_average_pool, make_rng, softmax

log = logging.getLogger(__name__)

_SHUFFLE = 21


def pooled_features(dataset: Dataset, mode=None, view: int | None = None, indices=None) -> np.ndarray:
    """Pooled head inputs, one row per sample.

    With ``view`` set, only that camera's clip is pooled; otherwise the
    cameras are fused with ``mode`` (in camera-id order) and the fused
    tensor is pooled.
    """
    idx = np.arange(len(dataset)) if indices is None else np.asarray(indices)
    if view is not None:
        if view not in dataset.views:
            raise InvalidInputError(f"dataset has no camera {view}")
        clips = dataset.views[view]
        rows = [global_average_pool(clips[i]) for i in idx]
    else:
        mode = FusionMode.parse(mode)
        cams = dataset.view_ids
        rows = [global_average_pool(fuse([dataset.views[v][i] for v in cams], mode).tensor) for i in idx]
    if not rows:
        return np.zeros((0, _feature_dim(dataset, mode, view)), dtype=np.float32)
    return np.stack(rows).astype(np.float32)


def _feature_dim(dataset: Dataset, mode, view) -> int:
    C = dataset.clip_shape[0]
    if view is None and FusionMode.parse(mode) is FusionMode.CHANNEL_CONCAT:
        return C * len(dataset.views)
    return C


def predict(params: HeadParams, pooled) -> np.ndarray:
    """Arg-max class per row; ties go to the lowest class index."""
    logits = logits_from_pooled(pooled, params)
    return np.argmax(softmax(logits), axis=-1)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    alpha: float | None
    lr: float
    train_loss: float
    train_accuracy: float
    val_accuracy: float | None


@dataclass
class TrainHistory:
    records: list

    @property
    def alphas(self) -> list:
        return [r.alpha for r in self.records]

    @property
    def best_epoch(self) -> int | None:
        best = None
        for r in self.records:
            if r.val_accuracy is not None and (best is None or r.val_accuracy >= best.val_accuracy):
                best = r
        return None if best is None else best.epoch

    @property
    def best_val_accuracy(self) -> float | None:
        e = self.best_epoch
        return None if e is None else self.records[e].val_accuracy

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "alpha", "lr", "train_loss", "train_accuracy", "val_accuracy"])
            for r in self.records:
                w.writerow([r.epoch, _fmt(r.alpha), _fmt(r.lr), _fmt(r.train_loss), _fmt(r.train_accuracy), _fmt(r.val_accuracy)])


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def train(
    dataset: Dataset,
    fusion_mode,
    loss_kind: LossKind,
    sgd_config: SgdConfig = SgdConfig(),
    seed: int = 0,
    view: int | None = None,
) -> tuple[HeadParams, TrainHistory]:
    """Fit a head on the train split and keep the best-validation parameters.

    ``view`` trains a single-camera head instead of a fused one. Without a
    validation split the final parameters are returned.
    """
    train_idx = dataset.indices("train")
    val_idx = dataset.indices("val")
    if len(train_idx) == 0:
        raise InvalidInputError("train split is empty")
    if isinstance(loss_kind, CyclicalFocalLoss) and sgd_config.epochs - 1 > loss_kind.config.total_epochs:
        raise InvalidInputError(
            f"training for {sgd_config.epochs} epochs runs past the loss schedule's {loss_kind.config.total_epochs}"
        )
    x_train = pooled_features(dataset, fusion_mode, view, train_idx)
    y_train = dataset.labels[train_idx]
    x_val = pooled_features(dataset, fusion_mode, view, val_idx)
    y_val = dataset.labels[val_idx]

    params = init_head(x_train.shape[1], dataset.n_classes, seed)
    best = params.copy()
    best_val = -1.0
    shuffle = make_rng(seed, _SHUFFLE)
    records = []
    n = len(train_idx)
    bs = sgd_config.batch_size
    for epoch in range(sgd_config.epochs):
        alpha = loss_kind.alpha(epoch) if isinstance(loss_kind, CyclicalFocalLoss) else None
        lr = lr_at(epoch, sgd_config)
        order = shuffle.permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, bs)):
            batch = order[start : start + bs]
            try:
                loss, gw, gb = mean_loss_and_grads(loss_kind, x_train[batch], y_train[batch], params, epoch)
            except NumericError as exc:
                raise NumericError(f"epoch {epoch}, batch {b}: {exc}") from exc
            if not np.isfinite(loss):
                raise NumericError(f"epoch {epoch}, batch {b}: non-finite loss")
            total += loss * len(batch)
            params = sgd_step(params, (gw, gb), lr)
        train_acc = float(np.mean(predict(params, x_train) == y_train))
        val_acc = float(np.mean(predict(params, x_val) == y_val)) if len(val_idx) else None
        records.append(EpochRecord(epoch, alpha, lr, total / n, train_acc, val_acc))
        if val_acc is not None and val_acc >= best_val:
            best_val = val_acc
            best = params.copy()
        log.debug("epoch %d lr %.4g loss %.4f train %.3f val %s", epoch, lr, total / n, train_acc, val_acc)
    return (best if len(val_idx) else params), TrainHistory(records)


@dataclass
class Metrics:
    accuracy: float
    macro_f1: float
    per_class_precision: np.ndarray
    per_class_recall: np.ndarray
    per_class_f1: np.ndarray
    confusion: np.ndarray

    def to_dict(self) -> dict:
        return {
            "accuracy": float(self.accuracy),
            "macro_f1": float(self.macro_f1),
            "per_class_precision": [float(x) for x in self.per_class_precision],
            "per_class_recall": [float(x) for x in self.per_class_recall],
            "per_class_f1": [float(x) for x in self.per_class_f1],
            "confusion": self.confusion.astype(int).tolist(),
        }


def metrics_from_predictions(y_true, y_pred, n_classes: int) -> Metrics:
    """Accuracy, macro-F1 and per-class scores; empty classes score 0."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) == 0:
        raise InvalidInputError("cannot score an empty split")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    return metrics_from_confusion(confusion)


def metrics_from_confusion(confusion) -> Metrics:
    cm = np.asarray(confusion, dtype=np.int64)
    tp = np.diag(cm).astype(np.float64)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return Metrics(float(tp.sum() / cm.sum()), float(f1.mean()), precision, recall, f1, cm)


def evaluate(head: HeadParams, dataset: Dataset, split: str | None, fusion_mode) -> Metrics:
    idx = dataset.indices(split)
    if len(idx) == 0:
        raise InvalidInputError(f"split {split!r} is empty")
    x = pooled_features(dataset, fusion_mode, None, idx)
    return metrics_from_predictions(dataset.labels[idx], predict(head, x), dataset.n_classes)


def single_view_evaluate(head_v: HeadParams, dataset: Dataset, view_id: int, split: str | None = "test") -> Metrics:
    idx = dataset.indices(split)
    if len(idx) == 0:
        raise InvalidInputError(f"split {split!r} is empty")
    x = pooled_features(dataset, None, view_id, idx)
    return metrics_from_predictions(dataset.labels[idx], predict(head_v, x), dataset.n_classes)


def vote_predict(probs_v1, probs_v2) -> int:
    """Class holding the single highest probability across both cameras.

    Equal maxima resolve to the lower class index, then to camera 1.
    """
    p1 = np.asarray(probs_v1)
    p2 = np.asarray(probs_v2)
    if p1.shape != p2.shape or p1.ndim != 1:
        raise ShapeError(f"cannot vote between shapes {p1.shape} and {p2.shape}")
    top = max(p1.max(), p2.max())
    return int(np.flatnonzero((p1 == top) | (p2 == top))[0])


def voting_evaluate(head_v1: HeadParams, head_v2: HeadParams, dataset: Dataset, split: str | None = "test") -> Metrics:
    idx = dataset.indices(split)
    if len(idx) == 0:
        raise InvalidInputError(f"split {split!r} is empty")
    p1 = softmax(logits_from_pooled(pooled_features(dataset, None, 1, idx), head_v1))
    p2 = softmax(logits_from_pooled(pooled_features(dataset, None, 2, idx), head_v2))
    pred = np.array([vote_predict(a, b) for a, b in zip(p1, p2)])
    return metrics_from_predictions(dataset.labels[idx], pred, dataset.n_classes)


def dump_embeddings(head: HeadParams, dataset: Dataset, split: str | None, path, fusion_mode=None, view: int | None = None) -> int:
    """Write ``id,label,f0..f{D-1}`` rows of pooled head inputs; returns the row count."""
    idx = dataset.indices(split)
    if len(idx) == 0:
        raise InvalidInputError(f"split {split!r} is empty")
    x = pooled_features(dataset, fusion_mode, view, idx)
    if x.shape[1] != head.in_features:
        raise ShapeError(f"pooled length {x.shape[1]} does not match head input {head.in_features}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"] + [f"f{j}" for j in range(x.shape[1])])
        for i, row in zip(idx, x):
            w.writerow([dataset.ids[i], int(dataset.labels[i])] + [f"{v:.9g}" for v in row])
    return len(idx)


def write_metrics(metrics: Metrics, directory, extra: dict | None = None) -> None:
    """``metrics.json`` (sorted keys, no timestamps) and ``confusion.csv``."""
    os.makedirs(directory, exist_ok=True)
    payload = metrics.to_dict()
    if extra:
        payload.update(extra)
    with open(os.path.join(directory, "metrics.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    n = metrics.confusion.shape[0]
    with open(os.path.join(directory, "confusion.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(range(n)))
        w.writerows(metrics.confusion.astype(int).tolist())


def history_dicts(history: TrainHistory) -> list:
    return [asdict(r) for r in history.records]
