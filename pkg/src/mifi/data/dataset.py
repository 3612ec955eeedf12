"""In-memory multi-view datasets and their on-disk manifest layout.

A dataset directory holds ``manifest.json`` plus one feature container per
view per clip. The manifest is a JSON array of
``{"id", "label", "driver", "views": {"cam1": path, "cam2": path}}``
records with paths relative to the directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DataError, InvalidInputError, ShapeError
from .container import load_features, save_features

VIEW_IDS = (1, 2)


@dataclass(frozen=True)
class Sample:
    id: str
    label: int
    driver_id: int
    views: dict
    split: str | None = None


@dataclass
class Dataset:
    ids: list
    labels: np.ndarray
    drivers: np.ndarray
    views: dict  # camera id -> N x C x T x W x H float32 array
    n_classes: int = 16
    splits: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.drivers = np.asarray(self.drivers, dtype=np.int64)
        n = len(self.ids)
        if self.labels.shape != (n,) or self.drivers.shape != (n,):
            raise ShapeError("ids, labels and drivers must have equal length")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise InvalidInputError(f"labels must lie in [0, {self.n_classes})")
        shapes = {v: a.shape for v, a in self.views.items()}
        if len(set(shapes.values())) > 1:
            raise ShapeError(f"views have different shapes: {shapes}")
        for a in self.views.values():
            if a.ndim != 5 or a.shape[0] != n:
                raise ShapeError(f"view array must be N x C x T x W x H with N={n}, got {a.shape}")

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, i: int) -> Sample:
        split = None if self.splits is None else self.splits[i]
        return Sample(self.ids[i], int(self.labels[i]), int(self.drivers[i]), {v: a[i] for v, a in self.views.items()}, split)

    @property
    def clip_shape(self) -> tuple:
        return next(iter(self.views.values())).shape[1:]

    @property
    def view_ids(self) -> tuple:
        return tuple(sorted(self.views))

    def with_splits(self, splits) -> "Dataset":
        return replace(self, splits=np.asarray(splits, dtype=object))

    def indices(self, split: str | None) -> np.ndarray:
        if split is None:
            return np.arange(len(self))
        if self.splits is None:
            raise InvalidInputError("dataset has no split assignment")
        return np.flatnonzero(self.splits == split)


def _clip_name(sample_id: str, view: int) -> str:
    return os.path.join("clips", f"{sample_id}_cam{view}.mifi")


def save_dataset(dataset: Dataset, directory) -> str:
    os.makedirs(os.path.join(directory, "clips"), exist_ok=True)
    records = []
    for i, sid in enumerate(dataset.ids):
        paths = {}
        for v in dataset.view_ids:
            rel = _clip_name(sid, v)
            save_features(dataset.views[v][i], os.path.join(directory, rel))
            paths[f"cam{v}"] = rel.replace(os.sep, "/")
        records.append({"id": sid, "label": int(dataset.labels[i]), "driver": int(dataset.drivers[i]), "views": paths})
    path = os.path.join(directory, "manifest.json")
    with open(path, "w") as fh:
        json.dump(records, fh, indent=1)
        fh.write("\n")
    return path


def load_dataset(directory, n_classes: int = 16) -> Dataset:
    path = os.path.join(directory, "manifest.json")
    if not os.path.exists(path):
        raise FileNotFoundError(f"no manifest.json in {directory}")
    with open(path) as fh:
        try:
            records = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(records, list) or not records:
        raise DataError(f"{path}: manifest must be a non-empty JSON array")
    view_keys = sorted(records[0].get("views", {}))
    views = {int(k[3:]): [] for k in view_keys}
    ids, labels, drivers = [], [], []
    for rec in records:
        try:
            ids.append(str(rec["id"]))
            labels.append(int(rec["label"]))
            drivers.append(int(rec["driver"]))
            for k in view_keys:
                views[int(k[3:])].append(load_features(os.path.join(directory, rec["views"][k])))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: bad record {rec!r}") from exc
    try:
        arrays = {v: np.stack(clips) for v, clips in views.items()}
    except ValueError as exc:
        raise ShapeError(f"{path}: clips have inconsistent shapes") from exc
    return Dataset(ids, np.array(labels), np.array(drivers), arrays, n_classes)
