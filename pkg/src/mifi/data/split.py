from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..numerics import make_rng

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class SplitSpec:
    n_train_drivers: int = 35
    n_val_drivers: int = 5
    n_test_drivers: int = 10
    seed: int = 0


def split_by_driver(dataset, spec: SplitSpec):
    """Assign whole drivers to train/val/test at random; returns a new dataset."""
    drivers = np.unique(dataset.drivers)
    counts = (spec.n_train_drivers, spec.n_val_drivers, spec.n_test_drivers)
    if min(counts) < 0 or sum(counts) != len(drivers):
        raise InvalidInputError(f"split counts {counts} do not add up to {len(drivers)} drivers")
    order = make_rng(spec.seed, 3).permutation(drivers)
    assignment = {}
    start = 0
    for name, k in zip(SPLITS, counts):
        for d in order[start : start + k]:
            assignment[int(d)] = name
        start += k
    splits = np.array([assignment[int(d)] for d in dataset.drivers], dtype=object)
    return dataset.with_splits(splits)
