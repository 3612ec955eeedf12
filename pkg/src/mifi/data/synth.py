"""Seeded synthetic two-camera feature datasets.

Each class owns one prototype feature tensor per camera: a per-channel
mean plus a zero-mean spatio-temporal pattern. A clip is its
class prototype plus a per-driver channel offset plus i.i.d. gaussian
noise. Two knobs shape difficulty:

* ``view_ambiguity[v]`` lists class pairs whose camera-``v`` prototypes
  are made identical, so that camera alone cannot tell them apart;
* ``hard_classes`` have their prototypes pulled toward their common
  centroid by ``hard_margin`` in every camera.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..numerics import FEATURE_DTYPE, make_rng
from .dataset import VIEW_IDS, Dataset

# stream ids for make_rng
_PROTO, _CLIP, _DRIVER = 11, 12, 13


@dataclass(frozen=True)
class SynthConfig:
    n_classes: int = 16
    n_drivers: int = 50
    clips_per_driver_per_class: int = 1
    dims: tuple = (64, 4, 7, 7)
    view_ambiguity: dict = field(default_factory=dict)
    hard_classes: tuple = ()
    noise_std: float = 1.0
    seed: int = 0
    prototype_std: float = 1.0
    hard_margin: float = 0.25
    driver_std: float = 0.0

    def __post_init__(self):
        amb = {int(v): tuple(tuple(int(c) for c in pair) for pair in pairs) for v, pairs in dict(self.view_ambiguity).items()}
        object.__setattr__(self, "view_ambiguity", amb)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "hard_classes", tuple(sorted(int(c) for c in self.hard_classes)))
        self.validate()

    def validate(self):
        if self.n_classes < 2:
            raise InvalidInputError("need at least two classes")
        if self.n_drivers < 1 or self.clips_per_driver_per_class < 1:
            raise InvalidInputError("need at least one driver and one clip per driver and class")
        if len(self.dims) != 4 or min(self.dims) < 1:
            raise InvalidInputError(f"dims must be four positive extents (C, T, W, H), got {self.dims}")
        for name in ("noise_std", "prototype_std", "driver_std"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be >= 0")
        if not 0 <= self.hard_margin <= 1:
            raise InvalidInputError("hard_margin must be in [0, 1]")
        for v, pairs in self.view_ambiguity.items():
            if v not in VIEW_IDS:
                raise InvalidInputError(f"ambiguity given for unknown camera {v}")
            for pair in pairs:
                if len(pair) != 2 or pair[0] == pair[1] or not all(0 <= c < self.n_classes for c in pair):
                    raise InvalidInputError(f"invalid ambiguity pair {pair} for camera {v}")
        for c in self.hard_classes:
            if not 0 <= c < self.n_classes:
                raise InvalidInputError(f"hard class {c} out of range")


def ambiguity_groups(n_classes: int, pairs) -> list[list[int]]:
    """Classes that end up sharing a prototype (pairs are merged transitively)."""
    parent = list(range(n_classes))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for c in range(n_classes):
        groups.setdefault(find(c), []).append(c)
    return list(groups.values())


def single_view_bayes_bound(config: SynthConfig, view: int) -> float:
    """Best accuracy any observer of one camera can reach on balanced classes.

    Classes sharing a prototype are indistinguishable, so at most one per
    group is recognized; for disjoint pairs this is
    ``(unambiguous + 0.5 * ambiguous) / n_classes``.
    """
    groups = ambiguity_groups(config.n_classes, config.view_ambiguity.get(view, ()))
    return len(groups) / config.n_classes


def class_prototypes(config: SynthConfig) -> dict[int, np.ndarray]:
    """Per-camera prototype stacks, shape n_classes x C x T x W x H."""
    out = {}
    for v in VIEW_IDS:
        rng = make_rng(config.seed, _PROTO, v)
        # channel means carry the class signal that survives global pooling;
        # the zero-mean spatio-temporal pattern does not
        means = rng.normal(0.0, config.prototype_std, size=(config.n_classes, config.dims[0]))
        pattern = rng.normal(0.0, config.prototype_std, size=(config.n_classes, *config.dims))
        pattern -= pattern.mean(axis=(2, 3, 4), keepdims=True)
        protos = means[:, :, None, None, None] + pattern
        hard = list(config.hard_classes)
        if len(hard) > 1:
            centre = protos[hard].mean(axis=0)
            protos[hard] = centre + config.hard_margin * (protos[hard] - centre)
        for group in ambiguity_groups(config.n_classes, config.view_ambiguity.get(v, ())):
            protos[group] = protos[group[0]]
        out[v] = protos
    return out


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Draw the dataset; every clip's noise comes from its own (seed, index) stream."""
    protos = class_prototypes(config)
    C = config.dims[0]
    offsets = {
        v: np.stack([make_rng(config.seed, _DRIVER, d, v).normal(0.0, config.driver_std, size=C) for d in range(config.n_drivers)])
        for v in VIEW_IDS
    }
    n = config.n_drivers * config.n_classes * config.clips_per_driver_per_class
    views = {v: np.empty((n, *config.dims), dtype=FEATURE_DTYPE) for v in VIEW_IDS}
    ids, labels, drivers = [], [], []
    i = 0
    for d in range(config.n_drivers):
        for k in range(config.n_classes):
            for c in range(config.clips_per_driver_per_class):
                rng = make_rng(config.seed, _CLIP, i)
                for v in VIEW_IDS:
                    noise = rng.normal(0.0, config.noise_std, size=config.dims)
                    clip = protos[v][k] + offsets[v][d][:, None, None, None] + noise
                    views[v][i] = clip
                ids.append(f"d{d:03d}_k{k:02d}_c{c}")
                labels.append(k)
                drivers.append(d)
                i += 1
    return Dataset(ids, np.array(labels), np.array(drivers), views, config.n_classes)
