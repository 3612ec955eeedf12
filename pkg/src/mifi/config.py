"""Run configuration: JSON files plus command-line overrides.

Keys use the command-line spelling (``decay-epochs``, ``batch-size``).
Unknown keys are rejected so typos never silently fall back to defaults.
"""

from __future__ import annotations

import json
import os

from .errors import ConfigError
from .fusion import FusionMode
from .losses import LOSS_NAMES, make_loss
from .head import SgdConfig

DEFAULTS = {
    "fusion": "concat-t",
    "loss": "casl",
    "beta": 4.0,
    "gamma": 0.0,
    "lambda1": 0.0,
    "lambda2": 4.0,
    "total-epochs": None,  # schedule length for the cyclical loss; None means "epochs"
    "gamma-fl": 2.0,
    "asl-lambda1": 1.0,
    "asl-lambda2": 4.0,
    "lr": 0.1,
    "epochs": 100,
    "decay-epochs": [30, 50],
    "decay-factor": 0.1,
    "batch-size": 32,
    "seed": 0,
    "split": [35, 5, 10],
    "dataset": None,
    "out": None,
    # synthetic data
    "benchmark": "default",
    "n-classes": 16,
    "n-drivers": 50,
    "clips": 1,
    "dims": [64, 4, 7, 7],
    "noise-std": None,
    "driver-std": None,
    "prototype-std": None,
    "hard-margin": None,
    "hard-classes": None,
    "ambiguity": None,
}


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the JSON file at ``path``, then ``overrides`` (flags win)."""
    cfg = dict(DEFAULTS)
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file {path} not found")
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        _merge(cfg, data, path)
    if overrides:
        _merge(cfg, {k: v for k, v in overrides.items() if v is not None}, "command line")
    validate(cfg)
    return cfg


def _merge(cfg: dict, data: dict, source) -> None:
    for key, value in data.items():
        key = key.replace("_", "-")
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r} in {source}")
        cfg[key] = value


def validate(cfg: dict) -> None:
    try:
        FusionMode.parse(cfg["fusion"])
        if cfg["loss"] not in LOSS_NAMES:
            raise ConfigError(f"loss must be one of {', '.join(LOSS_NAMES)}, got {cfg['loss']!r}")
        loss_from_config(cfg)
        sgd_from_config(cfg)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    split = cfg["split"]
    if not (isinstance(split, (list, tuple)) and len(split) == 3):
        raise ConfigError("split must list three driver counts (train, val, test)")


def loss_from_config(cfg: dict):
    return make_loss(
        cfg["loss"],
        beta=float(cfg["beta"]),
        gamma=float(cfg["gamma"]),
        lambda1=float(cfg["lambda1"]),
        lambda2=float(cfg["lambda2"]),
        total_epochs=int(cfg["total-epochs"] or cfg["epochs"]),
        gamma_fl=float(cfg["gamma-fl"]),
        asl_lambda1=float(cfg["asl-lambda1"]),
        asl_lambda2=float(cfg["asl-lambda2"]),
    )


def sgd_from_config(cfg: dict) -> SgdConfig:
    return SgdConfig(
        lr0=float(cfg["lr"]),
        decay_epochs=tuple(cfg["decay-epochs"]),
        decay_factor=float(cfg["decay-factor"]),
        epochs=int(cfg["epochs"]),
        batch_size=int(cfg["batch-size"]),
    )


def write_config(cfg: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")
