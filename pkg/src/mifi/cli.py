"""Command-line entry point: ``mifi <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import config as config_mod
from .benchmarks import BENCHMARKS
from .data import SplitSpec, generate_synthetic, load_dataset, load_features, save_dataset, save_features, split_by_driver
from .data.keyframes import keyframe_select
from .errors import ConfigError, DataError, MifiError
from .fusion import FusionMode
from .harness import dump_embeddings, evaluate, single_view_evaluate, train, voting_evaluate, write_metrics
from .head import HeadParams, head_finite_diff_check, init_head, load_head, save_head
from .losses import CaslConfig, casl_alpha, finite_diff_check, make_loss

log = logging.getLogger("mifi")

GRADCHECK_TOLERANCE = 1e-4


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; command-line flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory or file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mifi", description="Multi-camera feature fusion with cyclical focal loss.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic two-camera feature dataset")
    _common(p)
    p.add_argument("--benchmark", choices=sorted(BENCHMARKS))
    p.add_argument("--n-drivers", type=int)
    p.add_argument("--clips", type=int, help="clips per driver and class")
    p.add_argument("--dims", type=int, nargs=4, metavar=("C", "T", "W", "H"))
    p.add_argument("--noise-std", type=float)
    p.add_argument("--driver-std", type=float)
    p.add_argument("--ambiguity", type=json.loads, help='JSON object, e.g. \'{"1": [[0, 1]]}\'')

    p = sub.add_parser("train", help="train fused and single-camera heads on a dataset")
    _common(p)
    p.add_argument("--dataset")
    p.add_argument("--fusion", choices=[m.value for m in FusionMode])
    p.add_argument("--loss", choices=["ce", "fl", "asl", "casl"])
    for name in ("beta", "gamma", "lambda1", "lambda2", "lr"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--decay-epochs", type=int, nargs="*")
    p.add_argument("--batch-size", type=int)

    p = sub.add_parser("eval", help="evaluate a trained run on a split")
    _common(p)
    p.add_argument("run", help="run directory written by 'train'")
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--view", type=int, choices=[1, 2], help="evaluate the single-camera head instead")

    p = sub.add_parser("gradcheck", help="compare analytic gradients with finite differences")
    _common(p)
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--corrupt-gradient", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("sweep-alpha", help="tabulate the cyclical weight per epoch for several beta")
    _common(p)
    p.add_argument("--beta", type=float, nargs="+", default=[1, 2, 3, 4, 5, 6])
    p.add_argument("--total-epochs", type=int, default=100)

    p = sub.add_parser("keyframes", help="keep the n most distinct frames of a feature container")
    _common(p)
    p.add_argument("input")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--axis", type=int, default=1, help="temporal axis (1 for C x T x W x H)")
    return parser


def _overrides(args, keys) -> dict:
    out = {}
    for key in keys:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            out[key] = list(value) if isinstance(value, tuple) else value
    return out


def _setup_log(directory) -> None:
    handler = logging.FileHandler(os.path.join(directory, "run.log"), mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO)


def synth_config_from(cfg: dict):
    overrides = {}
    for key, field in (
        ("n-drivers", "n_drivers"),
        ("clips", "clips_per_driver_per_class"),
        ("noise-std", "noise_std"),
        ("driver-std", "driver_std"),
        ("prototype-std", "prototype_std"),
        ("hard-margin", "hard_margin"),
        ("hard-classes", "hard_classes"),
        ("n-classes", "n_classes"),
        ("dims", "dims"),
    ):
        if cfg.get(key) is not None:
            overrides[field] = cfg[key]
    if cfg.get("ambiguity") is not None:
        amb = cfg["ambiguity"]
        if not isinstance(amb, dict):
            raise ConfigError("ambiguity must map camera ids to lists of class pairs")
        overrides["view_ambiguity"] = {int(k): [tuple(p) for p in v] for k, v in amb.items()}
    name = cfg.get("benchmark") or "default"
    if name not in BENCHMARKS:
        raise ConfigError(f"unknown benchmark {name!r}")
    return BENCHMARKS[name](int(cfg["seed"]), **overrides)


def cmd_synth(args) -> int:
    cfg = config_mod.load_config(
        args.config,
        _overrides(args, ["seed", "out", "benchmark", "n-drivers", "clips", "dims", "noise-std", "driver-std", "ambiguity"]),
    )
    if not cfg["out"]:
        raise ConfigError("synth needs --out")
    synth = synth_config_from(cfg)
    ds = generate_synthetic(synth)
    save_dataset(ds, cfg["out"])
    print(f"wrote {len(ds)} clips ({synth.n_drivers} drivers x {synth.n_classes} classes) to {cfg['out']}")
    return 0


def _load_split(cfg: dict):
    path = cfg["dataset"]
    if not path:
        raise ConfigError("no dataset given (use --dataset)")
    if not os.path.isdir(path):
        raise DataError(f"dataset directory {path} does not exist")
    ds = load_dataset(path, int(cfg["n-classes"]))
    n_train, n_val, n_test = (int(x) for x in cfg["split"])
    return split_by_driver(ds, SplitSpec(n_train, n_val, n_test, int(cfg["seed"])))


def run_training(cfg: dict, out: str) -> dict:
    """Train the fused head plus one head per camera and write every run artifact."""
    os.makedirs(out, exist_ok=True)
    _setup_log(out)
    config_mod.write_config(cfg, os.path.join(out, "config.json"))
    ds = _load_split(cfg)
    kind = config_mod.loss_from_config(cfg)
    sgd = config_mod.sgd_from_config(cfg)
    seed = int(cfg["seed"])
    mode = FusionMode.parse(cfg["fusion"])
    log.info("training %s head with %s loss on %d clips", mode.value, cfg["loss"], len(ds))

    head, history = train(ds, mode, kind, sgd, seed)
    save_head(head, os.path.join(out, "head"), {"fusion": mode.value, "loss": cfg["loss"]})
    history.to_csv(os.path.join(out, "history.csv"))
    heads = {}
    for v in ds.view_ids:
        heads[v], _ = train(ds, None, kind, sgd, seed, view=v)
        save_head(heads[v], os.path.join(out, f"view{v}"), {"view": v, "loss": cfg["loss"]})

    test = evaluate(head, ds, "test", mode)
    extra = {
        "fusion": mode.value,
        "loss": cfg["loss"],
        "best_epoch": history.best_epoch,
        "best_val_accuracy": history.best_val_accuracy,
        "n_parameters": head.n_parameters,
        "single_view_accuracy": {f"cam{v}": single_view_evaluate(heads[v], ds, v, "test").accuracy for v in heads},
    }
    if set(heads) == {1, 2}:
        extra["voting_accuracy"] = voting_evaluate(heads[1], heads[2], ds, "test").accuracy
    write_metrics(test, out, extra)
    dump_embeddings(head, ds, "test", os.path.join(out, "embeddings.csv"), mode)
    log.info("test accuracy %.4f macro-F1 %.4f", test.accuracy, test.macro_f1)
    return {"accuracy": test.accuracy, "macro_f1": test.macro_f1, **extra}


def cmd_train(args) -> int:
    keys = ["seed", "out", "dataset", "fusion", "loss", "beta", "gamma", "lambda1", "lambda2", "lr", "epochs", "decay-epochs", "batch-size"]
    cfg = config_mod.load_config(args.config, _overrides(args, keys))
    if not cfg["out"]:
        raise ConfigError("train needs --out")
    summary = run_training(cfg, cfg["out"])
    print(f"test accuracy {summary['accuracy']:.4f}  macro-F1 {summary['macro_f1']:.4f}  ({cfg['out']})")
    return 0


def cmd_eval(args) -> int:
    cfg_path = os.path.join(args.run, "config.json")
    if not os.path.exists(cfg_path):
        raise DataError(f"{args.run} is not a run directory (no config.json)")
    cfg = config_mod.load_config(cfg_path, _overrides(args, ["seed"]))
    ds = _load_split(cfg)
    if args.view:
        head, _ = load_head(os.path.join(args.run, f"view{args.view}"))
        metrics = single_view_evaluate(head, ds, args.view, args.split)
        name = f"eval-{args.split}-view{args.view}"
    else:
        head, meta = load_head(os.path.join(args.run, "head"))
        metrics = evaluate(head, ds, args.split, meta["fusion"])
        name = f"eval-{args.split}"
    out = args.out or os.path.join(args.run, name)
    write_metrics(metrics, out)
    print(f"{args.split} accuracy {metrics.accuracy:.4f}  macro-F1 {metrics.macro_f1:.4f}  ({out})")
    return 0


class _Corrupted:
    """Test hook: scales a loss's logit gradient by 1%."""

    def __init__(self, kind):
        self.kind = kind
        self.name = kind.name

    def value(self, p, epoch=None):
        return self.kind.value(p, epoch)

    def scale(self, p, epoch=None):
        return 1.01 * self.kind.scale(p, epoch)


def gradcheck_report(cases: int = 100, seed: int = 0, cfg: dict | None = None, corrupt: bool = False) -> dict:
    cfg = cfg or dict(config_mod.DEFAULTS)
    e_t = int(cfg.get("total-epochs") or cfg["epochs"])
    common = dict(
        beta=float(cfg["beta"]), gamma=float(cfg["gamma"]), lambda1=float(cfg["lambda1"]), lambda2=float(cfg["lambda2"]),
        total_epochs=e_t, gamma_fl=float(cfg["gamma-fl"]), asl_lambda1=float(cfg["asl-lambda1"]), asl_lambda2=float(cfg["asl-lambda2"]),
    )
    rng = np.random.default_rng(seed)
    report = {}
    for name in ("ce", "fl", "asl", "casl"):
        kind = make_loss(name, **common)
        if corrupt:
            kind = _Corrupted(kind)
        worst = 0.0
        for _ in range(cases):
            logits = rng.normal(0.0, 2.0, size=16)
            target = int(rng.integers(16))
            epoch = int(rng.integers(0, e_t + 1))
            worst = max(worst, finite_diff_check(kind, logits, target, epoch))
        feats = rng.normal(size=(4, 8, 2, 3, 3))
        params = init_head(8, 16, seed)
        params = HeadParams(params.weight.astype(np.float64) * 30, rng.normal(size=16))
        head_err = head_finite_diff_check(kind, feats, rng.integers(0, 16, size=4), params, int(rng.integers(0, e_t + 1)))
        report[name] = {"logits": worst, "head": head_err}
    return report


def cmd_gradcheck(args) -> int:
    cfg = config_mod.load_config(args.config, _overrides(args, ["seed"]))
    report = gradcheck_report(args.cases, int(cfg["seed"]), cfg, args.corrupt_gradient)
    failed = False
    for name, errs in report.items():
        ok = max(errs.values()) <= GRADCHECK_TOLERANCE
        failed |= not ok
        print(f"{name:5s} logits {errs['logits']:.3e}  head {errs['head']:.3e}  {'ok' if ok else 'FAIL'}")
    return 4 if failed else 0


def alpha_table(betas, total_epochs: int) -> list:
    rows = []
    configs = [CaslConfig(beta=float(b), total_epochs=total_epochs) for b in betas]
    for e in range(total_epochs + 1):
        rows.append([e] + [casl_alpha(e, c) for c in configs])
    return rows


def cmd_sweep_alpha(args) -> int:
    rows = alpha_table(args.beta, args.total_epochs)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch"] + [f"beta={b:g}" for b in args.beta])
        for row in rows:
            w.writerow([row[0]] + [repr(float(a)) for a in row[1:]])
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_keyframes(args) -> int:
    if not args.out:
        raise ConfigError("keyframes needs --out")
    frames = load_features(args.input)
    kept = keyframe_select(frames, args.n, args.axis)
    save_features(kept, args.out)
    print(f"kept {args.n} of {frames.shape[args.axis]} frames -> {args.out}")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "sweep-alpha": cmd_sweep_alpha,
    "keyframes": cmd_keyframes,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MifiError as exc:
        print(f"mifi {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"mifi {args.command}: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
