"""Command-line surface.

One verb per pipeline stage: ``split`` scans a dataset root and writes the
manifest, ``train`` fits a model, ``evaluate`` scores a split from a
checkpoint, ``predict`` ranks classes for images, ``params`` prints the
layer/parameter table for a config, ``solve-config`` searches the
architecture family for a parameter-count target.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numeric
failure. ``GOURNET_SEED`` supplies a default seed; ``--seed`` wins.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .checkpoint import load_model_weights, save_model
from .config import (SolveConstraints, audit, bundled_config_text,
                     config_to_text, load_config, parse_config, solve_config)
from .curves import emit_curves
from .data import (STREAM_INIT, load_manifest, save_manifest, scan_dataset,
                   split_counts, stratified_split, SPLITS)
from .errors import (CheckpointError, ConfigError, DataError, DomainError,
                     ShapeError, TrainingError)
from .images import load_image
from .model import build_model
from .optimize import AdamConfig
from .preprocess import AugmentPolicy, NO_AUGMENT, rescale, resize_bilinear
from .tensor import Rng
from .training import (TrainingConfig, evaluate, make_loader, predict,
                       save_history, train)

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here is exit 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("GOURNET_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"GOURNET_SEED must be an integer, got {env!r}")


def _load_config_arg(path: str):
    """A real file wins; otherwise a bare name may match a bundled config."""
    if os.path.isfile(path):
        return load_config(path)
    if os.sep not in path and "/" not in path:
        try:
            text = bundled_config_text(path)
        except ConfigError:
            pass
        else:
            return parse_config(text)
    raise ConfigError(f"no such config file or bundled config: {path}")


def _dataset_and_manifest(args, seed: int):
    """Load the manifest if one exists at --manifest, else split fresh (and
    save when a path was given)."""
    if args.manifest and os.path.isfile(args.manifest):
        return load_manifest(args.manifest, args.data)
    ds = scan_dataset(args.data)
    manifest = stratified_split(ds, seed)
    if args.manifest:
        save_manifest(ds, manifest, args.manifest)
        logger.info("manifest written to %s", args.manifest)
    return ds, manifest


def _build_from_config(config, seed: int):
    if not config.runnable:
        raise ConfigError("config contains accounting-only layers "
                          "(batchnorm) and cannot be trained or run")
    rng = Rng(seed).derive(STREAM_INIT)
    return build_model(config.input_shape, config.specs, rng)


def _cmd_params(args) -> int:
    config = _load_config_arg(args.config)
    print(audit(config).render())
    return 0


def _cmd_solve_config(args) -> int:
    result = solve_config(args.target, SolveConstraints())
    print(result.log())
    if args.out:
        if not result.configs:
            raise DataError(f"no config found for target {args.target}; "
                            "nothing to write")
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(config_to_text(result.configs[0]))
        print(f"wrote {args.out}")
    return 0


def _cmd_split(args) -> int:
    seed = _resolve_seed(args)
    ds = scan_dataset(args.data)
    manifest = stratified_split(ds, seed)
    save_manifest(ds, manifest, args.manifest)
    counts = split_counts(ds, manifest)
    width = max(len(n) for n in ds.class_names)
    print(f"{'class':<{width}} {'train':>6} {'val':>6} {'test':>6}")
    totals = {s: 0 for s in SPLITS}
    for name in ds.class_names:
        row = counts[name]
        for s in SPLITS:
            totals[s] += row[s]
        print(f"{name:<{width}} {row['train']:>6} {row['val']:>6} "
              f"{row['test']:>6}")
    print(f"{'total':<{width}} {totals['train']:>6} {totals['val']:>6} "
          f"{totals['test']:>6}")
    print(f"manifest written to {args.manifest} (seed {seed})")
    return 0


def _cmd_train(args) -> int:
    seed = _resolve_seed(args)
    config = _load_config_arg(args.config)
    ds, manifest = _dataset_and_manifest(args, seed)
    head = config.specs[-1]
    if head.units != len(ds.class_names):
        raise ConfigError(
            f"config head has {head.units} units but the dataset has "
            f"{len(ds.class_names)} classes")
    model = _build_from_config(config, seed)
    policy = NO_AUGMENT if args.no_augment else AugmentPolicy()
    tcfg = TrainingConfig(epochs=args.epochs, batch_size=args.batch_size,
                          adam=AdamConfig(lr=args.lr), patience=args.patience,
                          seed=seed, augment=policy)
    result = train(model, ds, manifest, tcfg)
    save_model(model, args.out)
    logger.info("checkpoint written to %s", args.out)
    if args.history:
        save_history(result.history, args.history)
        stem, _ = os.path.splitext(args.history)
        emit_curves(result.history, stem + ".svg")
        logger.info("history written to %s, curves to %s.svg",
                    args.history, stem)
    last = result.history[-1]
    print(f"trained {len(result.history)} epoch(s); best epoch "
          f"{result.best_epoch} (val_loss {result.best_val_loss:.6f}); "
          f"final val_accuracy {last.val_accuracy:.4f}")
    return 0


def _cmd_evaluate(args) -> int:
    seed = _resolve_seed(args)
    config = _load_config_arg(args.config)
    ds, manifest = _dataset_and_manifest(args, seed)
    model = _build_from_config(config, seed)
    load_model_weights(model, args.checkpoint)
    indices = manifest.indices(args.split)
    if not indices:
        raise UsageError(f"split {args.split!r} is empty")
    load_fn = make_loader(ds, model.input_shape[0], model.input_shape[1])
    loss, acc = evaluate(model, ds, indices, load_fn, args.batch_size)
    print(f"{args.split}: loss {loss:.6f}, accuracy {acc:.4f} "
          f"({len(indices)} samples)")
    return 0


def _cmd_predict(args) -> int:
    seed = _resolve_seed(args)
    config = _load_config_arg(args.config)
    model = _build_from_config(config, seed)
    load_model_weights(model, args.checkpoint)
    if args.manifest:
        ds, _ = load_manifest(args.manifest, args.data or "")
        class_names = ds.class_names
    elif args.data:
        class_names = scan_dataset(args.data).class_names
    else:
        class_names = tuple(f"class_{i}" for i in range(config.specs[-1].units))
    if len(class_names) != config.specs[-1].units:
        raise ConfigError(f"config head has {config.specs[-1].units} units "
                          f"but {len(class_names)} class names were found")
    h, w = model.input_shape[0], model.input_shape[1]
    width = max(len(n) for n in class_names)
    for path in args.images:
        img = rescale(resize_bilinear(load_image(path), h, w))
        probs = predict(model, img)
        order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
        print(path)
        for rank, i in enumerate(order, start=1):
            print(f"  {rank}. {class_names[i]:<{width}} {probs[i]:.4f}")
    return 0


def _add_data_flags(p, manifest_required=False):
    p.add_argument("--data", required=True, help="dataset root directory")
    p.add_argument("--manifest", required=manifest_required,
                   help="split manifest file path")


def build_parser() -> _Parser:
    parser = _Parser(prog="gournet",
                     description="Train and run small image classifiers.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("train", help="fit a model on a dataset")
    _add_data_flags(p)
    p.add_argument("--config", required=True, help="model config file")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="gournet.ckpt", help="checkpoint path")
    p.add_argument("--history", default=None,
                   help="history CSV path (a matching .svg is also written)")
    p.add_argument("--no-augment", action="store_true",
                   help="disable training-time augmentation")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score a split from a checkpoint")
    _add_data_flags(p)
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", default="test", choices=sorted(SPLITS))
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", help="rank classes for images")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", default=None, help="dataset root for class names")
    p.add_argument("--manifest", default=None,
                   help="manifest file for class names")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("images", nargs="+", metavar="IMAGE")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("params", help="print the layer/parameter table")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_params)

    p = sub.add_parser("solve-config",
                       help="search the architecture family for a "
                            "parameter-count target")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--out", default=None,
                   help="write the first matching config here")
    p.set_defaults(func=_cmd_solve_config)

    p = sub.add_parser("split", help="scan a dataset and write the manifest")
    _add_data_flags(p, manifest_required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_split)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as e:
        print(f"gournet: {e}", file=sys.stderr)
        return 1
    except (ConfigError, DataError, CheckpointError, ShapeError, OSError) as e:
        print(f"gournet: {e}", file=sys.stderr)
        return 2
    except (TrainingError, DomainError) as e:
        print(f"gournet: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
