"""Command-line interface: train, eval, predict, gradcheck, synth.

Exit codes: 0 success, 1 runtime failure (I/O, data, training), 2 usage
error (bad flags or config). Flag precedence is explicit flag > --config
file > built-in default; the effective configuration is echoed on one
line at startup so any run can be reproduced from its output. Every
subcommand taking --seed is end-to-end deterministic, and output files
are written via temp-file-and-rename so failures never leave partial
files.

The --config file is a JSON object keyed by flag names with dashes
spelled as underscores (e.g. {"batch_size": 8}); keys matching no
subcommand flag are rejected.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .dataio import (load_csv, load_feature_csv, save_csv, save_model,
                     load_model, split, synth_blobs, write_epoch_log,
                     write_json)
from .encoding import SCHEMES, EncodingConfig
from .metrics import evaluate
from .model import (CLASS_NAMES, EnsembleModel, ModelParams, init_ensemble,
                    score_matrix)
from .optim import OPTIMIZER_NAMES
from .statevector import MAX_QUBITS
from .training import (EarlyStopping, TrainConfig, train,
                       ensemble_loss_gradient, finite_difference_loss_gradient)

GRADCHECK_TOLERANCE = 1e-6


# --- shared plumbing ---------------------------------------------------------

def _prescan_config(argv):
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _apply_config_defaults(parser, subparsers, argv):
    """Load --config JSON (if present) as per-subcommand defaults."""
    path = _prescan_config(argv)
    if path is None:
        return
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        parser.error(f"--config: {exc}")
    except json.JSONDecodeError as exc:
        parser.error(f"--config: invalid JSON: {exc}")
    if not isinstance(document, dict):
        parser.error("--config: top level must be a JSON object")
    known = set()
    for sub in subparsers.values():
        known |= {action.dest for action in sub._actions}
    unknown = sorted(set(document) - known)
    if unknown:
        parser.error(f"--config: unknown keys: {', '.join(unknown)}")
    for sub in subparsers.values():
        dests = {action.dest for action in sub._actions}
        sub.set_defaults(**{k: v for k, v in document.items() if k in dests})


def _format_value(value):
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def _echo_config(args):
    skip = {"func", "parser", "config", "help"}
    pairs = sorted(
        f"{action.dest}={_format_value(getattr(args, action.dest))}"
        for action in args.parser._actions
        if action.dest not in skip
    )
    print("config: " + " ".join(pairs))


def _check(parser, condition, message):
    if not condition:
        parser.error(message)


def _default_qubits(scheme, feature_dim):
    """Smallest register that fits the features for the given scheme."""
    if scheme == "amplitude":
        return max(1, (feature_dim - 1).bit_length())
    return feature_dim


# --- subcommands -------------------------------------------------------------

def cmd_train(args) -> int:
    parser = args.parser
    _check(parser, (args.train is None) != (args.synth is None),
           "exactly one of --train or --synth is required")
    _check(parser, args.val is None or args.val_fraction is None,
           "--val and --val-fraction are mutually exclusive")
    _check(parser, args.epochs >= 0, "--epochs must be non-negative")
    _check(parser, args.lr > 0, "--lr must be positive")
    _check(parser, args.margin >= 0, "--margin must be non-negative")
    _check(parser, args.batch_size >= 1, "--batch-size must be at least 1")
    _check(parser, args.layers >= 1, "--layers must be at least 1")
    _check(parser, args.qubits is None or 1 <= args.qubits <= MAX_QUBITS,
           f"--qubits must be in 1..{MAX_QUBITS}")
    _check(parser, all(w > 0 for w in args.class_weights),
           "--class-weights must all be positive")
    if args.val_fraction is not None:
        _check(parser, 0 < args.val_fraction < 1,
               "--val-fraction must be strictly between 0 and 1")
    if args.patience is not None:
        _check(parser, args.patience >= 1, "--patience must be at least 1")
        _check(parser, args.val is not None or args.val_fraction is not None,
               "--patience requires --val or --val-fraction")
    _check(parser, args.min_delta >= 0, "--min-delta must be non-negative")
    if args.synth is not None:
        _check(parser, args.synth_n >= 1, "--synth-n must be at least 1")
        _check(parser, args.synth_dim >= 2, "--synth-dim must be at least 2")
        _check(parser, args.synth_separation > 0,
               "--synth-separation must be positive")

    if args.train is not None:
        data = load_csv(args.train)
    else:
        data = synth_blobs(args.synth_n, args.synth_dim,
                           args.synth_separation, args.seed)
    if args.qubits is None:
        args.qubits = _default_qubits(args.encoding, data.feature_dim)
    _echo_config(args)

    encoding = EncodingConfig(scheme=args.encoding, n_qubits=args.qubits,
                              input_dim=data.feature_dim)
    val_set = None
    if args.val is not None:
        val_set = load_csv(args.val)
    elif args.val_fraction is not None:
        data, val_set, _ = split(
            data, (1.0 - args.val_fraction, args.val_fraction, 0.0), args.seed)

    early = (EarlyStopping(args.patience, args.min_delta)
             if args.patience is not None else None)
    config = TrainConfig(
        margin=args.margin, learning_rate=args.lr, batch_size=args.batch_size,
        max_epochs=args.epochs, seed=args.seed, optimizer=args.optimizer,
        early_stopping=early, class_weights=tuple(args.class_weights))
    initial = init_ensemble(encoding, n_layers=args.layers, seed=args.seed,
                            with_bias=args.bias)
    model, report = train(data, val_set, config, initial)

    lineage = {"seed": args.seed, "train_data": data.provenance,
               "val_data": None if val_set is None else val_set.provenance}
    save_model(model, args.out, seed_lineage=lineage)
    if args.log is not None:
        write_epoch_log(args.log, report.to_records())

    if report.epochs:
        last = report.epochs[-1]
        line = (f"final: epoch={report.stopped_epoch}"
                f" train_loss={last.train_loss:.6f}"
                f" train_acc={last.train_acc:.4f}")
        if last.val_loss is not None:
            line += f" val_loss={last.val_loss:.6f} val_acc={last.val_acc:.4f}"
        if early is not None:
            line += f" best_epoch={report.best_epoch}"
        print(line)
    else:
        print("final: epoch=0 (no training performed)")
    print(f"wrote model to {args.out}")
    return 0


def cmd_eval(args) -> int:
    _echo_config(args)
    model = load_model(args.model)
    data = load_csv(args.data)
    if data.feature_dim != model.encoding.input_dim:
        raise ValueError(
            f"dataset feature_dim {data.feature_dim} does not match "
            f"model input_dim {model.encoding.input_dim}")
    report = evaluate(model, data)
    print(report.to_table())
    if args.json is not None:
        write_json(report.to_record(), args.json)
        print(f"wrote evaluation record to {args.json}")
    return 0


def cmd_predict(args) -> int:
    _echo_config(args)
    model = load_model(args.model)
    features, _ = load_feature_csv(args.data)
    if features.shape[1] != model.encoding.input_dim:
        raise ValueError(
            f"dataset feature_dim {features.shape[1]} does not match "
            f"model input_dim {model.encoding.input_dim}")
    scores = score_matrix(model, features)
    for row in scores:
        label = model.label_map[int(row.argmax())]
        print(label + " " + " ".join(f"{s:.10f}" for s in row))
    return 0


def cmd_gradcheck(args) -> int:
    parser = args.parser
    _check(parser, args.trials >= 1, "--trials must be at least 1")
    _check(parser, 1 <= args.qubits <= MAX_QUBITS,
           f"--qubits must be in 1..{MAX_QUBITS}")
    _check(parser, args.layers >= 1, "--layers must be at least 1")
    _echo_config(args)

    dim = 2 ** args.qubits
    encoding = EncodingConfig(scheme="amplitude", n_qubits=args.qubits,
                              input_dim=dim)
    rng = np.random.default_rng(args.seed)
    max_dev = 0.0
    for _ in range(args.trials):
        classifiers = [
            ModelParams(angles=rng.uniform(-math.pi, math.pi,
                                           size=(args.layers, args.qubits, 3)))
            for _ in range(4)
        ]
        model = EnsembleModel(classifiers=classifiers, encoding=encoding,
                              n_layers=args.layers)
        features = rng.standard_normal(dim)
        true_class = int(rng.integers(0, 4))
        _, analytic = ensemble_loss_gradient(model, features, true_class,
                                             margin=0.15)
        numeric = finite_difference_loss_gradient(model, features, true_class,
                                                  margin=0.15)
        for (angle_grad, _bias_grad), fd_grad in zip(analytic, numeric):
            max_dev = max(max_dev, float(np.abs(angle_grad - fd_grad).max()))

    print(f"max |Δ| = {max_dev:.3e}")
    if max_dev < GRADCHECK_TOLERANCE:
        print(f"PASS: max |Δ| < {GRADCHECK_TOLERANCE:g}")
        return 0
    print(f"FAIL: max |Δ| >= {GRADCHECK_TOLERANCE:g}")
    return 1


def cmd_synth(args) -> int:
    parser = args.parser
    _check(parser, args.n_per_class >= 1, "--n-per-class must be at least 1")
    _check(parser, args.dim >= 2, "--dim must be at least 2")
    _check(parser, args.separation > 0, "--separation must be positive")
    _echo_config(args)
    dataset = synth_blobs(args.n_per_class, args.dim, args.separation,
                          args.seed)
    save_csv(dataset, args.out)
    print(f"wrote {len(dataset)} samples to {args.out}")
    return 0


# --- parser ------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="vqclass",
        description="Four-class one-vs-all variational quantum classifier.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    registry = {}

    def add_sub(name, func, help_text):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", metavar="JSON",
                         help="JSON file of default flag values")
        sub.set_defaults(func=func, parser=sub)
        registry[name] = sub
        return sub

    sub = add_sub("train", cmd_train, "train an ensemble")
    sub.add_argument("--train", metavar="CSV", help="labeled training CSV")
    sub.add_argument("--synth", choices=["blobs"],
                     help="use a generated dataset instead of --train")
    sub.add_argument("--synth-n", type=int, default=50,
                     help="samples per class for --synth (default 50)")
    sub.add_argument("--synth-dim", type=int, default=8,
                     help="feature dimension for --synth (default 8)")
    sub.add_argument("--synth-separation", type=float, default=10.0,
                     help="cluster separation for --synth (default 10.0)")
    sub.add_argument("--val", metavar="CSV", help="labeled validation CSV")
    sub.add_argument("--val-fraction", type=float,
                     help="carve a validation split off the training data")
    sub.add_argument("--encoding", choices=list(SCHEMES), default="amplitude")
    sub.add_argument("--qubits", type=int,
                     help="register size (default: smallest fit for the data)")
    sub.add_argument("--layers", type=int, default=6,
                     help="variational layers per classifier (default 6)")
    sub.add_argument("--bias", action="store_true",
                     help="add a trainable scalar bias to each score")
    sub.add_argument("--epochs", type=int, default=100)
    sub.add_argument("--lr", type=float, default=0.01)
    sub.add_argument("--margin", type=float, default=0.15)
    sub.add_argument("--batch-size", type=int, default=16)
    sub.add_argument("--optimizer", choices=list(OPTIMIZER_NAMES),
                     default="adam")
    sub.add_argument("--class-weights", type=float, nargs=4,
                     default=[1.0, 1.0, 1.0, 1.0], metavar="W",
                     help="per-class loss weights (order: "
                          + " ".join(CLASS_NAMES) + ")")
    sub.add_argument("--patience", type=int,
                     help="early-stop after this many non-improving epochs")
    sub.add_argument("--min-delta", type=float, default=0.0,
                     help="minimum val-loss improvement to reset patience")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True, metavar="PATH",
                     help="model file to write")
    sub.add_argument("--log", metavar="PATH", help="epoch log to write")

    sub = add_sub("eval", cmd_eval, "evaluate a model on a labeled CSV")
    sub.add_argument("--model", required=True, metavar="PATH")
    sub.add_argument("--data", required=True, metavar="CSV")
    sub.add_argument("--json", metavar="PATH",
                     help="also write the machine-readable record")

    sub = add_sub("predict", cmd_predict, "print label + scores per sample")
    sub.add_argument("--model", required=True, metavar="PATH")
    sub.add_argument("--data", required=True, metavar="CSV",
                     help="feature CSV; a label column is ignored if present")

    sub = add_sub("gradcheck", cmd_gradcheck,
                  "compare shift-rule gradients against finite differences")
    sub.add_argument("--trials", type=int, default=20)
    sub.add_argument("--qubits", type=int, default=4)
    sub.add_argument("--layers", type=int, default=2)
    sub.add_argument("--seed", type=int, default=0)

    sub = add_sub("synth", cmd_synth, "generate a blob dataset CSV")
    sub.add_argument("--n-per-class", type=int, default=50)
    sub.add_argument("--dim", type=int, default=8)
    sub.add_argument("--separation", type=float, default=10.0)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True, metavar="CSV")

    return parser, registry


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    _apply_config_defaults(parser, registry, argv)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
