"""Command-line interface: `finetune` trains and saves weights,
`extract` writes the feature CSV (from saved weights, or seeded random
weights in smoke mode)."""
from __future__ import annotations

import argparse
import sys

from .backbone import build_model
from .data import DEFAULT_IMAGE_SIZE, ManifestError
from .extract import extract_features, load_weights, save_weights
from .finetune import ExtractorConfig, finetune


def cmd_finetune(args) -> int:
    config = ExtractorConfig(
        image_dir=args.images,
        manifest_path=args.manifest,
        backbone=args.backbone,
        phase1_epochs=args.phase1_epochs,
        phase2_epochs=args.phase2_epochs,
        learning_rate=args.lr,
        phase2_lr_scale=args.phase2_lr_scale,
        class_weight_infection=args.weight_infection,
        class_weight_ischaemia=args.weight_ischaemia,
        batch_size=args.batch_size,
        val_fraction=args.val_fraction,
        patience=args.patience,
        image_size=args.image_size,
        seed=args.seed,
    )
    model, history = finetune(config)
    save_weights(model, args.out)
    if history.phase1_losses:
        print(f"phase 1: {len(history.phase1_losses)} epochs, "
              f"final loss {history.phase1_losses[-1]:.6f}")
    if history.phase2_losses:
        line = (f"phase 2: {len(history.phase2_losses)} epochs, "
                f"final loss {history.phase2_losses[-1]:.6f}")
        if history.best_epoch:
            line += f", best validation epoch {history.best_epoch}"
        print(line)
    print(f"wrote weights to {args.out}")
    return 0


def cmd_extract(args) -> int:
    if args.weights:
        model = load_weights(args.weights, backbone=args.backbone)
    else:
        # smoke mode: seeded random weights, extraction only
        model = build_model(args.backbone, seed=args.seed)
    summary = extract_features(model, args.images, args.manifest, args.out,
                               image_size=args.image_size)
    print(f"wrote {summary.written} feature rows to {args.out}"
          f" ({summary.skipped} skipped)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfufeatures",
        description="Fine-tune a CNN on labeled wound images and export "
                    "penultimate-layer features as CSV.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    def common(sub):
        sub.add_argument("--images", required=True,
                         help="directory holding the image files")
        sub.add_argument("--manifest", required=True,
                         help="CSV of filename,infection,ischaemia rows")
        sub.add_argument("--backbone", default="xception-mini")
        sub.add_argument("--image-size", type=int,
                         default=DEFAULT_IMAGE_SIZE)
        sub.add_argument("--seed", type=int, default=0)
        sub.add_argument("--out", required=True)

    tune = subparsers.add_parser("finetune",
                                 help="two-phase training, saves weights")
    common(tune)
    tune.add_argument("--phase1-epochs", type=int, default=10)
    tune.add_argument("--phase2-epochs", type=int, default=40)
    tune.add_argument("--lr", type=float, default=1e-3)
    tune.add_argument("--phase2-lr-scale", type=float, default=0.1)
    tune.add_argument("--weight-infection", type=float, default=1.0)
    tune.add_argument("--weight-ischaemia", type=float, default=2.0)
    tune.add_argument("--batch-size", type=int, default=8)
    tune.add_argument("--val-fraction", type=float, default=0.2)
    tune.add_argument("--patience", type=int, default=5)
    tune.set_defaults(func=cmd_finetune)

    ext = subparsers.add_parser("extract",
                                help="write the feature CSV")
    common(ext)
    ext.add_argument("--weights", default=None,
                     help="saved weights; omit for smoke mode")
    ext.set_defaults(func=cmd_extract)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ManifestError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
