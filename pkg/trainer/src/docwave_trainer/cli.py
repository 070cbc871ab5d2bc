"""Command line entry points for the patch-enhancement trainer.

Two commands:

* ``init-config``: write a JSON config holding the default hyperparameters,
  ready to edit. The config file is the only knob surface; every run is
  (data root, stage-1 directory, config).
* ``train``: build training pairs from a preprocess output directory plus
  the dataset's reference masks, run the adversarial loop, and export
  enhanced patches as manifests the pipeline consumes via its external
  enhancer stage.

Exit codes: 0 success, 1 fatal error.
"""

from __future__ import annotations

import argparse
import sys

from .config import TrainHyperparams, load_hyperparams, save_hyperparams
from .data import augment_global_stage, augment_patch_stage, load_training_set
from .losses import TrainingDiverged
from .train import enhance_directory, train


def _cmd_init_config(args) -> int:
    save_hyperparams(TrainHyperparams(), args.out)
    print(f"wrote default config to {args.out}")
    return 0


def _cmd_train(args) -> int:
    hp = load_hyperparams(args.config) if args.config else TrainHyperparams()
    samples = load_training_set(
        args.stage1, args.data, gt_suffix=args.gt_suffix, gate_threshold=hp.gate_threshold
    )
    if args.augment == "patch":
        samples = augment_patch_stage(samples)
    elif args.augment == "global":
        samples = augment_global_stage(samples)
    print(f"training on {len(samples)} samples")
    try:
        result = train(samples, hp, checkpoint_dir=args.checkpoint_dir)
    except TrainingDiverged as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        if args.checkpoint_dir:
            print(f"checkpoint written under {args.checkpoint_dir}", file=sys.stderr)
        return 1
    print(f"finished {result.steps} generator steps")
    for channel, values in sorted(result.channel_bce.items()):
        print(f"  {channel}: cross entropy {values[0]:.4f} -> {values[-1]:.4f}")
    manifest_paths = enhance_directory(result.generators, hp, args.stage1, args.out)
    for path in manifest_paths:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docwave-trainer",
        description="Train toy patch-enhancement networks against stage-1 manifests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init-config", help="write a default hyperparameter config")
    p.add_argument("out", help="path of the JSON config to create")
    p.set_defaults(fn=_cmd_init_config)

    p = sub.add_parser("train", help="train on stage-1 patches and export enhanced manifests")
    p.add_argument("--stage1", required=True, help="directory of stage-1 manifests and patches")
    p.add_argument("--data", required=True, help="dataset root holding the reference masks")
    p.add_argument("--out", required=True, help="output directory for enhanced manifests")
    p.add_argument("--config", default=None, help="hyperparameter JSON (defaults when omitted)")
    p.add_argument("--gt-suffix", default="_gt", help="reference mask filename suffix")
    p.add_argument(
        "--augment",
        choices=("none", "patch", "global"),
        default="none",
        help="expansion recipe applied to the training pairs",
    )
    p.add_argument("--checkpoint-dir", default=None, help="where to dump weights on divergence")
    p.set_defaults(fn=_cmd_train)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
