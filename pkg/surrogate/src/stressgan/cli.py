"""CLI for training, prediction, and the discriminator probe."""

from __future__ import annotations

import argparse
import sys

from .models import ConfigurationError
from .trainer import TrainConfig, discriminator_probe, predict, train


def cmd_train(args) -> int:
    config = TrainConfig(
        dataset=args.dataset,
        model_kind=args.model,
        split=args.split,
        side=args.side,
        lambda_l2=args.lambda_l2,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        adversarial=args.adversarial,
        target_scale=args.target_scale if args.target_scale != "auto" else "auto",
        checkpoint_path=args.checkpoint,
        log_path=args.log,
        eval_every=args.eval_every,
        target_pmae=args.target_pmae,
    )
    checkpoint, log = train(config)
    last = log[-1] if log else {}
    print(f"trained {config.model_kind} for {checkpoint['epochs_run']} epochs "
          f"in {checkpoint['train_seconds']:.0f}s; last epoch: "
          + " ".join(f"{k}={v:.4g}" for k, v in last.items() if k != "epoch"))
    return 0


def cmd_predict(args) -> int:
    ids, fields = predict(args.checkpoint, args.dataset, args.split,
                          args.out, side=args.side)
    print(f"wrote {len(ids)} predictions -> {args.out}")
    return 0


def cmd_probe(args) -> int:
    mean_real, mean_fake = discriminator_probe(args.checkpoint, args.dataset,
                                               args.split, side=args.side)
    print(f"discriminator probe: mean_real={mean_real:.4f} mean_fake={mean_fake:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stressgan",
        description="Train and evaluate stress-field surrogates on SGF1 datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--model", choices=("stressgan", "srn"), default="stressgan")
    p.add_argument("--split", default=None)
    p.add_argument("--side", choices=("train", "test"), default="train")
    p.add_argument("--lambda-l2", type=float, default=None,
                   help="L2 weight in the generator objective "
                        "(default: 1 for fine-mesh datasets, 10 for coarse-mesh)")
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--adversarial", choices=("non-saturating", "minimax"),
                   default="non-saturating")
    p.add_argument("--target-scale", default="auto")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--log", default=None)
    p.add_argument("--eval-every", type=int, default=0)
    p.add_argument("--target-pmae", type=float, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--side", choices=("train", "test"), default="test")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("probe")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--side", choices=("train", "test"), default="test")
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (ConfigurationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
