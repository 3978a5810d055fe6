"""Command line harness: train and evaluate over an encoded corpus."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import ConfigurationError
from .network import NetworkSpec
from .training import TrainConfig, evaluate_dcnn, train_dcnn


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spmf-dcnn",
        description="Train residual-inception networks on encoded action-image corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a network variant")
    p.add_argument("--index", required=True, help="corpus index.jsonl")
    p.add_argument("--checkpoint", required=True, help="checkpoint directory")
    p.add_argument("--blocks", default="2,2,2",
                   help="block counts nA,nB,nC (e.g. 1,2,1 / 2,2,2 / 2,4,2)")
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=250)
    p.add_argument("--batch-size", type=int, default=256, dest="batch_size")
    p.add_argument("--learning-rate", type=float, default=0.001, dest="learning_rate")
    p.add_argument("--lr-halving-period", type=int, default=20, dest="lr_halving_period")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--resume", action="store_true")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    p.add_argument("--index", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", choices=["train", "test"], default="test")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            counts = tuple(int(v) for v in args.blocks.split(","))
            spec = NetworkSpec(block_counts=counts, dropout_rate=args.dropout)
            cfg = TrainConfig(
                learning_rate=args.learning_rate,
                batch_size=args.batch_size,
                epochs=args.epochs,
                lr_halving_period=args.lr_halving_period,
                seed=args.seed,
                deterministic=args.deterministic,
            )
            _, history = train_dcnn(
                args.index, spec, cfg, args.checkpoint, resume=args.resume
            )
            final = history["loss"][-1] if history["loss"] else float("nan")
            print(
                f"saved {args.checkpoint} ({spec.name}), final loss {final:.6f}",
                file=sys.stderr,
            )
            return 0
        report = evaluate_dcnn(args.checkpoint, args.index, args.split)
        doc = json.dumps(report.to_dict(), indent=2)
        if args.out:
            Path(args.out).write_text(doc + "\n")
        else:
            print(doc)
        print(
            f"average accuracy: {report.average_accuracy:.4f}", file=sys.stderr
        )
        return 0
    except (ConfigurationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
