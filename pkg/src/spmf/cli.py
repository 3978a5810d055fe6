"""Command line entry point.

Exit codes: 0 success, 1 data error, 2 usage error.  Diagnostics go to
stderr; machine-readable results go to files or stdout.  A JSON config file
passed with --config supplies flag values by destination name; flags given
on the command line win on conflict.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, baseline, pipeline
from .augment import AugmentConfig, augment_image, replica_rng
from .encoder import SpmfImage
from .errors import SpmfError
from .ingest import MsrFormatConfig, NtuFormatConfig, parse_msr, parse_ntu
from .pngio import read_png, write_png
from .skeleton import validate_sequence


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spmf",
        description="Encode skeleton sequences as pose-motion color images "
        "and train classifiers on them.",
    )
    parser.add_argument("--config", help="JSON file of default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a skeleton file and report on it")
    p.add_argument("--format", choices=["msr", "ntu"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--name", help="sample name carrying label/subject/camera")
    p.add_argument("--joints", type=int, help="joints per frame/body")
    p.add_argument("--values-per-row", type=int, dest="values_per_row")

    p = sub.add_parser("stats", help="compute corpus distance statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--base-dir", dest="base_dir")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--stats-scope",
        dest="stats_scope",
        choices=["corpus", "train"],
        default="corpus",
        help="train limits stats to the train split (no test leakage)",
    )

    p = sub.add_parser("encode", help="encode a manifest into a PNG corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--stats", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--base-dir", dest="base_dir")
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--replicas", type=int, default=0,
                   help="augmented copies per train sample (originals kept)")
    p.add_argument("--crop-fraction", type=float, default=0.9, dest="crop_fraction")
    p.add_argument("--flip-probability", type=float, default=0.5, dest="flip_probability")
    p.add_argument("--gaussian-sigma", type=float, default=0.5, dest="gaussian_sigma")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--keep-raw", action="store_true", dest="keep_raw")

    p = sub.add_parser("augment", help="augment a single PNG")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--crop-fraction", type=float, default=0.9, dest="crop_fraction")
    p.add_argument("--flip-probability", type=float, default=0.5, dest="flip_probability")
    p.add_argument("--gaussian-sigma", type=float, default=0.5, dest="gaussian_sigma")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replica", type=int, default=1)

    p = sub.add_parser("train-baseline", help="train the linear classifier")
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True, help="checkpoint path (.bin)")
    p.add_argument("--learning-rate", type=float, default=0.001, dest="learning_rate")
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--batch-size", type=int, default=256, dest="batch_size")
    p.add_argument("--epochs", type=int, default=250)
    p.add_argument("--lr-halving-period", type=int, default=20, dest="lr_halving_period")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    p.add_argument("--index", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split", choices=["train", "test"], default="test")
    p.add_argument("--out", help="report JSON path (default: stdout)")

    sub.add_parser("version", help="print the package version")
    return parser


def _apply_config(args: argparse.Namespace, argv) -> argparse.Namespace:
    """Fill values from --config for flags the user left at their default."""
    if not args.config:
        return args
    doc = json.loads(Path(args.config).read_text())
    explicit = {
        key for key in vars(args) if "--" + key.replace("_", "-") in argv
    }
    for key, value in doc.items():
        key = key.replace("-", "_")
        if hasattr(args, key) and key not in explicit:
            setattr(args, key, value)
    return args


def _cmd_parse(args) -> int:
    text = Path(args.input).read_text(errors="replace")
    name = args.name or Path(args.input).stem
    if args.format == "msr":
        cfg = MsrFormatConfig(
            joints_per_frame=args.joints or 20,
            values_per_row=args.values_per_row or 4,
        )
        sequences = [parse_msr(text, cfg, name=name, path=args.input)]
    else:
        cfg = NtuFormatConfig(joints_per_body=args.joints or 25)
        sequences = parse_ntu(text, cfg, name=name, path=args.input)
    summary = []
    for seq in sequences:
        report = validate_sequence(seq)
        summary.append(
            {
                "frames": seq.frame_count,
                "joint_count": seq.joint_count,
                "label": seq.label,
                "subject_id": seq.subject_id,
                "camera_id": seq.camera_id,
                "violations": [i.message for i in report.errors],
                "flags": [i.message for i in report.warnings],
            }
        )
    print(json.dumps(summary if args.format == "ntu" else summary[0], indent=2))
    return 0


def _cmd_stats(args) -> int:
    manifest = pipeline.load_manifest(args.manifest)
    sample_ids = None
    if args.stats_scope == "train":
        sample_ids = pipeline.split_dataset(manifest).train

    def warn(sample_id, exc):
        print(f"warning: skipping {sample_id}: {exc}", file=sys.stderr)

    stats = pipeline.compute_stats(
        pipeline.iter_sequences(
            manifest,
            base_dir=args.base_dir,
            sample_ids=sample_ids,
            skip_errors=True,
            on_skip=warn,
        ),
        source=manifest.dataset,
    )
    pipeline.save_stats(stats, args.out, params={"scope": args.stats_scope})
    print(f"d_max={stats.d_max!r} source={stats.source} -> {args.out}", file=sys.stderr)
    return 0


def _cmd_encode(args) -> int:
    manifest = pipeline.load_manifest(args.manifest)
    stats = pipeline.load_stats(args.stats)
    replicas = args.replicas
    if manifest.protocol.startswith("ntu_") and replicas > 0:
        print(
            "warning: augmentation replicas requested for an ntu protocol; "
            "the reference pipeline augments only the small-corpus profile",
            file=sys.stderr,
        )
    cfg = pipeline.EncodeConfig(
        out_width=args.width,
        out_height=args.height,
        replicas=replicas,
        augment=AugmentConfig(
            crop_fraction=args.crop_fraction,
            flip_probability=args.flip_probability,
            gaussian_sigma=args.gaussian_sigma,
            seed=args.seed,
        ),
        jobs=args.jobs,
        keep_raw=args.keep_raw,
    )
    summary = pipeline.encode_corpus(
        manifest, stats, cfg, args.out, base_dir=args.base_dir
    )
    print(json.dumps(summary))
    if summary["errors"]:
        print(f"{summary['errors']} sample(s) failed to encode", file=sys.stderr)
        return 1
    return 0


def _cmd_augment(args) -> int:
    pixels = read_png(args.input)
    img = SpmfImage(width=pixels.shape[1], height=pixels.shape[0], pixels=pixels)
    cfg = AugmentConfig(
        crop_fraction=args.crop_fraction,
        flip_probability=args.flip_probability,
        gaussian_sigma=args.gaussian_sigma,
        seed=args.seed,
    )
    rng = replica_rng(cfg.seed, Path(args.input).name, args.replica)
    write_png(args.output, augment_image(img, cfg, rng).pixels)
    return 0


def _cmd_train(args) -> int:
    cfg = baseline.TrainConfig(
        learning_rate=args.learning_rate,
        beta1=args.beta1,
        beta2=args.beta2,
        epsilon=args.epsilon,
        batch_size=args.batch_size,
        epochs=args.epochs,
        lr_halving_period=args.lr_halving_period,
        seed=args.seed,
    )
    model, history = baseline.train(args.index, cfg)
    out = Path(args.out)
    baseline.save_model(model, cfg, out)
    history_path = out.with_name(out.stem + "_history.json")
    history_path.write_text(json.dumps({"epoch_loss": history}, indent=2) + "\n")
    final = f", final loss {history[-1]:.6f}" if history else ""
    print(f"saved {out} after {cfg.epochs} epochs{final}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    model, _ = baseline.load_model(args.model)
    report = baseline.evaluate(model, args.index, args.split)
    doc = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(doc + "\n")
    else:
        print(doc)
    print(report.format_confusion(), file=sys.stderr)
    return 0


def run(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, argv)
        if args.command == "parse":
            return _cmd_parse(args)
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "encode":
            return _cmd_encode(args)
        if args.command == "augment":
            return _cmd_augment(args)
        if args.command == "train-baseline":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "version":
            print(__version__)
            return 0
        parser.error(f"unknown command {args.command!r}")
    except SpmfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


def main() -> None:
    sys.exit(run())
