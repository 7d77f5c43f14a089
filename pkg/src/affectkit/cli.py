"""Command-line entry point.

Subcommands mirror the pipeline stages::

    affectkit synth    --out DIR [--subjects N] [--seed N]
    affectkit extract  --data DIR --out DIR
    affectkit train    --out DIR
    affectkit evaluate --out DIR [--loso]
    affectkit report   --out DIR
    affectkit all      --data DIR --out DIR [--loso]
    affectkit modes    --data DIR --out FILE --subject ID --sensor S --window K

--out is the working directory: extract writes features.csv there, train adds
models/, evaluate adds report.json + fusion_audit.jsonl. Exit codes: 0 on
success, 2 on configuration/usage errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .data import load_subject, sensor_record
from .errors import AffectkitError, ConfigError
from .ewt import decompose
from .pipeline import (
    EvalReport,
    PipelineConfig,
    emit_report,
    run_evaluate,
    run_extract,
    run_train,
)
from .synth import generate_synthetic
from .windowing import WindowSpec, label_windows


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file of config overrides")
    parser.add_argument("--seed", type=int, help="override the root seed")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affectkit",
        description="Affective-state benchmark: decomposition features, "
        "per-sensor classifiers, decision vs feature fusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic labeled corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--subjects", type=int, help="override synth_subjects")
    _add_common(p)

    p = sub.add_parser("extract", help="windows -> decomposition features CSV")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("train", help="train sensor classifiers + full-team baseline")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--loso", action="store_true", help="leave-one-subject-out folds")
    _add_common(p)

    p = sub.add_parser("evaluate", help="score decision vs feature fusion")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--loso", action="store_true")
    _add_common(p)

    p = sub.add_parser("report", help="rewrite report files from report.json")
    p.add_argument("--out", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("all", help="extract + train + evaluate + report")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--loso", action="store_true")
    _add_common(p)

    p = sub.add_parser("modes", help="decompose one window and dump modes as CSV")
    p.add_argument("--data", type=Path, required=True, help="corpus root")
    p.add_argument("--out", type=Path, required=True, help="CSV to write")
    p.add_argument("--subject", required=True)
    p.add_argument("--sensor", required=True)
    p.add_argument("--window", type=int, default=0, help="window index k")
    _add_common(p)

    return parser


def _load_config(args) -> PipelineConfig:
    config = (
        PipelineConfig.from_json(args.config)
        if getattr(args, "config", None)
        else PipelineConfig()
    )
    if getattr(args, "seed", None) is not None:
        config = config.with_overrides(seed=args.seed)
    if getattr(args, "loso", False):
        config = config.with_overrides(loso=True)
    return config


def _cmd_synth(args, config: PipelineConfig) -> int:
    subjects = args.subjects if args.subjects else config.synth_subjects
    root = generate_synthetic(
        args.out,
        subjects=subjects,
        seed=config.seed,
        block_seconds=config.synth_block_seconds,
        block_codes=config.synth_blocks,
    )
    print(f"synthetic corpus: {root} ({subjects} subjects)")
    return 0


def _cmd_extract(args, config: PipelineConfig) -> int:
    path = run_extract(config, args.data, args.out)
    print(f"features: {path}")
    return 0


def _cmd_train(args, config: PipelineConfig) -> int:
    models = run_train(config, Path(args.out) / "features.csv", args.out)
    print(f"models: {models}")
    return 0


def _cmd_evaluate(args, config: PipelineConfig) -> int:
    out = Path(args.out)
    report = run_evaluate(config, out / "features.csv", out / "models", out)
    paths = emit_report(report, out)
    _print_summary(report)
    print(f"report: {paths[0]}")
    return 0


def _cmd_report(args, config: PipelineConfig) -> int:
    out = Path(args.out)
    report = EvalReport.from_dict(json.loads((out / "report.json").read_text()))
    paths = emit_report(report, out)
    for p in paths:
        print(p)
    return 0


def _cmd_all(args, config: PipelineConfig) -> int:
    features = run_extract(config, args.data, args.out)
    models = run_train(config, features, args.out)
    report = run_evaluate(config, features, models, args.out)
    emit_report(report, args.out)
    _print_summary(report)
    return 0


def _cmd_modes(args, config: PipelineConfig) -> int:
    subject = load_subject(Path(args.data) / args.subject)
    record = sensor_record(subject, args.sensor)
    if record is None:
        raise ConfigError(f"{args.subject} has no {args.sensor} stream")
    spec = WindowSpec(config.window_seconds, config.overlap, record.fs)
    windows, _ = label_windows(record, subject.labels, spec, config.purity)
    match = [w for w in windows if w.index == args.window]
    if not match:
        accepted = [w.index for w in windows]
        raise ConfigError(
            f"window {args.window} not accepted; accepted indices: {accepted}"
        )
    mode_set = decompose(match[0].samples, record.fs, config.max_modes)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"mode_{r}" for r in range(mode_set.mode_count)])
        for row in mode_set.modes.T:
            writer.writerow([format(v, ".9g") for v in row])
    print(f"{mode_set.mode_count} modes ({match[0].label}) -> {args.out}")
    return 0


def _print_summary(report: EvalReport) -> None:
    print(f"protocol: {report.protocol}")
    print("size  teams  decision acc (mean+/-std)  feature acc (mean+/-std)")
    for row in report.by_size:
        print(
            f"{row['size']:>4}  {row['n_teams']:>5}  "
            f"{row['decision_mean']:.4f} +/- {row['decision_std']:.4f}        "
            f"{row['feature_mean']:.4f} +/- {row['feature_std']:.4f}"
        )
    c = report.cases
    print(
        f"cases ({c['unit']}): decision better {c['percent_decision_better']:.2f}%, "
        f"equal {c['percent_equal']:.2f}%, feature better {c['percent_feature_better']:.2f}%"
    )


_COMMANDS = {
    "synth": _cmd_synth,
    "extract": _cmd_extract,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
    "all": _cmd_all,
    "modes": _cmd_modes,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (AffectkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
