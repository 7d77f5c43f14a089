"""Command-line entry point.

::

    wesad-export convert --in <archive_dir> --out <dir> [--modalities ecg,eda,...]
    wesad-export validate <dir>

convert exits 0 on success, 1 on a conversion failure. validate prints the
per-subject check table and exits 0 only when every check passes.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .convert import (
    DEFAULT_MODALITIES,
    WesadExportError,
    convert,
    find_archives,
)
from .validate import validate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wesad-export",
        description="Convert WESAD subject archives into per-modality CSV "
        "directories and check the result.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="archives -> ingestion directories")
    p.add_argument("--in", dest="in_dir", type=Path, required=True,
                   help="directory holding subject archives (*.pkl)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument(
        "--modalities",
        default=",".join(DEFAULT_MODALITIES),
        help="comma-separated subset of %s" % ",".join(DEFAULT_MODALITIES),
    )

    p = sub.add_parser("validate", help="check a converted directory")
    p.add_argument("out_dir", type=Path)
    return parser


def _cmd_convert(args) -> int:
    modalities = tuple(m for m in args.modalities.split(",") if m)
    archives = find_archives(args.in_dir)
    for archive in archives:
        subject_dir = convert(archive, args.out, modalities)
        print(f"{archive} -> {subject_dir}")
    print(f"converted {len(archives)} subject(s)")
    return 0


def _cmd_validate(args) -> int:
    report = validate(args.out_dir)
    print(report.render())
    return 0 if report.passed else 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "convert":
            return _cmd_convert(args)
        return _cmd_validate(args)
    except (WesadExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
