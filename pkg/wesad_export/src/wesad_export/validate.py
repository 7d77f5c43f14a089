"""Self-consistency checks for a converted corpus directory.

Four checks per subject, each pass/fail with a one-line detail:

    metadata   meta.json parses, lists positive rates, and matches the CSVs
    headers    every signal CSV starts with 'value', labels.csv with 'label'
    parseable  every data cell is numeric (labels: integer)
    duration   rows/fs agree across streams, labels at 700 Hz, within 1 s

Diagnostic only — it never raises on bad data, it reports it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .convert import LABEL_RATE_HZ


@dataclass
class ValidationReport:
    checks: list[dict] = field(default_factory=list)

    def add(self, subject: str, check: str, ok: bool, detail: str = "") -> None:
        self.checks.append(
            {"subject": subject, "check": check, "ok": bool(ok), "detail": detail}
        )

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c["ok"] for c in self.checks)

    def render(self) -> str:
        lines = [f"{'subject':<10} {'check':<10} {'result':<6} detail"]
        for c in self.checks:
            status = "PASS" if c["ok"] else "FAIL"
            lines.append(
                f"{c['subject']:<10} {c['check']:<10} {status:<6} {c['detail']}"
            )
        verdict = "all checks passed" if self.passed else "FAILURES present"
        lines.append(verdict)
        return "\n".join(lines)


def _read_lines(path: Path):
    lines = path.read_text().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def _check_subject(sdir: Path, report: ValidationReport) -> None:
    subject = sdir.name

    meta_ok, fs_map, detail = True, {}, ""
    try:
        meta = json.loads((sdir / "meta.json").read_text())
        fs_map = meta.get("fs") or {}
        if not isinstance(fs_map, dict) or not fs_map:
            meta_ok, detail = False, "meta.json has no 'fs' map"
        elif any(not isinstance(v, (int, float)) or v <= 0 for v in fs_map.values()):
            meta_ok, detail = False, "non-positive sampling rate"
    except (OSError, json.JSONDecodeError) as exc:
        meta_ok, detail = False, f"meta.json unreadable: {exc}"
    if meta_ok:
        csvs = {p.stem for p in sdir.glob("*.csv")} - {"labels"}
        missing = sorted(set(fs_map) - csvs)
        extra = sorted(csvs - set(fs_map))
        if missing or extra:
            meta_ok = False
            detail = f"meta vs files: missing {missing}, unlisted {extra}"
    report.add(subject, "metadata", meta_ok,
               detail or f"{len(fs_map)} modalities")

    header_ok, parse_ok = True, True
    header_detail, parse_detail = "", ""
    durations: dict[str, float] = {}
    for path in sorted(sdir.glob("*.csv")):
        is_labels = path.stem == "labels"
        expected = "label" if is_labels else "value"
        try:
            lines = _read_lines(path)
        except OSError as exc:
            header_ok, header_detail = False, f"{path.name}: {exc}"
            continue
        if not lines or lines[0].strip() != expected:
            header_ok = False
            header_detail = header_detail or f"{path.name}: bad header"
            continue
        body = lines[1:]
        caster = int if is_labels else float
        try:
            for cell in body:
                caster(cell)
        except ValueError:
            parse_ok = False
            parse_detail = parse_detail or f"{path.name}: non-numeric cell"
        fs = LABEL_RATE_HZ if is_labels else fs_map.get(path.stem)
        if fs:
            durations[path.stem] = len(body) / fs
    report.add(subject, "headers", header_ok, header_detail)
    report.add(subject, "parseable", parse_ok, parse_detail)

    if durations:
        spread = max(durations.values()) - min(durations.values())
        report.add(
            subject, "duration", spread <= 1.0,
            f"spread {spread:.2f}s over {len(durations)} streams",
        )
    else:
        report.add(subject, "duration", False, "no streams with known rate")


def validate(out_dir: Path) -> ValidationReport:
    """Check every subject directory under out_dir; returns the full report."""
    root = Path(out_dir)
    report = ValidationReport()
    if not root.is_dir():
        report.add("-", "layout", False, f"{root} is not a directory")
        return report
    subject_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not subject_dirs:
        report.add("-", "layout", False, "no subject directories")
        return report
    for sdir in subject_dirs:
        _check_subject(sdir, report)
    return report
