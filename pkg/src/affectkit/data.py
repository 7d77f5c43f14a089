"""Corpus ingestion: one directory per subject.

Layout::

    <root>/<subject_id>/
        <MODALITY>.csv   one 'value' column per signal (ECG, EDA, EMG, BVP,
                         ACC_X, ACC_Y, ACC_Z as available)
        labels.csv       one 'label' column of integer codes at 700 Hz
        meta.json        {"fs": {"<MODALITY>": <rate>, ...}}

The fusion layer works with five sensors: ECG, EDA, EMG, BVP and ACC, where
ACC is the Euclidean magnitude of the three axis records.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestionError
from .windowing import LabelStream, MODALITIES, SignalRecord

log = logging.getLogger(__name__)

#: Sensors as the fusion layer sees them.
SENSORS = ("ECG", "EDA", "EMG", "BVP", "ACC")
ACC_AXES = ("ACC_X", "ACC_Y", "ACC_Z")


@dataclass(frozen=True)
class Subject:
    subject_id: str
    records: dict[str, SignalRecord]
    labels: LabelStream


def _read_column(path: Path, header: str, dtype) -> np.ndarray:
    """One-column CSV -> array; errors carry file and line diagnostics."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise IngestionError(f"{path}: empty file")
    if lines[0].strip() != header:
        raise IngestionError(
            f"{path}:1: expected header {header!r}, found {lines[0].strip()!r}"
        )
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    try:
        return np.array(body, dtype=dtype)
    except ValueError:
        for i, cell in enumerate(body, start=2):
            try:
                dtype(cell)
            except ValueError:
                raise IngestionError(
                    f"{path}:{i}: could not parse {cell.strip()!r}"
                ) from None
        raise IngestionError(f"{path}: unparseable numeric column")


def load_subject(subject_dir: Path) -> Subject:
    """Read one subject directory into records + label stream.

    Requires meta.json and labels.csv; every modality listed in meta must
    have its CSV present and vice versa.
    """
    subject_dir = Path(subject_dir)
    subject_id = subject_dir.name
    meta_path = subject_dir / "meta.json"
    try:
        meta = json.loads(meta_path.read_text())
    except OSError as exc:
        raise IngestionError(f"{meta_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestionError(f"{meta_path}: invalid JSON ({exc})") from exc
    fs_map = meta.get("fs")
    if not isinstance(fs_map, dict) or not fs_map:
        raise IngestionError(f"{meta_path}: missing or empty 'fs' map")

    records: dict[str, SignalRecord] = {}
    for modality, fs in sorted(fs_map.items()):
        if modality not in MODALITIES:
            raise IngestionError(f"{meta_path}: unknown modality {modality!r}")
        csv_path = subject_dir / f"{modality}.csv"
        if not csv_path.exists():
            raise IngestionError(f"{csv_path}: listed in meta.json but missing")
        samples = _read_column(csv_path, "value", float)
        if not np.all(np.isfinite(samples)):
            raise IngestionError(f"{csv_path}: non-finite sample values")
        records[modality] = SignalRecord(subject_id, modality, float(fs), samples)

    for csv_path in subject_dir.glob("*.csv"):
        name = csv_path.stem
        if name != "labels" and name not in fs_map:
            raise IngestionError(f"{csv_path}: present but absent from meta.json")

    labels = _read_column(subject_dir / "labels.csv", "label", int)
    if labels.size == 0:
        raise IngestionError(f"{subject_dir / 'labels.csv'}: no label rows")
    return Subject(subject_id, records, LabelStream(subject_id, labels))


def load_corpus(root: Path) -> list[Subject]:
    """All subject directories under root, sorted by subject id."""
    root = Path(root)
    if not root.is_dir():
        raise IngestionError(f"{root}: not a directory")
    dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not dirs:
        raise IngestionError(f"{root}: contains no subject directories")
    subjects = [load_subject(d) for d in dirs]
    log.info("loaded %d subjects from %s", len(subjects), root)
    return subjects


def sensor_record(subject: Subject, sensor: str) -> SignalRecord | None:
    """The record a fusion-level sensor reads from; None when unavailable.

    Direct modalities map straight through; the ACC sensor is the magnitude
    sqrt(x^2 + y^2 + z^2) of the three axis records (which must agree in
    sampling rate and length).
    """
    if sensor in SENSORS and sensor != "ACC":
        return subject.records.get(sensor)
    if sensor == "ACC":
        axes = [subject.records.get(a) for a in ACC_AXES]
        if any(a is None for a in axes):
            return None
        fs = {a.fs for a in axes}
        lengths = {a.samples.size for a in axes}
        if len(fs) != 1 or len(lengths) != 1:
            raise IngestionError(
                f"{subject.subject_id}: ACC axes disagree in rate or length"
            )
        magnitude = np.sqrt(sum(a.samples**2 for a in axes))
        return SignalRecord(subject.subject_id, "ACC", axes[0].fs, magnitude)
    raise IngestionError(f"unknown sensor {sensor!r}")
