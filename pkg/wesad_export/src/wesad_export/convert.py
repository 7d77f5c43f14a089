"""Turn one WESAD subject archive into the classifier's ingestion layout.

Each subject ships as a Python pickle holding ``signal.chest`` streams sampled
at 700 Hz, ``signal.wrist`` streams at device rates, and a 700 Hz ``label``
vector. The five sensors the classification pipeline consumes map to:

    ecg, eda, emg  ->  chest ECG / EDA / EMG        700 Hz
    acc            ->  chest ACC, split per axis    700 Hz
    bvp            ->  wrist BVP                     64 Hz

Output per subject: ``<MODALITY>.csv`` (one ``value`` column, 9 significant
digits), ``labels.csv`` (codes verbatim), and ``meta.json`` with the sampling
rates. The layout — not any shared code — is the contract with the consumer.
"""

from __future__ import annotations

import json
import pickle
from pathlib import Path

import numpy as np


class WesadExportError(Exception):
    """Base for converter failures."""


class MissingModality(WesadExportError):
    """A requested modality is absent from the archive (or unknown)."""


class CorruptArchive(WesadExportError):
    """Archive unreadable or internally inconsistent."""


LABEL_RATE_HZ = 700.0

#: modality request name -> (signal group, key in group, sampling rate)
MODALITY_TABLE = {
    "ecg": ("chest", "ECG", 700.0),
    "eda": ("chest", "EDA", 700.0),
    "emg": ("chest", "EMG", 700.0),
    "acc": ("chest", "ACC", 700.0),
    "bvp": ("wrist", "BVP", 64.0),
}

DEFAULT_MODALITIES = ("ecg", "eda", "emg", "bvp", "acc")

ACC_AXES = ("ACC_X", "ACC_Y", "ACC_Z")


def load_archive(path: Path) -> dict:
    """Unpickle one subject archive (legacy byte strings tolerated)."""
    try:
        with open(path, "rb") as fh:
            data = pickle.load(fh, encoding="latin1")
    except OSError as exc:
        raise CorruptArchive(f"{path}: {exc}") from exc
    except (pickle.UnpicklingError, EOFError, AttributeError, ValueError) as exc:
        raise CorruptArchive(f"{path}: not a readable archive ({exc})") from exc
    if not isinstance(data, dict) or "signal" not in data or "label" not in data:
        raise CorruptArchive(f"{path}: missing 'signal' or 'label' entries")
    return data


def _column(stream, where: str) -> np.ndarray:
    arr = np.asarray(stream, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1 or arr.size == 0:
        raise CorruptArchive(f"{where}: expected a nonempty column, got {arr.shape}")
    return arr


def _write_column(path: Path, header: str, cells) -> None:
    lines = [header]
    lines.extend(cells)
    path.write_text("\n".join(lines) + "\n")


def find_archives(in_dir: Path) -> list[Path]:
    """Subject pickles under in_dir: either the dir itself holds one, or each
    subject subdirectory does (the dataset's native S2/S2.pkl nesting)."""
    root = Path(in_dir)
    if not root.is_dir():
        raise CorruptArchive(f"{root}: not a directory")
    direct = sorted(root.glob("*.pkl"))
    if direct:
        return direct
    nested = sorted(p for sub in root.iterdir() if sub.is_dir()
                    for p in sub.glob("*.pkl"))
    if not nested:
        raise CorruptArchive(f"{root}: no subject archives (*.pkl) found")
    return nested


def convert(
    archive: Path,
    out_dir: Path,
    modalities=DEFAULT_MODALITIES,
) -> Path:
    """Write one subject's ingestion directory; returns its path.

    Streams are rendered at 9 significant digits; labels verbatim. All
    emitted streams must agree on session duration within 1 s, labels
    included, or the archive is rejected as corrupt.
    """
    archive = Path(archive)
    data = load_archive(archive)
    requested = [m.lower() for m in modalities]
    if not requested:
        raise MissingModality("no modalities requested")
    unknown = [m for m in requested if m not in MODALITY_TABLE]
    if unknown:
        raise MissingModality(
            f"unknown modalities {unknown}; available: {sorted(MODALITY_TABLE)}"
        )

    subject_id = str(data.get("subject") or archive.stem)
    labels = np.asarray(data["label"]).ravel()
    if labels.size == 0:
        raise CorruptArchive(f"{archive}: empty label vector")

    columns: dict[str, tuple[float, np.ndarray]] = {}
    signal = data["signal"]
    for name in requested:
        group, key, fs = MODALITY_TABLE[name]
        try:
            stream = signal[group][key]
        except (KeyError, TypeError):
            raise MissingModality(
                f"{archive}: no {group}/{key} stream for modality {name!r}"
            ) from None
        if name == "acc":
            arr = np.asarray(stream, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
                raise CorruptArchive(
                    f"{archive}: chest ACC must be (n, 3), got {arr.shape}"
                )
            for i, axis in enumerate(ACC_AXES):
                columns[axis] = (fs, arr[:, i])
        else:
            columns[key] = (fs, _column(stream, f"{archive}:{group}/{key}"))

    durations = {m: arr.size / fs for m, (fs, arr) in columns.items()}
    durations["labels"] = labels.size / LABEL_RATE_HZ
    spread = max(durations.values()) - min(durations.values())
    if spread > 1.0:
        detail = ", ".join(f"{m}={d:.2f}s" for m, d in sorted(durations.items()))
        raise CorruptArchive(f"{archive}: stream durations disagree ({detail})")

    subject_dir = Path(out_dir) / subject_id
    subject_dir.mkdir(parents=True, exist_ok=True)
    for modality in sorted(columns):
        fs, arr = columns[modality]
        _write_column(
            subject_dir / f"{modality}.csv",
            "value",
            (format(v, ".9g") for v in arr),
        )
    _write_column(
        subject_dir / "labels.csv", "label", (str(int(v)) for v in labels)
    )
    fs_map = {m: columns[m][0] for m in columns}
    (subject_dir / "meta.json").write_text(
        json.dumps({"fs": fs_map}, indent=2, sort_keys=True) + "\n"
    )
    return subject_dir
