"""Synthetic multimodal corpus with known class structure.

Each subject's session is a sequence of labeled blocks; within a block every
sensor carries a class-specific tone (frequency fixed per class per sensor,
jittered a few percent per subject) over pink background noise. Short artifact
episodes suppress the tone on individual sensors at independent times, so
single-sensor classifiers make correlated-with-nothing mistakes that fusion
can vote down. Accelerometer data is written as three axis files whose
magnitude preserves the tone (gravity-dominated X axis).

Also provides the corruption helper used by the robustness benchmark: copy a
corpus and replace one sensor's files with pure white noise.
"""

from __future__ import annotations

import json
import logging
import shutil
from pathlib import Path

import numpy as np

from .data import ACC_AXES, SENSORS
from .errors import ConfigError, IngestionError
from .seeding import substream
from .windowing import LABEL_RATE_HZ

log = logging.getLogger(__name__)

#: Per-sensor generation recipe: sampling rate, class tone table (Hz for label
#: codes 1/2/3), tone amplitude, pink-noise level.
SENSOR_TABLE = {
    "ECG": {"fs": 64.0, "tones": {1: 2.0, 2: 8.0, 3: 15.0}, "amp": 1.0, "noise": 0.6},
    "EDA": {"fs": 32.0, "tones": {1: 0.8, 2: 3.5, 3: 7.0}, "amp": 1.0, "noise": 0.6},
    "EMG": {"fs": 64.0, "tones": {1: 5.0, 2: 13.0, 3: 24.0}, "amp": 1.0, "noise": 0.6},
    "BVP": {"fs": 64.0, "tones": {1: 1.2, 2: 6.0, 3: 11.0}, "amp": 1.0, "noise": 0.6},
    "ACC": {"fs": 32.0, "tones": {1: 1.6, 2: 4.5, 3: 10.0}, "amp": 0.6, "noise": 0.35},
}

_SEGMENT_SECONDS = 15.0
_ARTIFACT_PROB = 0.16
_ARTIFACT_GAIN = 0.05
_SUBJECT_JITTER = 0.04


def _pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    """1/f-shaped noise, unit variance."""
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    scale = np.zeros_like(freqs)
    scale[1:] = 1.0 / np.sqrt(freqs[1:])
    shaped = np.fft.irfft(spectrum * scale, n)
    return shaped / shaped.std()


def _tone_track(
    n: int,
    fs: float,
    codes_per_block: tuple[int, ...],
    block_seconds: float,
    tones: dict[int, float],
    amp: float,
    jitter: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Class tone with per-block phase, segment-level amplitude wobble, and
    artifact episodes where the tone all but disappears."""
    t = np.arange(n) / fs
    out = np.zeros(n)
    block_len = int(round(block_seconds * fs))
    for b, code in enumerate(codes_per_block):
        lo = b * block_len
        hi = min(n, lo + block_len)
        if lo >= hi:
            break
        freq = tones[code] * (1.0 + jitter)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        out[lo:hi] = amp * np.sin(2.0 * np.pi * freq * t[lo:hi] + phase)
    seg_len = max(1, int(round(_SEGMENT_SECONDS * fs)))
    for lo in range(0, n, seg_len):
        hi = min(n, lo + seg_len)
        gain = rng.uniform(0.75, 1.25)
        if rng.random() < _ARTIFACT_PROB:
            gain = _ARTIFACT_GAIN
        out[lo:hi] *= gain
    return out


def _write_values(path: Path, values: np.ndarray) -> None:
    lines = ["value"]
    lines.extend(format(v, ".9g") for v in values)
    path.write_text("\n".join(lines) + "\n")


def generate_synthetic(
    out_dir: Path,
    subjects: int = 15,
    seed: int = 42,
    block_seconds: float = 60.0,
    block_codes: tuple[int, ...] = (1, 2, 3, 1, 2, 3),
) -> Path:
    """Write a complete ingestion-ready corpus; returns the corpus root.

    Deterministic: every random draw comes from a named substream of ``seed``,
    so identical arguments reproduce identical bytes.
    """
    if subjects < 1:
        raise ConfigError("need at least one subject")
    if block_seconds <= 0 or not block_codes:
        raise ConfigError("blocks must be nonempty with positive duration")
    if any(c not in (1, 2, 3) for c in block_codes):
        raise ConfigError("block codes must be target classes 1, 2 or 3")
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    duration = block_seconds * len(block_codes)
    for si in range(subjects):
        subject_id = f"s{si + 1:02d}"
        sdir = root / subject_id
        sdir.mkdir(exist_ok=True)
        fs_map: dict[str, float] = {}
        for sensor in SENSORS:
            spec = SENSOR_TABLE[sensor]
            fs = spec["fs"]
            n = int(round(duration * fs))
            jitter = substream(seed, subject_id, sensor, "jitter").uniform(
                -_SUBJECT_JITTER, _SUBJECT_JITTER
            )
            rng = substream(seed, subject_id, sensor, "tone")
            tone = _tone_track(
                n, fs, block_codes, block_seconds, spec["tones"],
                spec["amp"], jitter, rng,
            )
            if sensor == "ACC":
                axis_mix = {"ACC_X": (0.98, 0.9), "ACC_Y": (0.12, 0.35), "ACC_Z": (0.08, 0.2)}
                for axis in ACC_AXES:
                    dc, gain = axis_mix[axis]
                    noise = spec["noise"] * _pink_noise(
                        n, substream(seed, subject_id, axis, "noise")
                    )
                    _write_values(sdir / f"{axis}.csv", dc + gain * tone + noise)
                    fs_map[axis] = fs
            else:
                noise = spec["noise"] * _pink_noise(
                    n, substream(seed, subject_id, sensor, "noise")
                )
                _write_values(sdir / f"{sensor}.csv", tone + noise)
                fs_map[sensor] = fs
        codes = np.repeat(
            np.asarray(block_codes, dtype=int),
            int(round(block_seconds * LABEL_RATE_HZ)),
        )
        (sdir / "labels.csv").write_text(
            "label\n" + "\n".join(str(c) for c in codes) + "\n"
        )
        (sdir / "meta.json").write_text(
            json.dumps({"fs": fs_map}, indent=2, sort_keys=True) + "\n"
        )
    log.info("wrote %d synthetic subjects to %s", subjects, root)
    return root


def corrupt_sensor(
    corpus_dir: Path, out_dir: Path, sensor: str, seed: int = 42, sigma: float = 1.5
) -> Path:
    """Copy a corpus, replacing one sensor's streams with white noise.

    The replacement keeps each file's sample count (and for ACC hits all
    three axis files); everything else is copied byte-for-byte.
    """
    if sensor not in SENSORS:
        raise IngestionError(f"unknown sensor {sensor!r}")
    src = Path(corpus_dir)
    dst = Path(out_dir)
    if not src.is_dir():
        raise IngestionError(f"{src}: not a directory")
    if dst.exists():
        shutil.rmtree(dst)
    shutil.copytree(src, dst)
    targets = ACC_AXES if sensor == "ACC" else (sensor,)
    for sdir in sorted(p for p in dst.iterdir() if p.is_dir()):
        for name in targets:
            path = sdir / f"{name}.csv"
            if not path.exists():
                continue
            n = sum(1 for _ in path.open()) - 1  # header row
            rng = substream(seed, "corrupt", sdir.name, name)
            _write_values(path, sigma * rng.standard_normal(n))
    return dst
