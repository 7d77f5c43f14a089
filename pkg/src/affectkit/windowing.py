"""Segmentation of physiological streams into purity-gated labeled windows.

Signals arrive at per-modality sampling rates; the label track is a separate
stream at a fixed 700 Hz. A window of ``W`` samples starting at signal index
``k*H`` maps onto the label indices ``[round(k*H*700/fs), round((k*H+W)*700/fs))``
and is kept only when a single target class covers at least ``rho`` of that
range (majority vote with a purity gate); everything else is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRange, InvalidSpec, StreamTooShort

#: Modalities a subject directory may contain.
MODALITIES = ("ECG", "EDA", "EMG", "BVP", "ACC_X", "ACC_Y", "ACC_Z")

#: Record names a SignalRecord accepts: stored modalities plus the derived
#: accelerometer-magnitude stream the fusion layer works with.
RECORD_MODALITIES = MODALITIES + ("ACC",)

#: Sampling rate of the label stream (Hz).
LABEL_RATE_HZ = 700.0

#: Target classes in canonical order; indices 0..2 are used everywhere.
CLASSES = ("Baseline", "Stress", "Amusement")

#: Raw label codes that map to target classes. All other codes are non-target.
CODE_TO_CLASS = {1: "Baseline", 2: "Stress", 3: "Amusement"}
CLASS_TO_INDEX = {name: i for i, name in enumerate(CLASSES)}


@dataclass(frozen=True)
class SignalRecord:
    """One modality's samples for one subject. Treated as immutable."""

    subject_id: str
    modality: str
    fs: float
    samples: np.ndarray

    def __post_init__(self):
        if self.modality not in RECORD_MODALITIES:
            raise InvalidSpec(f"unknown modality {self.modality!r}")
        if not np.isfinite(self.fs) or self.fs <= 0:
            raise InvalidSpec(f"sampling rate must be positive, got {self.fs}")
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=float)
        )
        if self.samples.ndim != 1:
            raise InvalidSpec("samples must be one-dimensional")

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.fs


@dataclass(frozen=True)
class LabelStream:
    """Integer label codes at :data:`LABEL_RATE_HZ`."""

    subject_id: str
    labels: np.ndarray
    fs: float = LABEL_RATE_HZ

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 1:
            raise InvalidSpec("labels must be one-dimensional")
        if arr.size and not np.all(arr == arr.astype(int)):
            raise InvalidSpec("labels must be integer codes")
        object.__setattr__(self, "labels", arr.astype(int))


@dataclass(frozen=True)
class WindowSpec:
    """Window geometry for one sampling rate.

    ``window_samples`` is W = round(length_seconds * fs) and
    ``hop_samples`` is H = max(1, round((1 - overlap) * W)).
    """

    length_seconds: float
    overlap: float
    fs: float
    window_samples: int = field(init=False)
    hop_samples: int = field(init=False)

    def __post_init__(self):
        if not (self.length_seconds > 0 and np.isfinite(self.length_seconds)):
            raise InvalidSpec("window length must be positive")
        if not (0.0 <= self.overlap < 1.0):
            raise InvalidSpec("overlap must lie in [0, 1)")
        if not (self.fs > 0 and np.isfinite(self.fs)):
            raise InvalidSpec("sampling rate must be positive")
        w = int(round(self.length_seconds * self.fs))
        if w < 2:
            raise InvalidSpec(f"window of {w} samples is too short")
        h = max(1, int(round((1.0 - self.overlap) * w)))
        object.__setattr__(self, "window_samples", w)
        object.__setattr__(self, "hop_samples", h)


@dataclass(frozen=True)
class LabeledWindow:
    """An accepted window: samples plus the majority class and its purity."""

    subject_id: str
    modality: str
    index: int
    samples: np.ndarray
    label: str
    purity: float


def segment(record: SignalRecord, spec: WindowSpec) -> list[tuple[int, np.ndarray]]:
    """Slice a record into overlapping windows.

    Returns ``(k, samples)`` pairs for k = 0 .. floor((N - W) / H); each slice
    is a copy of ``record.samples[k*H : k*H + W]``.

    Raises StreamTooShort when the record holds fewer than W samples.
    """
    w, h = spec.window_samples, spec.hop_samples
    n = record.samples.size
    if n < w:
        raise StreamTooShort(
            f"{record.subject_id}/{record.modality}: {n} samples < window {w}"
        )
    count = (n - w) // h + 1
    return [(k, record.samples[k * h : k * h + w].copy()) for k in range(count)]


def label_index_range(k: int, spec: WindowSpec, fs_signal: float) -> range:
    """Label-stream index range covered by window k of a signal at fs_signal.

    start = round(k*H*700/fs), stop = round((k*H + W)*700/fs); the range is
    never empty (stop is bumped to start+1 if rounding collapses it).
    """
    if k < 0:
        raise InvalidSpec("window index must be nonnegative")
    if not (fs_signal > 0 and np.isfinite(fs_signal)):
        raise InvalidSpec("sampling rate must be positive")
    ratio = LABEL_RATE_HZ / fs_signal
    start = int(round(k * spec.hop_samples * ratio))
    stop = int(round((k * spec.hop_samples + spec.window_samples) * ratio))
    if stop <= start:
        stop = start + 1
    return range(start, stop)


def majority_label(codes: np.ndarray, rho: float) -> tuple[str, float] | None:
    """Purity-gated majority vote over raw label codes.

    Returns ``(class_name, purity)`` when one target code (1, 2 or 3) is the
    strict plurality AND covers at least ``rho`` of the range; otherwise None
    (reject). Ties between target codes reject; a non-target code holding the
    plurality rejects.

    Raises EmptyRange on an empty input.
    """
    arr = np.asarray(codes)
    if arr.size == 0:
        raise EmptyRange("label range contains no samples")
    if not (0.0 < rho <= 1.0):
        raise InvalidSpec("purity threshold must lie in (0, 1]")
    values, counts = np.unique(arr, return_counts=True)
    by_code = dict(zip(values.tolist(), counts.tolist()))
    target = {c: by_code.get(c, 0) for c in CODE_TO_CLASS}
    best_code = max(target, key=lambda c: (target[c], -c))
    best = target[best_code]
    if best == 0:
        return None
    # strict plurality: no other code (target or not) may match the count
    for code, cnt in by_code.items():
        if code != best_code and cnt >= best:
            return None
    purity = best / arr.size
    if purity < rho:
        return None
    return CODE_TO_CLASS[best_code], purity


def label_windows(
    record: SignalRecord,
    labels: LabelStream,
    spec: WindowSpec,
    rho: float,
) -> tuple[list[LabeledWindow], int]:
    """Segment a record and attach purity-gated labels.

    Windows whose label range falls past the end of the label stream are
    clipped; a fully out-of-range window is rejected. Returns the accepted
    windows (ascending k) and the number rejected.
    """
    accepted: list[LabeledWindow] = []
    rejected = 0
    codes = labels.labels
    for k, samples in segment(record, spec):
        rng = label_index_range(k, spec, record.fs)
        lo, hi = rng.start, min(rng.stop, codes.size)
        if hi <= lo:
            rejected += 1
            continue
        vote = majority_label(codes[lo:hi], rho)
        if vote is None:
            rejected += 1
            continue
        label, purity = vote
        accepted.append(
            LabeledWindow(
                subject_id=record.subject_id,
                modality=record.modality,
                index=k,
                samples=samples,
                label=label,
                purity=purity,
            )
        )
    return accepted, rejected
