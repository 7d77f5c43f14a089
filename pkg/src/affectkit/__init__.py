"""Affective-state classification from multimodal physiological signals.

Pipeline: purity-gated windowing -> adaptive Bessel-domain decomposition ->
per-mode energy/entropy features -> per-sensor classifiers -> uncertainty-
weighted decision fusion, benchmarked against feature-level concatenation.
"""

from .data import SENSORS, load_corpus, load_subject, sensor_record
from .ewt import BoundarySet, FilterBank, ModeSet, decompose, detect_boundaries
from .fbse import FbseSpectrum, bessel_j0, bessel_j1, fbse_forward, fbse_inverse, j0_roots
from .features import FeatureVector, Normalizer, feature_vector
from .fusion import TeamDecision, enumerate_teams, feature_level_fuse, fuse
from .mlp import MlpModel, SspOutput, TrainConfig, macro_f1, train
from .pipeline import EvalReport, PipelineConfig, run_all
from .synth import corrupt_sensor, generate_synthetic
from .windowing import (
    CLASSES,
    LabeledWindow,
    LabelStream,
    SignalRecord,
    WindowSpec,
    label_windows,
)

__version__ = "0.1.0"

__all__ = [
    "SENSORS",
    "CLASSES",
    "BoundarySet",
    "EvalReport",
    "FbseSpectrum",
    "FeatureVector",
    "FilterBank",
    "LabelStream",
    "LabeledWindow",
    "MlpModel",
    "ModeSet",
    "Normalizer",
    "PipelineConfig",
    "SignalRecord",
    "SspOutput",
    "TeamDecision",
    "TrainConfig",
    "WindowSpec",
    "bessel_j0",
    "bessel_j1",
    "corrupt_sensor",
    "decompose",
    "detect_boundaries",
    "enumerate_teams",
    "fbse_forward",
    "fbse_inverse",
    "feature_level_fuse",
    "feature_vector",
    "fuse",
    "generate_synthetic",
    "j0_roots",
    "label_windows",
    "load_corpus",
    "load_subject",
    "macro_f1",
    "run_all",
    "sensor_record",
    "train",
]
