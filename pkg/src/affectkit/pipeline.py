"""Benchmark orchestration: extract features, train models, compare fusion routes.

Stages (each restartable from the previous stage's artifacts):

1. extract — window every sensor stream, decompose accepted windows, write
   one features.csv row per (subject, sensor, window).
2. train — subject-disjoint split; per-sensor classifiers plus the
   concatenated-features baseline for the full sensor team; JSON checkpoints.
3. evaluate — for every sensor team, classify the held-out windows via
   (a) uncertainty-weighted decision fusion of the member classifiers and
   (b) a feature-level baseline trained on the team's concatenated features;
   tally which route wins per (team, test subject).
4. report — JSON + per-team-size CSV.

All randomness derives from config.seed through named substreams, so a config
pins every number in the report.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fbse
from .data import SENSORS, load_corpus, sensor_record
from .errors import ConfigError, IngestionError, InsufficientData
from .ewt import decompose
from .features import FeatureVector, Normalizer, feature_vector
from .fusion import enumerate_teams, feature_level_fuse, fuse
from .mlp import MlpModel, SspOutput, TrainConfig, macro_f1, train
from .seeding import derive_seed, substream
from .windowing import CLASSES, CLASS_TO_INDEX, WindowSpec, label_windows

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    """Everything a run needs; round-trips losslessly through JSON."""

    window_seconds: float = 30.0
    overlap: float = 0.75
    purity: float = 0.9
    max_modes: int = 5
    epsilon: float = 1e-12
    hidden_sizes: tuple[int, ...] = (64, 32)
    learning_rate: float = 1e-3
    dropout: float = 0.2
    l2: float = 1e-4
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    train_fraction: float = 0.70
    val_fraction: float = 0.15
    loso: bool = False
    seed: int = 42
    sensors: tuple[str, ...] = SENSORS
    synth_subjects: int = 15
    synth_block_seconds: float = 60.0
    synth_blocks: tuple[int, ...] = (1, 2, 3, 1, 2, 3)

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        self.sensors = tuple(self.sensors)
        self.synth_blocks = tuple(int(b) for b in self.synth_blocks)
        self.validate()

    def validate(self) -> None:
        if not (self.window_seconds > 0):
            raise ConfigError("window_seconds must be positive")
        if not (0.0 <= self.overlap < 1.0):
            raise ConfigError("overlap must lie in [0, 1)")
        if not (0.0 < self.purity <= 1.0):
            raise ConfigError("purity must lie in (0, 1]")
        if self.max_modes < 1:
            raise ConfigError("max_modes must be >= 1")
        if not (self.epsilon > 0):
            raise ConfigError("epsilon must be positive")
        if not (0.0 < self.train_fraction < 1.0 and 0.0 < self.val_fraction < 1.0):
            raise ConfigError("split fractions must lie in (0, 1)")
        if self.train_fraction + self.val_fraction >= 1.0:
            raise ConfigError("train + val fractions must leave room for test")
        if not self.sensors or len(set(self.sensors)) != len(self.sensors):
            raise ConfigError("sensors must be a nonempty unique tuple")
        unknown = [s for s in self.sensors if s not in SENSORS]
        if unknown:
            raise ConfigError(f"unknown sensors {unknown}")
        try:
            self.mlp_config()
        except Exception as exc:
            raise ConfigError(f"bad classifier settings: {exc}") from exc
        if self.synth_subjects < 1 or self.synth_block_seconds <= 0:
            raise ConfigError("bad synthetic-corpus settings")
        if any(b not in (1, 2, 3) for b in self.synth_blocks):
            raise ConfigError("synth_blocks must use class codes 1, 2, 3")

    def mlp_config(self, seed: int | None = None) -> TrainConfig:
        return TrainConfig(
            hidden_sizes=self.hidden_sizes,
            learning_rate=self.learning_rate,
            dropout=self.dropout,
            l2=self.l2,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed if seed is None else seed,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        d["sensors"] = list(self.sensors)
        d["synth_blocks"] = list(self.synth_blocks)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: Path) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class Fold:
    """One train/val/test subject partition."""

    name: str
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]


def split_subjects(subject_ids, config: PipelineConfig) -> list[Fold]:
    """Subject-disjoint folds: one holdout fold, or one fold per held subject.

    Holdout counts: round(train_fraction*S) / round(val_fraction*S) /
    remainder, each forced to >= 1. The permutation comes from the 'split'
    substream of config.seed. LOSO: each subject is the test fold once; the
    validation subjects are drawn from the remainder with the same fractions.
    """
    ids = sorted(set(subject_ids))
    s = len(ids)
    if s < 3:
        raise InsufficientData(f"need >= 3 subjects, got {s}")
    rng = substream(config.seed, "split")
    if not config.loso:
        order = [ids[i] for i in rng.permutation(s)]
        n_train = int(round(config.train_fraction * s))
        n_val = int(round(config.val_fraction * s))
        n_train = min(max(n_train, 1), s - 2)
        n_val = min(max(n_val, 1), s - n_train - 1)
        return [
            Fold(
                "main",
                tuple(sorted(order[:n_train])),
                tuple(sorted(order[n_train : n_train + n_val])),
                tuple(sorted(order[n_train + n_val :])),
            )
        ]
    folds = []
    for held in ids:
        rest = [i for i in ids if i != held]
        order = [rest[i] for i in substream(config.seed, "split", held).permutation(len(rest))]
        n_val = min(max(int(round(config.val_fraction * len(rest))), 1), len(rest) - 1)
        folds.append(
            Fold(
                f"loso_{held}",
                tuple(sorted(order[n_val:])),
                tuple(sorted(order[:n_val])),
                (held,),
            )
        )
    return folds


# ---------------------------------------------------------------- extraction

def extract_features(
    config: PipelineConfig, data_dir: Path
) -> tuple[list[FeatureVector], dict]:
    """Window + decompose every sensor stream; returns rows and reject stats."""
    corpus = load_corpus(data_dir)
    rows: list[FeatureVector] = []
    stats: dict[str, dict] = {}
    for subject in corpus:
        sstats: dict[str, dict] = {}
        for sensor in config.sensors:
            record = sensor_record(subject, sensor)
            if record is None:
                sstats[sensor] = {"accepted": 0, "rejected": 0, "missing": True}
                continue
            spec = WindowSpec(config.window_seconds, config.overlap, record.fs)
            if spec.window_samples > fbse.MAX_WINDOW:
                raise ConfigError(
                    f"{sensor}@{record.fs:g} Hz needs {spec.window_samples}-sample "
                    f"windows (> {fbse.MAX_WINDOW}); shorten window_seconds"
                )
            windows, rejected = label_windows(record, subject.labels, spec, config.purity)
            for lw in windows:
                mode_set = decompose(lw.samples, record.fs, config.max_modes)
                rows.append(
                    FeatureVector(
                        subject_id=subject.subject_id,
                        modality=sensor,
                        window_index=lw.index,
                        label=lw.label,
                        values=feature_vector(mode_set, config.max_modes, config.epsilon),
                    )
                )
            sstats[sensor] = {"accepted": len(windows), "rejected": rejected}
        stats[subject.subject_id] = sstats
        log.info("extracted %s", subject.subject_id)
    if not rows:
        raise InsufficientData("no window survived the purity gate")
    return rows, stats


def write_features_csv(rows: list[FeatureVector], path: Path, max_modes: int) -> None:
    dim = 3 * max_modes
    header = ["subject", "modality", "window_k", "label"] + [f"f_{i}" for i in range(dim)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for fv in rows:
            if fv.values.size != dim:
                raise ConfigError(f"feature dim {fv.values.size} != {dim}")
            writer.writerow(
                [fv.subject_id, fv.modality, fv.window_index, fv.label]
                + [format(v, ".17g") for v in fv.values]
            )


def read_features_csv(path: Path) -> list[FeatureVector]:
    path = Path(path)
    rows: list[FeatureVector] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        if header[:4] != ["subject", "modality", "window_k", "label"]:
            raise IngestionError(f"{path}: unexpected header {header[:4]}")
        dim = len(header) - 4
        for i, row in enumerate(reader, start=2):
            if len(row) != 4 + dim:
                raise IngestionError(f"{path}:{i}: expected {4 + dim} fields")
            try:
                rows.append(
                    FeatureVector(
                        subject_id=row[0],
                        modality=row[1],
                        window_index=int(row[2]),
                        label=row[3],
                        values=np.array(row[4:], dtype=float),
                    )
                )
            except ValueError as exc:
                raise IngestionError(f"{path}:{i}: {exc}") from None
    if not rows:
        raise IngestionError(f"{path}: no feature rows")
    return rows


def run_extract(config: PipelineConfig, data_dir: Path, out_dir: Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    rows, stats = extract_features(config, data_dir)
    path = out / "features.csv"
    write_features_csv(rows, path, config.max_modes)
    (out / "extract_stats.json").write_text(json.dumps(stats, indent=2) + "\n")
    log.info("extract: %d rows in %.1fs -> %s", len(rows), time.time() - started, path)
    return path


# ------------------------------------------------------------------ training

def _index_rows(rows: list[FeatureVector]):
    by_key: dict[tuple[str, int], dict[str, FeatureVector]] = {}
    for fv in rows:
        by_key.setdefault((fv.subject_id, fv.window_index), {})[fv.modality] = fv
    return by_key


def _complete_keys(by_key, sensors) -> list[tuple[str, int]]:
    """Windows for which every sensor produced an accepted feature row with a
    consistent label — the common ground both fusion routes are judged on."""
    keys = []
    for key, per_sensor in by_key.items():
        if all(s in per_sensor for s in sensors):
            if len({per_sensor[s].label for s in sensors}) == 1:
                keys.append(key)
    return sorted(keys)


def _design(by_key, keys, sensors) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated-feature design matrix + class-index targets for keys."""
    x = np.vstack(
        [
            feature_level_fuse(
                {s: by_key[k][s].values for s in sensors}, sensors
            )
            for k in keys
        ]
    )
    y = np.array([CLASS_TO_INDEX[by_key[k][sensors[0]].label] for k in keys])
    return x, y


def _keys_for(keys, subjects) -> list[tuple[str, int]]:
    pool = set(subjects)
    return [k for k in keys if k[0] in pool]


def _fit_model(config, by_key, fold, sensors, train_keys, val_keys, tag):
    if not train_keys or not val_keys:
        raise InsufficientData(f"{fold.name}/{tag}: empty train or val window set")
    x_train, y_train = _design(by_key, train_keys, sensors)
    x_val, y_val = _design(by_key, val_keys, sensors)
    normalizer = Normalizer.fit(x_train)
    tc = config.mlp_config(derive_seed(config.seed, tag, fold.name, "+".join(sensors)))
    model = train(
        normalizer.transform(x_train),
        y_train,
        normalizer.transform(x_val),
        y_val,
        tc,
        classes=CLASSES,
    )
    model.meta = {
        "kind": tag,
        "sensors": list(sensors),
        "fold": fold.name,
        "feature_dim": int(x_train.shape[1]),
        "n_train": len(train_keys),
        "n_val": len(val_keys),
    }
    return model, normalizer


def save_checkpoint(model: MlpModel, normalizer: Normalizer, path: Path) -> None:
    payload = model.to_dict()
    payload["normalizer"] = normalizer.to_dict()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload) + "\n")


def load_checkpoint(path: Path) -> tuple[MlpModel, Normalizer]:
    data = json.loads(Path(path).read_text())
    return MlpModel.from_dict(data), Normalizer.from_dict(data["normalizer"])


def _team_key(team) -> str:
    return "+".join(team)


def run_train(config: PipelineConfig, features_path: Path, out_dir: Path) -> Path:
    """Train per-sensor classifiers and the full-team feature baseline.

    Writes models/<fold>/sensor_<S>.json and models/<fold>/baseline_<team>.json
    plus models/split.json describing the folds.
    """
    out = Path(out_dir)
    rows = read_features_csv(features_path)
    by_key = _index_rows(rows)
    complete = _complete_keys(by_key, config.sensors)
    if not complete:
        raise InsufficientData("no window is covered by every configured sensor")
    subjects = sorted({k[0] for k in complete})
    folds = split_subjects(subjects, config)
    models_dir = out / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    (models_dir / "split.json").write_text(
        json.dumps(
            {
                "protocol": "loso" if config.loso else "holdout",
                "seed": config.seed,
                "folds": [asdict(f) for f in folds],
            },
            indent=2,
        )
        + "\n"
    )
    full_team = tuple(config.sensors)
    for fold in folds:
        train_keys = _keys_for(complete, fold.train)
        val_keys = _keys_for(complete, fold.val)
        for sensor in config.sensors:
            model, norm = _fit_model(
                config, by_key, fold, (sensor,), train_keys, val_keys, "sensor"
            )
            save_checkpoint(model, norm, models_dir / fold.name / f"sensor_{sensor}.json")
        model, norm = _fit_model(
            config, by_key, fold, full_team, train_keys, val_keys, "baseline"
        )
        save_checkpoint(
            model, norm, models_dir / fold.name / f"baseline_{_team_key(full_team)}.json"
        )
        log.info("trained fold %s (%d sensors + baseline)", fold.name, len(config.sensors))
    return models_dir


# ---------------------------------------------------------------- evaluation

@dataclass
class EvalReport:
    """Full benchmark result; serializes to JSON."""

    protocol: str
    config: dict
    folds: list[dict]
    teams: list[dict]
    by_size: list[dict]
    cases: dict
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(**data)

    def team_entry(self, team) -> dict:
        key = list(team)
        for entry in self.teams:
            if entry["team"] == key:
                return entry
        raise KeyError(f"no team {team}")


def _confusion(y_true, y_pred, n_classes=len(CLASSES)) -> np.ndarray:
    m = np.zeros((n_classes, n_classes), dtype=int)
    for t, p in zip(y_true, y_pred):
        m[t, p] += 1
    return m


def _baseline_for(config, by_key, fold, team, train_keys, val_keys, models_dir):
    """Load the team's feature baseline, training + persisting it on first use."""
    path = models_dir / fold.name / f"baseline_{_team_key(team)}.json"
    if path.exists():
        return load_checkpoint(path)
    model, norm = _fit_model(config, by_key, fold, team, train_keys, val_keys, "baseline")
    save_checkpoint(model, norm, path)
    return model, norm


def run_evaluate(
    config: PipelineConfig, features_path: Path, models_dir: Path, out_dir: Path
) -> EvalReport:
    """Score every sensor team both ways on held-out subjects.

    Decision route: per-sensor class distributions fused with uncertainty
    weights. Feature route: one classifier over the team's concatenated
    features (trained/persisted on demand for sub-teams). Both routes see the
    identical sensor-complete window set, so per-(team, subject) correctness
    counts are directly comparable.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    models_dir = Path(models_dir)
    rows = read_features_csv(features_path)
    by_key = _index_rows(rows)
    complete = _complete_keys(by_key, config.sensors)
    split_info = json.loads((models_dir / "split.json").read_text())
    folds = [Fold(f["name"], tuple(f["train"]), tuple(f["val"]), tuple(f["test"]))
             for f in split_info["folds"]]
    teams = enumerate_teams(config.sensors)
    full_team = tuple(config.sensors)

    team_true: dict[tuple, list[int]] = {t: [] for t in teams}
    team_pred_d: dict[tuple, list[int]] = {t: [] for t in teams}
    team_pred_f: dict[tuple, list[int]] = {t: [] for t in teams}
    cases: list[dict] = []
    audit_lines: list[str] = []

    for fold in folds:
        train_keys = _keys_for(complete, fold.train)
        val_keys = _keys_for(complete, fold.val)
        test_keys = _keys_for(complete, fold.test)
        if not test_keys:
            raise InsufficientData(f"{fold.name}: no test windows")
        ssp = {}
        for sensor in config.sensors:
            model, norm = load_checkpoint(
                models_dir / fold.name / f"sensor_{sensor}.json"
            )
            x, _ = _design(by_key, test_keys, (sensor,))
            ssp[sensor] = (model.predict_proba(norm.transform(x)), model.f1)
        y_true = np.array(
            [CLASS_TO_INDEX[by_key[k][config.sensors[0]].label] for k in test_keys]
        )
        for team in teams:
            decisions = []
            for i, key in enumerate(test_keys):
                outputs = {
                    s: SspOutput(ssp[s][0][i], ssp[s][1]) for s in team
                }
                decision = fuse(outputs)
                decisions.append(decision.predicted_class)
                if team == full_team:
                    record = decision.to_dict()
                    record.update(
                        subject=key[0], window_k=key[1],
                        label=int(y_true[i]), fold=fold.name,
                    )
                    audit_lines.append(json.dumps(record))
            model, norm = _baseline_for(
                config, by_key, fold, team, train_keys, val_keys, models_dir
            )
            x, _ = _design(by_key, test_keys, team)
            feature_pred = model.predict(norm.transform(x))
            team_true[team].extend(y_true.tolist())
            team_pred_d[team].extend(decisions)
            team_pred_f[team].extend(feature_pred.tolist())
            for subject in fold.test:
                mask = np.array([k[0] == subject for k in test_keys])
                if not mask.any():
                    continue
                d_correct = int(np.sum((np.array(decisions) == y_true) & mask))
                f_correct = int(np.sum((feature_pred == y_true) & mask))
                cases.append(
                    {
                        "team": list(team),
                        "subject": subject,
                        "fold": fold.name,
                        "windows": int(mask.sum()),
                        "decision_correct": d_correct,
                        "feature_correct": f_correct,
                    }
                )
        log.info("evaluated fold %s (%d windows, %d teams)",
                 fold.name, len(test_keys), len(teams))

    team_entries = []
    for team in teams:
        true = np.array(team_true[team])
        pred_d = np.array(team_pred_d[team])
        pred_f = np.array(team_pred_f[team])
        team_entries.append(
            {
                "team": list(team),
                "size": len(team),
                "n_windows": int(true.size),
                "decision_accuracy": float(np.mean(pred_d == true)),
                "feature_accuracy": float(np.mean(pred_f == true)),
                "decision_macro_f1": macro_f1(pred_d, true),
                "feature_macro_f1": macro_f1(pred_f, true),
                "decision_confusion": _confusion(true, pred_d).tolist(),
                "feature_confusion": _confusion(true, pred_f).tolist(),
            }
        )
    by_size = []
    for size in range(1, len(config.sensors) + 1):
        accs_d = [e["decision_accuracy"] for e in team_entries if e["size"] == size]
        accs_f = [e["feature_accuracy"] for e in team_entries if e["size"] == size]
        by_size.append(
            {
                "size": size,
                "n_teams": len(accs_d),
                "decision_mean": float(np.mean(accs_d)),
                "decision_std": float(np.std(accs_d)),
                "feature_mean": float(np.mean(accs_f)),
                "feature_std": float(np.std(accs_f)),
            }
        )
    wins_d = sum(1 for c in cases if c["decision_correct"] > c["feature_correct"])
    ties = sum(1 for c in cases if c["decision_correct"] == c["feature_correct"])
    wins_f = len(cases) - wins_d - ties
    total = len(cases)
    report = EvalReport(
        protocol=split_info["protocol"],
        config=config.to_dict(),
        # JSON-native fold dicts so to_dict() survives a JSON round trip
        folds=[
            {"name": f.name, "train": list(f.train), "val": list(f.val),
             "test": list(f.test)}
            for f in folds
        ],
        teams=team_entries,
        by_size=by_size,
        cases={
            "unit": "(team, test subject)",
            "total": total,
            "decision_better": wins_d,
            "equal": ties,
            "feature_better": wins_f,
            "percent_decision_better": 100.0 * wins_d / total,
            "percent_equal": 100.0 * ties / total,
            "percent_feature_better": 100.0 * wins_f / total,
            "detail": cases,
        },
        notes={
            "macro_f1_convention": "classes absent from truth and predictions score 0",
            "window_set": "windows accepted by every configured sensor",
        },
    )
    (out / "fusion_audit.jsonl").write_text("\n".join(audit_lines) + "\n")
    return report


def emit_report(report: EvalReport, out_dir: Path) -> list[Path]:
    """Write report.json and the per-size CSV; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    csv_path = out / "report_by_size.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["size", "n_teams", "decision_mean", "decision_std",
             "feature_mean", "feature_std"]
        )
        for row in report.by_size:
            writer.writerow(
                [row["size"], row["n_teams"],
                 format(row["decision_mean"], ".6f"), format(row["decision_std"], ".6f"),
                 format(row["feature_mean"], ".6f"), format(row["feature_std"], ".6f")]
            )
    return [json_path, csv_path]


def run_all(config: PipelineConfig, data_dir: Path, out_dir: Path) -> EvalReport:
    """extract -> train -> evaluate -> report in one call."""
    out = Path(out_dir)
    features = run_extract(config, data_dir, out)
    models = run_train(config, features, out)
    report = run_evaluate(config, features, models, out)
    emit_report(report, out)
    return report
