"""Fabricated subject archives shaped like the dataset's native pickles."""

import pickle

import numpy as np
import pytest


def make_archive_data(seconds=2.0, seed=0, with_bvp=True, bvp_seconds=None,
                      subject="S2"):
    rng = np.random.default_rng(seed)
    n700 = int(round(700 * seconds))
    n64 = int(round(64 * (bvp_seconds if bvp_seconds is not None else seconds)))
    chest = {
        "ECG": rng.standard_normal((n700, 1)),
        "EDA": rng.uniform(0.1, 20.0, (n700, 1)),
        "EMG": rng.standard_normal((n700, 1)),
        "ACC": rng.uniform(-2.0, 2.0, (n700, 3)),
        # streams the converter must ignore
        "Temp": rng.uniform(30.0, 36.0, (n700, 1)),
        "Resp": rng.standard_normal((n700, 1)),
    }
    wrist = {
        "ACC": rng.uniform(-2.0, 2.0, (int(round(32 * seconds)), 3)),
        "EDA": rng.uniform(0.1, 20.0, (int(round(4 * seconds)), 1)),
        "TEMP": rng.uniform(30.0, 36.0, (int(round(4 * seconds)), 1)),
    }
    if with_bvp:
        wrist["BVP"] = rng.standard_normal((n64, 1))
    labels = np.repeat([0, 1, 2, 3], n700 // 4 + 1)[:n700].astype(np.int64)
    return {
        "subject": subject,
        "signal": {"chest": chest, "wrist": wrist},
        "label": labels,
    }


def write_archive(root, data):
    subject = data["subject"]
    sdir = root / subject
    sdir.mkdir(parents=True, exist_ok=True)
    path = sdir / f"{subject}.pkl"
    with open(path, "wb") as fh:
        pickle.dump(data, fh, protocol=2)
    return path


@pytest.fixture()
def archive_dir(tmp_path):
    """Two-subject archive tree using the native S*/S*.pkl nesting."""
    root = tmp_path / "archives"
    for i, subject in enumerate(("S2", "S3")):
        write_archive(root, make_archive_data(seed=i, subject=subject))
    return root
