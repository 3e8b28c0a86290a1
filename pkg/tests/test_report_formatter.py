import json

import numpy as np
import pandas as pd

from src.report_formatter import (ablation_frame, format_summary, heatmap_filename, metrics_frame, oof_frame,
                                  write_csv, write_manifest)
from src.utils import file_sha256


def estimates(**means):
    return {"metrics": {m: {"mean": v, "std": 0.01, "n": 10} for m, v in means.items()}}


RESULTS = {
    "Baseline": {"n_features": 1, "bootstrap": estimates(f1=0.5, auroc=0.6), "cv": estimates(f1=0.45, auroc=0.58)},
    "All": {"n_features": 326, "bootstrap": estimates(f1=0.7, auroc=0.8), "cv": estimates(f1=0.66, auroc=0.79)},
}


def test_metrics_frame_is_long():
    frame = metrics_frame(RESULTS["All"], "All")
    assert len(frame) == 4
    assert set(frame["protocol"]) == {"bootstrap", "cv"}
    assert frame.loc[(frame.protocol == "cv") & (frame.metric == "auroc"), "mean"].item() == 0.79


def test_ablation_frame_is_wide():
    frame = ablation_frame(RESULTS)
    assert list(frame["group"]) == ["Baseline", "Baseline", "All", "All"]
    assert "auroc-mean" in frame.columns and "f1-std" in frame.columns


def test_csv_floats_round_trip(tmp_path):
    value = 0.1 + 0.2
    path = write_csv(pd.DataFrame({"x": [value]}), str(tmp_path / "nested" / "t.csv"))
    assert pd.read_csv(path)["x"].item() == value
    assert b"\r\n" not in open(path, "rb").read()


def test_oof_frame():
    frame = oof_frame(["A", "B"], [1, 0], {"fold_of": np.array([0, 1]), "oof": np.array([0.9, 0.2])})
    assert list(frame.columns) == ["article", "label", "fold", "probability"]


def test_summary_and_filenames():
    text = format_summary("FA", RESULTS)
    assert text.splitlines()[0].startswith("FA results")
    assert "auroc=0.800 ± 0.010" in text
    assert heatmap_filename("Time-to-Promotion", "Num-of-Editors") == "heatmap_Time-to-Promotion_Num-of-Editors.csv"


def test_manifest_hashes_files(tmp_path):
    table = write_csv(pd.DataFrame({"x": [1]}), str(tmp_path / "metrics.csv"))
    path = write_manifest(str(tmp_path), {"seed": 3, "use_case": "GA"}, "abc", [table], {"stage": "evaluate"})
    manifest = json.loads(open(path, encoding="utf-8").read())
    assert manifest["files"] == {"metrics.csv": file_sha256(table)}
    assert (manifest["seed"], manifest["use_case"], manifest["corpus_hash"]) == (3, "GA", "abc")
    assert manifest["stage"] == "evaluate"
