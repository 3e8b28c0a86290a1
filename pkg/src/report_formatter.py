"""
Report formatting for wikisustain.

Turns evaluation results into the CSV tables of the report bundle, writes
them with a fixed float format so reruns are byte-identical, and renders
the short text summary logged at the end of an evaluation.
"""
import logging
import os

import numpy as np
import pandas as pd

from src.utils import file_sha256, stable_json_dumps

FLOAT_FORMAT = "%.17g"
MANIFEST_FILE = "manifest.json"
SUMMARY_METRICS = ("f1", "macro_f1", "auroc")


def write_csv(frame, path):
    """Write a table with the bundle's float format and Unix newlines; returns the path."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def metrics_frame(result, group="All"):
    """Long table of one group's bootstrap and cross-validation estimates."""
    rows = []
    for protocol in ("bootstrap", "cv"):
        for metric, estimate in result[protocol]["metrics"].items():
            rows.append({"group": group, "protocol": protocol, "metric": metric,
                         "mean": estimate["mean"], "std": estimate["std"], "n": estimate["n"]})
    return pd.DataFrame(rows, columns=["group", "protocol", "metric", "mean", "std", "n"])


def ablation_frame(results):
    """
    One row per (group, protocol) with ``<metric>-mean``/``<metric>-std``
    pairs, the layout of the feature-group comparison table.
    """
    rows = []
    for group, result in results.items():
        for protocol in ("bootstrap", "cv"):
            row = {"group": group, "protocol": protocol, "n_features": result["n_features"]}
            for metric, estimate in result[protocol]["metrics"].items():
                row[f"{metric}-mean"] = estimate["mean"]
                row[f"{metric}-std"] = estimate["std"]
            rows.append(row)
    return pd.DataFrame(rows)


def oof_frame(articles, labels, cv_result):
    return pd.DataFrame({
        "article": list(articles),
        "label": np.asarray(labels, dtype=np.int64),
        "fold": cv_result["fold_of"],
        "probability": cv_result["oof"],
    })


def heatmap_filename(x_feature, y_feature):
    return f"heatmap_{x_feature}_{y_feature}.csv"


def format_estimate(estimate, digits=3):
    """'0.650 ± 0.020' from a mean/std pair."""
    return f"{estimate['mean']:.{digits}f} ± {estimate['std']:.{digits}f}"


def format_summary(use_case, results):
    """Plain-text table of the headline metrics per ablation group."""
    lines = [f"{use_case} results (bootstrap mean ± std)"]
    width = max((len(g) for g in results), default=5)
    for group, result in results.items():
        metrics = result["bootstrap"]["metrics"]
        cells = "  ".join(f"{m}={format_estimate(metrics[m])}" for m in SUMMARY_METRICS if m in metrics)
        lines.append(f"  {group.ljust(width)}  {cells}")
    return "\n".join(lines)


def write_manifest(report_dir, config, corpus_digest, files, extra=None):
    """
    Write ``manifest.json``: the full config, seed, corpus hash and the
    SHA-256 of every bundle file.
    """
    manifest = {
        "config": config,
        "seed": config.get("seed"),
        "use_case": config.get("use_case"),
        "corpus_hash": corpus_digest,
        "files": {os.path.basename(p): file_sha256(p) for p in sorted(files)},
        **(extra or {}),
    }
    path = os.path.join(report_dir, MANIFEST_FILE)
    with open(path, "w", encoding="utf-8") as f:
        f.write(stable_json_dumps(manifest, indent=1) + "\n")
    logging.info(f"Report manifest written with {len(manifest['files'])} files")
    return path
