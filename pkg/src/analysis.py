"""
Post-hoc analyses over the modeled population: two-feature heatmaps of
the unsustainability rate, the false-positive review analysis, the
at-risk ranking of recently promoted articles, the promotion-path gap and
dataset statistics.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from src.errors import EvaluationError
from src.gbt import predict_proba
from src.records import FA

SUPPRESSED = "SUPPRESSED"
MIN_CELL_COUNT = 10
BINNING_MODES = ("quantile", "fixed")
STAT_COLUMNS = ("Time-to-Promotion", "Num-of-Revisions", "Num-of-Editors", "Num-of-Comments")


@dataclass(frozen=True)
class HeatmapGrid:
    x_feature: str
    y_feature: str
    x_edges: Tuple[float, ...]
    y_edges: Tuple[float, ...]
    means: np.ndarray
    counts: np.ndarray
    min_count: int = MIN_CELL_COUNT

    @property
    def suppressed(self):
        return self.counts < self.min_count

    def cell(self, i, j):
        """Mean label of row bin ``i`` (y axis) and column bin ``j`` (x axis), None when suppressed."""
        return None if self.suppressed[i, j] else float(self.means[i, j])

    def to_frame(self):
        """Long table of cells; suppressed means carry the SUPPRESSED sentinel."""
        rows = []
        for i in range(self.counts.shape[0]):
            for j in range(self.counts.shape[1]):
                rows.append({
                    "y_bin": i,
                    "y_low": self.y_edges[i],
                    "y_high": self.y_edges[i + 1],
                    "x_bin": j,
                    "x_low": self.x_edges[j],
                    "x_high": self.x_edges[j + 1],
                    "count": int(self.counts[i, j]),
                    "mean_label": SUPPRESSED if self.suppressed[i, j] else repr(float(self.means[i, j])),
                })
        return pd.DataFrame(rows, columns=["y_bin", "y_low", "y_high", "x_bin", "x_low", "x_high",
                                           "count", "mean_label"])


def bin_edges(values, bins, mode="quantile", name="feature"):
    """
    Bin edges for one heatmap axis.

    Quantile edges collapse duplicates; a feature with a single distinct value
    gets one bin and a warning.
    """
    if mode not in BINNING_MODES:
        raise EvaluationError(f"unknown binning mode {mode!r}")
    values = np.asarray(values, dtype=np.float64)
    low, high = float(values.min()), float(values.max())
    if low == high:
        logging.warning(f"Heatmap axis {name} has a single value; using one bin")
        return np.array([low, high])
    if mode == "fixed":
        return np.linspace(low, high, bins + 1)
    return np.unique(np.quantile(values, np.linspace(0.0, 1.0, bins + 1)))


def _assign(values, edges):
    if edges.size <= 2:
        return np.zeros(values.size, dtype=np.int64)
    return np.searchsorted(edges[1:-1], values, side="right")


def heatmap(x_values, y_values, labels, bins_x=5, bins_y=5, min_count=MIN_CELL_COUNT, mode="quantile",
            x_feature="x", y_feature="y"):
    """
    Mean label per cell of a two-feature grid.

    Args:
        x_values, y_values (sequence): Feature values per article
        labels (sequence): 0/1 labels
        bins_x, bins_y (int): Requested bins per axis
        min_count (int): Cells with fewer rows are suppressed
        mode (str): "quantile" or "fixed" width binning

    Returns:
        HeatmapGrid
    """
    x = np.asarray(x_values, dtype=np.float64)
    y = np.asarray(y_values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if not (x.size == y.size == labels.size) or x.size == 0:
        raise EvaluationError("heatmap needs equally long, non-empty inputs")
    x_edges = bin_edges(x, bins_x, mode, x_feature)
    y_edges = bin_edges(y, bins_y, mode, y_feature)
    xi, yi = _assign(x, x_edges), _assign(y, y_edges)

    shape = (y_edges.size - 1, x_edges.size - 1)
    counts = np.zeros(shape, dtype=np.int64)
    sums = np.zeros(shape)
    np.add.at(counts, (yi, xi), 1)
    np.add.at(sums, (yi, xi), labels)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return HeatmapGrid(x_feature, y_feature, tuple(float(e) for e in x_edges), tuple(float(e) for e in y_edges),
                       means, counts, min_count)


def _mean_reviews(reviews):
    return float(np.mean(reviews)) if len(reviews) else float("nan")


def fp_review_analysis(articles, oof_probs, labels, review_counts, threshold=0.5, top_n=100):
    """
    Compare post-promotion review counts of false positives with the other populations.

    Args:
        articles (sequence): Titles in row order
        oof_probs (sequence): Out-of-fold probabilities
        labels (sequence): 0/1 labels
        review_counts (dict): Title -> number of post-promotion reviews
        threshold (float): Decision threshold
        top_n (int): Size of the ranked false-positive list

    Returns:
        tuple: (population table, ranked false positives) as DataFrames

    Raises:
        EvaluationError: Review counts missing for some articles
    """
    missing = [a for a in articles if a not in review_counts]
    if missing:
        raise EvaluationError(f"review counts missing for {len(missing)} articles: {missing[:10]}")
    probs = np.asarray(oof_probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    reviews = np.array([review_counts[a] for a in articles], dtype=np.float64)
    predicted = probs >= threshold

    populations = {
        "sustainable-TN": (labels == 0) & ~predicted,
        "FP": (labels == 0) & predicted,
        "unsustainable": labels == 1,
    }
    fp_rows = np.flatnonzero(populations["FP"])
    fp_rows = fp_rows[np.argsort(-probs[fp_rows], kind="stable")]
    ranked = pd.DataFrame({
        "rank": np.arange(1, fp_rows.size + 1),
        "article": [articles[i] for i in fp_rows],
        "probability": probs[fp_rows],
        "reviews": reviews[fp_rows].astype(np.int64),
    })

    table = [{"population": name, "count": int(mask.sum()), "mean_reviews": _mean_reviews(reviews[mask])}
             for name, mask in populations.items()]
    top = ranked.head(top_n)
    table.append({"population": f"FP-top-{top_n}", "count": len(top),
                  "mean_reviews": _mean_reviews(top["reviews"].to_numpy())})
    return pd.DataFrame(table, columns=["population", "count", "mean_reviews"]), top.reset_index(drop=True)


def at_risk_report(model, at_risk_matrix, top_n=100):
    """Recently promoted (censored) articles ranked by predicted unsustainability."""
    columns = ["rank", "article", "promotion_year", "probability"]
    if at_risk_matrix.n_rows == 0:
        return pd.DataFrame(columns=columns)
    frame = at_risk_matrix.to_frame()
    probs = predict_proba(model, frame[list(model.columns)])
    order = np.argsort(-probs, kind="stable")[:top_n]
    return pd.DataFrame({
        "rank": np.arange(1, order.size + 1),
        "article": [at_risk_matrix.articles[i] for i in order],
        "promotion_year": at_risk_matrix.promotion_years[order],
        "probability": probs[order],
    }, columns=columns)


def promotion_path_gap(matrix):
    """Unsustainability rate of articles promoted straight to FA versus via GA."""
    if matrix.use_case != FA:
        raise EvaluationError("promotion path analysis applies to the FA use case only")
    via_ga = matrix.features[:, matrix.column_index(["Was-a-Good-Article"])[0]] > 0
    rows = []
    for path, mask in (("direct", ~via_ga), ("via-GA", via_ga)):
        n = int(mask.sum())
        positives = int(matrix.labels[mask].sum())
        rows.append({"path": path, "n": n, "unsustainable": positives,
                     "rate": positives / n if n else float("nan")})
    frame = pd.DataFrame(rows, columns=["path", "n", "unsustainable", "rate"])
    frame["gap"] = frame["rate"].iloc[0] - frame["rate"].iloc[1]
    return frame


def dataset_stats(matrix):
    """Population table: size, positives and rate, with mean/std of headline features per class."""
    populations = (("all", np.ones(matrix.n_rows, dtype=bool)),
                   ("sustainable", matrix.labels == 0),
                   ("unsustainable", matrix.labels == 1))
    present = [c for c in STAT_COLUMNS if c in matrix.columns]
    indices = matrix.column_index(present)
    rows = []
    for name, mask in populations:
        n = int(mask.sum())
        row = {"population": name, "use_case": matrix.use_case, "n": n,
               "positives": int(matrix.labels[mask].sum()),
               "rate": float(matrix.labels[mask].mean()) if n else float("nan")}
        for column, j in zip(present, indices):
            values = matrix.features[mask, j]
            row[f"{column}-Mean"] = float(values.mean()) if n else float("nan")
            row[f"{column}-Std"] = float(values.std()) if n else float("nan")
        rows.append(row)
    return pd.DataFrame(rows)
