"""
Classification metrics for the unsustainability classifier.

The positive class is "unsustainable" (label 1). Predictions are
``score >= threshold``.
"""
import math

import numpy as np
from scipy.stats import rankdata

from src.errors import EvaluationError

DEFAULT_THRESHOLD = 0.5
DEFAULT_K_LIST = (2, 5, 10)
METRIC_NAMES = ("precision", "recall", "f1", "macro_f1", "auroc")


def _check(y_true, scores):
    y = np.asarray(y_true, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise EvaluationError(f"labels {y.shape} and scores {s.shape} differ in shape")
    if not np.isin(y, (0, 1)).all():
        raise EvaluationError("labels must be 0 or 1")
    if y.min() == y.max():
        raise EvaluationError("metrics need at least one positive and one negative")
    return y, s


def _f1(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def auroc(y_true, scores):
    """Rank-statistic AUROC with midranks for tied scores."""
    y, s = _check(y_true, scores)
    ranks = rankdata(s, method="average")
    positives = int(y.sum())
    negatives = y.size - positives
    return float((ranks[y == 1].sum() - positives * (positives + 1) / 2) / (positives * negatives))


def precision_at_k(y_true, scores, k):
    """Precision among the ceil(k% * n) highest scores; ties keep input order."""
    y, s = _check(y_true, scores)
    top = max(1, math.ceil(k * y.size / 100))
    order = np.argsort(-s, kind="stable")
    return float(y[order[:top]].mean())


def metric_names(k_list=DEFAULT_K_LIST):
    return METRIC_NAMES + tuple(f"precision_at_{k}" for k in k_list)


def metrics(y_true, scores, threshold=DEFAULT_THRESHOLD, k_list=DEFAULT_K_LIST):
    """
    Precision, recall and F1 of the positive class, Macro-F1, AUROC and Precision@k%.

    Args:
        y_true (sequence): Labels in {0, 1}
        scores (sequence): Probabilities in [0, 1]
        threshold (float): Decision threshold
        k_list (sequence): Percentages for Precision@k

    Returns:
        dict: Metric name -> value

    Raises:
        EvaluationError: Single-class labels or shape mismatch
    """
    y, s = _check(y_true, scores)
    predicted = s >= threshold
    tp = int(np.sum(predicted & (y == 1)))
    fp = int(np.sum(predicted & (y == 0)))
    fn = int(np.sum(~predicted & (y == 1)))
    tn = int(np.sum(~predicted & (y == 0)))

    precision, recall, f1 = _f1(tp, fp, fn)
    _, _, f1_negative = _f1(tn, fn, fp)
    result = {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "macro_f1": (f1 + f1_negative) / 2,
        "auroc": auroc(y, s),
    }
    for k in k_list:
        result[f"precision_at_{k}"] = precision_at_k(y, s, k)
    return result


def random_f1(prevalence):
    """Baseline positive-class F1 for prevalence p: 2p / (1 + p), i.e. flagging every article (precision p, recall 1)."""
    return 2 * prevalence / (1 + prevalence)
