"""
Evaluation protocols: stratified bootstrap with out-of-bag testing,
stratified k-fold cross-validation, the feature-group ablation and the
corpus-growth analysis.

Every protocol derives its randomness from one seed; iterations run in a
thread pool and are reduced in iteration order, so results do not depend
on the worker count.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import pandas as pd

from src.errors import EvaluationError, FeatureError, ModelError
from src.gbt import train_gbt
from src.metrics import DEFAULT_K_LIST, DEFAULT_THRESHOLD, metric_names, metrics, random_f1

MAX_REDRAWS = 10
DEFAULT_GROWTH_YEARS = tuple(range(2005, 2019))
MIN_POSITIVES = 20


@dataclass(frozen=True)
class EvalProtocol:
    bootstrap_iterations: int = 100
    folds: int = 5
    threshold: float = DEFAULT_THRESHOLD
    k_list: Tuple[int, ...] = DEFAULT_K_LIST
    seed: int = 0
    include_flags: bool = True
    workers: int = 1
    model_params: dict = field(default_factory=dict)


class GbtTrainer:
    """Trainer callable: (x, y, seed) -> fitted GbtModel over fixed column names."""

    def __init__(self, columns, params=None):
        self.columns = tuple(columns)
        self.params = dict(params or {})

    def __call__(self, x, y, seed):
        return train_gbt(x, y, self.columns, self.params, seed=seed)


def summarize(per_iteration, names):
    """Mean, std (population) and count of each metric over iterations."""
    summary = {}
    for name in names:
        values = np.array([m[name] for m in per_iteration], dtype=np.float64)
        summary[name] = {
            "mean": float(values.mean()) if values.size else float("nan"),
            "std": float(values.std()) if values.size else float("nan"),
            "n": int(values.size),
        }
    return summary


def _child_seeds(seed, n):
    return np.random.SeedSequence(seed).spawn(n)


def _stratified_resample(rng, y):
    parts = [rng.choice(np.flatnonzero(y == label), size=int(np.sum(y == label)), replace=True)
             for label in (0, 1)]
    return np.sort(np.concatenate(parts))


def bootstrap_eval(x, y, trainer, n=100, seed=0, threshold=DEFAULT_THRESHOLD, k_list=DEFAULT_K_LIST, workers=1):
    """
    Stratified bootstrap: train on a resample drawn with replacement within
    each class, evaluate on the out-of-bag rows.

    An iteration whose out-of-bag rows hold a single class is redrawn, at
    most 10 times.

    Returns:
        dict: ``metrics`` (name -> mean/std/n), ``per_iteration`` list, ``iterations``

    Raises:
        EvaluationError: n < 2, single-class labels, or redraws exhausted
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n < 2:
        raise EvaluationError("bootstrap needs at least 2 iterations")
    if np.unique(y).size < 2:
        raise EvaluationError("bootstrap needs both classes")

    def iteration(child):
        rng = np.random.default_rng(child)
        for _ in range(MAX_REDRAWS + 1):
            sample = _stratified_resample(rng, y)
            oob = np.ones(y.size, dtype=bool)
            oob[sample] = False
            if np.unique(y[oob]).size == 2:
                break
        else:
            raise EvaluationError(f"out-of-bag rows stayed single-class after {MAX_REDRAWS} redraws")
        model = trainer(x[sample], y[sample], int(rng.integers(2 ** 31 - 1)))
        return metrics(y[oob], model.predict_matrix(x[oob]), threshold, k_list)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        per_iteration = list(pool.map(iteration, _child_seeds(seed, n)))
    names = metric_names(k_list)
    return {"iterations": n, "metrics": summarize(per_iteration, names), "per_iteration": per_iteration}


def stratified_folds(y, folds, seed):
    """Fold number of every row: a seeded shuffle within each class, then position modulo ``folds``."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assignment = np.empty(y.size, dtype=np.int64)
    for label in (0, 1):
        rows = rng.permutation(np.flatnonzero(y == label))
        assignment[rows] = np.arange(rows.size) % folds
    return assignment


def cross_val(x, y, trainer, folds=5, seed=0, threshold=DEFAULT_THRESHOLD, k_list=DEFAULT_K_LIST, workers=1):
    """
    Stratified k-fold cross-validation.

    Returns:
        dict: ``oof`` (one probability per row), ``fold_of``, fold ``metrics``
        (mean/std/n over folds with both classes in the test part) and
        ``pooled`` metrics over all out-of-fold probabilities

    Raises:
        EvaluationError: folds < 2 or a training part with a single class
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if folds < 2:
        raise EvaluationError("cross-validation needs at least 2 folds")
    fold_of = stratified_folds(y, folds, seed)
    seeds = _child_seeds(seed, folds)

    def run_fold(fold):
        train = fold_of != fold
        if np.unique(y[train]).size < 2:
            raise EvaluationError(f"fold {fold}: training data has a single class (population too small)")
        model = trainer(x[train], y[train], int(np.random.default_rng(seeds[fold]).integers(2 ** 31 - 1)))
        return model.predict_matrix(x[~train])

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        predictions = list(pool.map(run_fold, range(folds)))

    oof = np.full(y.size, np.nan)
    fold_metrics = []
    for fold, scores in enumerate(predictions):
        test = fold_of == fold
        oof[test] = scores
        if np.unique(y[test]).size < 2:
            logging.warning(f"Fold {fold} test part has a single class; left out of fold metrics")
            continue
        fold_metrics.append(metrics(y[test], scores, threshold, k_list))

    names = metric_names(k_list)
    return {
        "oof": oof,
        "fold_of": fold_of,
        "metrics": summarize(fold_metrics, names),
        "pooled": metrics(y, oof, threshold, k_list),
    }


def ablation_run(matrix, groups, protocol):
    """
    Train and evaluate one model per column group under a shared protocol.

    Args:
        matrix (FeatureMatrix): Modeled population
        groups (dict): Group name -> column names
        protocol (EvalProtocol): Shared settings (every group uses the same seed)

    Returns:
        dict: Group name -> {columns, bootstrap, cv, model}

    Raises:
        EvaluationError: A group names an unknown column
    """
    results = {}
    for name in groups:
        try:
            x, columns = matrix.select(groups[name], include_flags=protocol.include_flags)
        except FeatureError as e:
            raise EvaluationError(f"group {name}: {e}") from e
        trainer = GbtTrainer(columns, protocol.model_params)
        logging.info(f"Ablation group {name}: {len(groups[name])} feature columns")
        results[name] = {
            "columns": columns,
            "n_features": len(groups[name]),
            "bootstrap": bootstrap_eval(x, matrix.labels, trainer, protocol.bootstrap_iterations, protocol.seed,
                                        protocol.threshold, protocol.k_list, protocol.workers),
            "cv": cross_val(x, matrix.labels, trainer, protocol.folds, protocol.seed, protocol.threshold,
                            protocol.k_list, protocol.workers),
            "model": trainer(x, matrix.labels, protocol.seed),
        }
    return results


def corpus_growth(matrix, protocol, columns=None, years=DEFAULT_GROWTH_YEARS, min_positives=MIN_POSITIVES):
    """
    Over-performance against a random model on cumulative sub-datasets.

    For each year t the sub-dataset holds every article promoted by t. It is
    evaluated with cross-validation; over-performance is metric / random - 1
    with random AUROC 0.5 and random F1 2p / (1 + p). Years with fewer than
    ``min_positives`` positives become gaps.

    Returns:
        pandas.DataFrame: One row per year
    """
    columns = tuple(columns or matrix.columns)
    rows = []
    for year in years:
        subset = matrix.rows(matrix.promotion_years <= year)
        positives = int(subset.labels.sum())
        row = {"year": year, "n": subset.n_rows, "positives": positives, "gap": True,
               "auroc": np.nan, "f1": np.nan, "auroc_overperformance": np.nan, "f1_overperformance": np.nan}
        negatives = subset.n_rows - positives
        if positives < min_positives or negatives < protocol.folds:
            logging.warning(f"Corpus growth {year}: {positives} positives, skipped")
            rows.append(row)
            continue
        x, names = subset.select(columns, include_flags=protocol.include_flags)
        try:
            result = cross_val(x, subset.labels, GbtTrainer(names, protocol.model_params), protocol.folds,
                               protocol.seed, protocol.threshold, protocol.k_list, protocol.workers)
        except (EvaluationError, ModelError) as e:
            logging.warning(f"Corpus growth {year}: {e}")
            rows.append(row)
            continue
        prevalence = positives / subset.n_rows
        auc = result["metrics"]["auroc"]["mean"]
        f1 = result["metrics"]["f1"]["mean"]
        row.update({
            "gap": False,
            "auroc": auc,
            "f1": f1,
            "auroc_overperformance": auc / 0.5 - 1,
            "f1_overperformance": f1 / random_f1(prevalence) - 1,
        })
        rows.append(row)
    return pd.DataFrame(rows, columns=["year", "n", "positives", "gap", "auroc", "f1",
                                       "auroc_overperformance", "f1_overperformance"])
