"""
Gradient-boosted regression trees for binary classification.

Stagewise fit on the logistic (deviance) loss: each round fits a depth-
limited regression tree to the negative gradient with exact greedy splits,
then sets every leaf to a Newton step (sum of gradients over sum of
hessians). The margin is base_score + learning_rate * sum of tree outputs.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import expit

from src.errors import ModelError
from src.utils import stable_json_dumps

SCHEMA_VERSION = 1
DEFAULT_PARAMS = {
    "n_estimators": 100,
    "max_depth": 3,
    "learning_rate": 0.1,
    "subsample": 1.0,
    "min_samples_leaf": 1,
}
MIN_GAIN = 1e-12
MIN_HESSIAN = 1e-150
LEAF = -1


class RegressionTree:
    """Array-backed binary tree; node 0 is the root, ``feature == -1`` marks a leaf."""

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self.cover = []

    def add_node(self, cover):
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(0.0)
        self.cover.append(float(cover))
        return len(self.feature) - 1

    @property
    def n_nodes(self):
        return len(self.feature)

    def arrays(self):
        return (np.asarray(self.feature, dtype=np.int64), np.asarray(self.threshold, dtype=np.float64),
                np.asarray(self.left, dtype=np.int64), np.asarray(self.right, dtype=np.int64),
                np.asarray(self.value, dtype=np.float64))

    def predict(self, x):
        feature, threshold, left, right, value = self.arrays()
        node = np.zeros(x.shape[0], dtype=np.int64)
        rows = np.arange(x.shape[0])
        while True:
            f = feature[node]
            internal = f >= 0
            if not internal.any():
                return value[node]
            go_left = x[rows, np.where(internal, f, 0)] <= threshold[node]
            node = np.where(internal, np.where(go_left, left[node], right[node]), node)

    def expected_value(self):
        """Cover-weighted mean of the leaf values."""
        total = self.cover[0]
        return sum(v * c for f, v, c in zip(self.feature, self.value, self.cover) if f == LEAF) / total

    def to_dict(self, node=0):
        if self.feature[node] == LEAF:
            return {"value": self.value[node], "cover": self.cover[node]}
        return {
            "feature": self.feature[node],
            "threshold": self.threshold[node],
            "cover": self.cover[node],
            "left": self.to_dict(self.left[node]),
            "right": self.to_dict(self.right[node]),
        }

    @classmethod
    def from_dict(cls, data):
        tree = cls()

        def visit(item):
            node = tree.add_node(item["cover"])
            if "feature" not in item:
                tree.value[node] = float(item["value"])
                return node
            tree.feature[node] = int(item["feature"])
            tree.threshold[node] = float(item["threshold"])
            tree.left[node] = visit(item["left"])
            tree.right[node] = visit(item["right"])
            return node

        visit(data)
        return tree


def best_split(x, residual, min_samples_leaf=1):
    """
    Exact greedy split maximizing the squared-error reduction.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values. Equal gains go to the lowest feature index, then the lowest
    threshold.

    Returns:
        tuple or None: (feature, threshold, gain)
    """
    n = x.shape[0]
    if n < 2 * min_samples_leaf or n < 2:
        return None
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    rs = residual[order]
    total = residual.sum()
    left_sum = np.cumsum(rs, axis=0)[:-1]
    right_sum = total - left_sum
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    gain = left_sum ** 2 / n_left + right_sum ** 2 / n_right - total ** 2 / n
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    gain = np.where(valid, gain, -np.inf)

    # feature-major flattening: argmax returns the lowest feature, then lowest threshold
    flat = gain.T.ravel()
    k = int(np.argmax(flat))
    if not np.isfinite(flat[k]) or flat[k] <= MIN_GAIN:
        return None
    feature, i = divmod(k, n - 1)
    lo, hi = xs[i, feature], xs[i + 1, feature]
    threshold = (lo + hi) / 2.0
    if threshold >= hi:
        threshold = lo
    return int(feature), float(threshold), float(flat[k])


def fit_tree(x, residual, hessian, max_depth=3, min_samples_leaf=1):
    """Regression tree on the negative gradient with Newton leaf values."""
    tree = RegressionTree()

    def grow(rows, depth):
        node = tree.add_node(rows.size)
        split = best_split(x[rows], residual[rows], min_samples_leaf) if depth < max_depth else None
        if split is None:
            denominator = hessian[rows].sum()
            tree.value[node] = float(residual[rows].sum() / denominator) if denominator > MIN_HESSIAN else 0.0
            return node
        feature, threshold, _ = split
        go_left = x[rows, feature] <= threshold
        tree.feature[node] = feature
        tree.threshold[node] = threshold
        tree.left[node] = grow(rows[go_left], depth + 1)
        tree.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(x.shape[0]), 0)
    return tree


@dataclass
class GbtModel:
    columns: Tuple[str, ...]
    base_score: float
    learning_rate: float
    trees: List[RegressionTree] = field(default_factory=list)
    params: Dict[str, object] = field(default_factory=dict)
    seed: int = 0

    def margin(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape[0], self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(x)
        return out

    def staged_margin(self, x):
        """Margins after each boosting round."""
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape[0], self.base_score)
        for tree in self.trees:
            out = out + self.learning_rate * tree.predict(x)
            yield out

    def predict_matrix(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != len(self.columns):
            raise ModelError(f"expected {len(self.columns)} columns, got shape {x.shape}")
        return expit(self.margin(x))

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "columns": list(self.columns),
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "params": dict(self.params),
            "seed": self.seed,
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ModelError(f"unsupported model schema {data.get('schema_version')!r}")
        return cls(
            columns=tuple(data["columns"]),
            base_score=float(data["base_score"]),
            learning_rate=float(data["learning_rate"]),
            trees=[RegressionTree.from_dict(t) for t in data["trees"]],
            params=dict(data.get("params", {})),
            seed=int(data.get("seed", 0)),
        )

    def dumps(self):
        return stable_json_dumps(self.to_dict())

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps() + "\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def train_gbt(x, y, columns, params=None, seed=0):
    """
    Fit a boosted ensemble.

    Args:
        x (ndarray): n x p design matrix
        y (ndarray): Labels in {0, 1}
        columns (sequence): Column names, stored with the model
        params (dict, optional): Overrides of DEFAULT_PARAMS
        seed (int): Seed for row subsampling

    Returns:
        GbtModel

    Raises:
        ModelError: Fewer than two classes, or shape mismatch
    """
    params = {**DEFAULT_PARAMS, **(params or {})}
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0] or x.shape[1] != len(columns):
        raise ModelError(f"design matrix {x.shape} does not match {y.shape[0]} labels and {len(columns)} columns")
    if np.unique(y).size < 2:
        raise ModelError("training labels contain a single class")

    prior = y.mean()
    model = GbtModel(columns=tuple(columns), base_score=float(np.log(prior / (1 - prior))),
                     learning_rate=float(params["learning_rate"]), params=params, seed=int(seed))
    if x.shape[0] == 0 or np.all(np.ptp(x, axis=0) == 0):
        logging.warning("Design matrix has no variance; model keeps only the base score")
        return model

    rng = np.random.default_rng(seed)
    n = x.shape[0]
    subsample = float(params["subsample"])
    margin = np.full(n, model.base_score)
    for _ in range(int(params["n_estimators"])):
        p = expit(margin)
        residual = y - p
        hessian = p * (1 - p)
        if subsample < 1.0:
            rows = np.sort(rng.choice(n, size=max(2, int(round(subsample * n))), replace=False))
            tree = fit_tree(x[rows], residual[rows], hessian[rows], int(params["max_depth"]),
                            int(params["min_samples_leaf"]))
        else:
            tree = fit_tree(x, residual, hessian, int(params["max_depth"]), int(params["min_samples_leaf"]))
        model.trees.append(tree)
        margin += model.learning_rate * tree.predict(x)
    return model


def predict_proba(model, data):
    """
    Probability of the positive class.

    Args:
        model (GbtModel): Trained model
        data: A mapping (one row) or a pandas DataFrame keyed by column name

    Returns:
        float for a mapping, ndarray for a DataFrame

    Raises:
        ModelError: Columns differ from the model's; names the missing and extra ones
    """
    present = list(data.keys()) if isinstance(data, dict) else list(data.columns)
    missing = sorted(set(model.columns) - set(present))
    extra = sorted(set(present) - set(model.columns))
    if missing or extra:
        raise ModelError(f"column mismatch: missing={missing} extra={extra}")
    if isinstance(data, dict):
        row = np.array([[float(data[c]) for c in model.columns]])
        return float(model.predict_matrix(row)[0])
    return model.predict_matrix(data[list(model.columns)].to_numpy(dtype=np.float64))


def log_loss(y, margin):
    """Mean deviance of labels under margins."""
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))
