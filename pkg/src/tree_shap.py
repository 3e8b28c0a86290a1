"""
Exact path-dependent Shapley attribution for GbtModel ensembles.

For every tree the recursion tracks the unique features on the current
root-to-leaf path with the fractions of zero (cover-weighted) and one
(follows the row) paths, extending and unwinding the permutation weights
as it goes. Attributions of all trees are scaled by the learning rate, so
base_value + sum(attributions) equals the model margin.
"""
import numpy as np
import pandas as pd

from src.gbt import LEAF


def _extend(path, zero, one, feature):
    path = [list(item) for item in path]
    depth = len(path)
    path.append([feature, zero, one, 1.0 if depth == 0 else 0.0])
    for i in range(depth - 1, -1, -1):
        path[i + 1][3] += one * path[i][3] * (i + 1) / (depth + 1)
        path[i][3] = zero * path[i][3] * (depth - i) / (depth + 1)
    return path


def _unwind(path, index):
    path = [list(item) for item in path]
    depth = len(path) - 1
    _, zero, one, _ = path[index]
    next_one = path[depth][3]
    for i in range(depth - 1, -1, -1):
        if one != 0:
            tmp = path[i][3]
            path[i][3] = next_one * (depth + 1) / ((i + 1) * one)
            next_one = tmp - path[i][3] * zero * (depth - i) / (depth + 1)
        else:
            path[i][3] = path[i][3] * (depth + 1) / (zero * (depth - i))
    for i in range(index, depth):
        path[i][0], path[i][1], path[i][2] = path[i + 1][0], path[i + 1][1], path[i + 1][2]
    path.pop()
    return path


def _unwound_sum(path, index):
    depth = len(path) - 1
    _, zero, one, _ = path[index]
    total = 0.0
    if one != 0:
        next_one = path[depth][3]
        for i in range(depth - 1, -1, -1):
            tmp = next_one / ((i + 1) * one)
            total += tmp
            next_one = path[i][3] - tmp * zero * (depth - i)
    else:
        for i in range(depth - 1, -1, -1):
            total += path[i][3] / (zero * (depth - i))
    return total * (depth + 1)


def tree_attributions(tree, row, phi, scale=1.0):
    """Add one tree's Shapley values for ``row`` into ``phi``."""

    def recurse(node, path, zero, one, feature):
        path = _extend(path, zero, one, feature)
        split = tree.feature[node]
        if split == LEAF:
            value = tree.value[node] * scale
            for i in range(1, len(path)):
                weight = _unwound_sum(path, i)
                f, z, o, _ = path[i]
                phi[f] += weight * (o - z) * value
            return
        left, right = tree.left[node], tree.right[node]
        hot, cold = (left, right) if row[split] <= tree.threshold[node] else (right, left)
        cover = tree.cover[node]
        incoming_zero = incoming_one = 1.0
        for k in range(1, len(path)):
            if path[k][0] == split:
                incoming_zero, incoming_one = path[k][1], path[k][2]
                path = _unwind(path, k)
                break
        recurse(hot, path, incoming_zero * tree.cover[hot] / cover, incoming_one, split)
        recurse(cold, path, incoming_zero * tree.cover[cold] / cover, 0.0, split)

    recurse(0, [], 1.0, 1.0, -1)
    return phi


def base_value(model):
    """Expected margin under the training covers."""
    return model.base_score + model.learning_rate * sum(t.expected_value() for t in model.trees)


def tree_shap(model, row):
    """
    Shapley attributions of one row.

    Args:
        model (GbtModel): Trained ensemble
        row (sequence): Feature values in model column order

    Returns:
        tuple: (ndarray of per-feature attributions, base value)
    """
    row = np.asarray(row, dtype=np.float64)
    phi = np.zeros(len(model.columns))
    for tree in model.trees:
        tree_attributions(tree, row, phi, scale=model.learning_rate)
    return phi, base_value(model)


def shap_matrix(model, x):
    """Attributions for every row of ``x`` (n x p)."""
    x = np.asarray(x, dtype=np.float64)
    return np.vstack([tree_shap(model, row)[0] for row in x]) if len(x) else np.zeros((0, len(model.columns)))


def global_importance(model, x, top_k=None):
    """
    Mean absolute attribution per feature, with the direction of its impact.

    Direction is the sign of the correlation between a feature's values and
    its attributions (+1 higher values push towards unsustainable, -1 the
    opposite, 0 when either side is constant).

    Returns:
        pandas.DataFrame: feature, mean_abs_shap, direction; sorted by importance
    """
    phi = shap_matrix(model, x)
    x = np.asarray(x, dtype=np.float64)
    rows = []
    for j, name in enumerate(model.columns):
        values, contributions = x[:, j], phi[:, j]
        direction = 0
        if values.size > 1 and values.std() > 0 and contributions.std() > 0:
            direction = int(np.sign(np.corrcoef(values, contributions)[0, 1]))
        rows.append({"feature": name, "mean_abs_shap": float(np.abs(contributions).mean()) if len(x) else 0.0,
                     "direction": direction})
    frame = pd.DataFrame(rows, columns=["feature", "mean_abs_shap", "direction"])
    frame = frame.sort_values("mean_abs_shap", ascending=False, kind="stable").reset_index(drop=True)
    return frame.head(top_k) if top_k else frame
