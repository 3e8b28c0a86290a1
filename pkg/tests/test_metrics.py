import math

import numpy as np
import pytest

from src.errors import EvaluationError
from src.metrics import auroc, metric_names, metrics, precision_at_k, random_f1


def pairwise_auroc(y, s):
    pos = s[y == 1]
    neg = s[y == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (pos.size * neg.size)


def counting_metrics(y, s, threshold, k_list):
    pred = s >= threshold
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    tn = int(np.sum(~pred & (y == 0)))

    def f1(a, b, c):
        p = a / (a + b) if a + b else 0.0
        r = a / (a + c) if a + c else 0.0
        return p, r, (2 * p * r / (p + r) if p + r else 0.0)

    precision, recall, f1_pos = f1(tp, fp, fn)
    f1_neg = f1(tn, fn, fp)[2]
    result = {"precision": precision, "recall": recall, "f1": f1_pos, "macro_f1": (f1_pos + f1_neg) / 2,
              "auroc": pairwise_auroc(y, s)}
    order = sorted(range(y.size), key=lambda i: -s[i])
    for k in k_list:
        top = max(1, math.ceil(k * y.size / 100))
        result[f"precision_at_{k}"] = float(np.mean(y[order[:top]]))
    return result


def test_perfect_ranking():
    y = np.array([0, 0, 0, 1, 1])
    s = np.array([0.1, 0.2, 0.3, 0.8, 0.9])
    m = metrics(y, s)
    assert m["auroc"] == 1.0
    assert m["f1"] == 1.0
    assert m["macro_f1"] == 1.0
    assert m["precision_at_10"] == 1.0


def test_constant_scores_give_half_auroc():
    y = np.array([0, 1, 0, 1, 1])
    assert auroc(y, np.full(5, 0.3)) == pytest.approx(0.5)


def test_precision_at_k_ties_keep_input_order():
    y = np.array([0, 1, 1, 1])
    s = np.array([0.5, 0.5, 0.5, 0.5])
    # ceil(10% of 4) = 1 slot, taken by the first row
    assert precision_at_k(y, s, 10) == 0.0


def test_single_class_raises():
    with pytest.raises(EvaluationError):
        metrics([1, 1, 1], [0.2, 0.4, 0.9])


def test_shape_mismatch_raises():
    with pytest.raises(EvaluationError):
        metrics([0, 1], [0.2, 0.4, 0.9])


def test_names_follow_k_list():
    assert metric_names((2, 5)) == ("precision", "recall", "f1", "macro_f1", "auroc",
                                    "precision_at_2", "precision_at_5")


def test_matches_counting_oracle_on_random_datasets():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(4, 31))
        y = rng.integers(0, 2, size=n)
        if y.min() == y.max():
            y[0], y[1] = 0, 1
        # coarse scores so ties occur
        s = rng.integers(0, 8, size=n) / 7.0
        expected = counting_metrics(y, s, 0.5, (2, 5, 10))
        got = metrics(y, s, 0.5, (2, 5, 10))
        for name, value in expected.items():
            assert got[name] == pytest.approx(value, abs=1e-12), name


def test_precision_at_k_non_increasing_when_positives_lead():
    y = np.array([1] * 5 + [0] * 45)
    s = np.linspace(1.0, 0.0, 50)
    values = [precision_at_k(y, s, k) for k in (2, 5, 10, 20, 50)]
    assert values == sorted(values, reverse=True)


def test_random_f1_baseline():
    assert random_f1(0.16) == pytest.approx(0.2759, abs=1e-4)


def test_random_f1_matches_always_positive_simulation():
    rng = np.random.default_rng(2)
    p = 0.16
    y = (rng.random(200_000) < p).astype(int)
    precision = y.mean()
    simulated = 2 * precision / (precision + 1.0)
    assert simulated == pytest.approx(random_f1(p), abs=0.01)
