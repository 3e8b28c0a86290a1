import numpy as np
import pytest

from src.errors import EvaluationError
from src.evaluation import (EvalProtocol, GbtTrainer, ablation_run, bootstrap_eval, corpus_growth, cross_val,
                            stratified_folds)
from src.feature_matrix import FeatureMatrix
from tests.test_gbt import two_signal_problem


class ConstantModel:
    def predict_matrix(self, x):
        return np.full(len(x), 0.5)


def constant_trainer(x, y, seed):
    return ConstantModel()


def dataset(n=60, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 3))
    y = (x[:, 0] + 0.3 * rng.normal(size=n) > 0.3).astype(int)
    return x, y


def matrix_from(x, y, years=None):
    n = len(y)
    return FeatureMatrix(
        use_case="FA",
        columns=tuple(f"f{j}" for j in range(x.shape[1])),
        flag_columns=("Flag",),
        articles=tuple(f"A{i:03d}" for i in range(n)),
        features=x,
        flags=np.zeros((n, 1)),
        labels=np.asarray(y),
        promotion_years=np.asarray(years if years is not None else [2010] * n),
    )


def test_folds_are_stratified():
    y = np.array([1, 0] * 5)
    folds = stratified_folds(y, 5, seed=3)
    for fold in range(5):
        members = y[folds == fold]
        assert len(members) == 2
        assert members.sum() == 1


def test_folds_depend_only_on_seed_and_labels():
    y = np.array([0, 1, 1, 0, 0, 1, 0, 0, 1, 1, 0, 0])
    assert np.array_equal(stratified_folds(y, 3, 9), stratified_folds(y, 3, 9))


def test_cross_val_gives_every_row_one_probability():
    x, y = dataset()
    result = cross_val(x, y, GbtTrainer(("a", "b", "c"), {"n_estimators": 5}), folds=5, seed=1)
    assert result["oof"].shape == (len(y),)
    assert np.all(np.isfinite(result["oof"]))
    assert sorted(np.unique(result["fold_of"]).tolist()) == [0, 1, 2, 3, 4]
    assert result["metrics"]["auroc"]["n"] == 5
    assert result["pooled"]["auroc"] > 0.7


def test_cross_val_finds_two_signals_among_noise():
    x, y, columns = two_signal_problem()
    result = cross_val(x, y, GbtTrainer(columns), folds=5, seed=0)
    assert result["metrics"]["auroc"]["n"] == 5
    assert result["metrics"]["auroc"]["mean"] >= 0.95
    assert result["pooled"]["auroc"] >= 0.95


def test_cross_val_single_class_training_part():
    x = np.arange(6.0).reshape(6, 1)
    y = np.array([1, 0, 0, 0, 0, 0])
    with pytest.raises(EvaluationError):
        cross_val(x, y, constant_trainer, folds=2, seed=0)


def test_bootstrap_constant_scorer():
    x, y = dataset()
    report = bootstrap_eval(x, y, constant_trainer, n=20, seed=4)
    assert report["metrics"]["auroc"]["mean"] == pytest.approx(0.5)
    assert report["metrics"]["auroc"]["std"] == pytest.approx(0.0)
    assert report["metrics"]["auroc"]["n"] == 20


def test_bootstrap_is_deterministic_across_worker_counts():
    x, y = dataset(seed=2)
    trainer = GbtTrainer(("a", "b", "c"), {"n_estimators": 5})
    serial = bootstrap_eval(x, y, trainer, n=6, seed=7, workers=1)
    parallel = bootstrap_eval(x, y, trainer, n=6, seed=7, workers=3)
    assert serial == parallel


def test_bootstrap_rejects_bad_inputs():
    x, y = dataset()
    with pytest.raises(EvaluationError):
        bootstrap_eval(x, y, constant_trainer, n=1)
    with pytest.raises(EvaluationError):
        bootstrap_eval(x, np.zeros(len(y), dtype=int), constant_trainer, n=5)


def test_bootstrap_on_shuffled_labels_stays_near_chance():
    x, y, columns = two_signal_problem()
    shuffled = np.random.default_rng(1).permutation(y)
    report = bootstrap_eval(x, shuffled, GbtTrainer(columns), n=20, seed=2)
    assert 0.45 <= report["metrics"]["auroc"]["mean"] <= 0.55


def test_ablation_unknown_column():
    x, y = dataset()
    protocol = EvalProtocol(bootstrap_iterations=2, folds=2, model_params={"n_estimators": 2})
    with pytest.raises(EvaluationError, match="Nope"):
        ablation_run(matrix_from(x, y), {"Broken": ("f0", "Nope")}, protocol)


def test_ablation_runs_every_group_with_the_same_seed():
    x, y = dataset(seed=5)
    protocol = EvalProtocol(bootstrap_iterations=3, folds=3, model_params={"n_estimators": 3})
    matrix = matrix_from(x, y)
    both = ablation_run(matrix, {"A": ("f0",), "B": ("f1", "f2")}, protocol)
    reversed_order = ablation_run(matrix, {"B": ("f1", "f2"), "A": ("f0",)}, protocol)
    assert both["A"]["bootstrap"] == reversed_order["A"]["bootstrap"]
    assert both["B"]["cv"]["metrics"] == reversed_order["B"]["cv"]["metrics"]
    assert both["A"]["columns"] == ("f0", "Flag")


def test_corpus_growth_gaps_and_overperformance():
    x, y = dataset(n=120, seed=8)
    years = np.repeat([2006, 2008, 2010], 40)
    protocol = EvalProtocol(folds=3, model_params={"n_estimators": 5})
    growth = corpus_growth(matrix_from(x, y, years), protocol, years=(2005, 2006, 2010), min_positives=20)
    assert list(growth["year"]) == [2005, 2006, 2010]
    first = growth.iloc[0]
    assert first["gap"] and first["n"] == 0
    last = growth.iloc[-1]
    assert not last["gap"]
    assert last["n"] == 120
    assert last["auroc_overperformance"] == pytest.approx(last["auroc"] / 0.5 - 1)
    prevalence = last["positives"] / last["n"]
    assert last["f1_overperformance"] == pytest.approx(last["f1"] / (2 * prevalence / (1 + prevalence)) - 1)
