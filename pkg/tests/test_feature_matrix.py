import numpy as np
import pytest

from src.config_loader import DEFAULT_REGISTRY_PATH
from src.errors import FeatureError
from src.experience import CorpusIndex
from src.feature_matrix import (FAMILIES, FeatureMatrix, assemble_matrix, column_groups, feature_columns,
                                featurize_article, flag_columns, leakage_audit)
from src.records import FA, GA, MILESTONES, PROMOTION, QualityEvent
from src.scorers import make_binding
from src.topic_features import load_registry
from src.window import FeatureBlock
from tests.builders import DAY, T0, chain, page, talk_revision, timeline
from tests.test_experience import DictStore
from tests.test_talk_parser import thread_text


@pytest.fixture(scope="module")
def registry():
    return load_registry(DEFAULT_REGISTRY_PATH)


def article_page(title, editors, promoted_day=10):
    steps = [(T0 + i * DAY, who, f"{title} v{i}") for i, who in enumerate(editors)]
    talk = [talk_revision(T0 + DAY, text=thread_text(), title=f"Talk:{title}", revision_id=900),
            talk_revision(T0 + (promoted_day + 5) * DAY, text="Archived", title=f"Talk:{title}", revision_id=901)]
    return page(title, article=chain(title, steps), talk=talk)


def corpus():
    pages = {
        "Kiwi": article_page("Kiwi", ["Alice", "Bob", "Alice", "Carol"] * 4),
        "Mango": article_page("Mango", ["Bob", "Bob", "192.0.2.3", "Dave"] * 4),
    }
    timelines = [
        timeline("Kiwi", t_prom_fa=T0 + 10 * DAY, label_fa=1,
                 events=[QualityEvent(PROMOTION, FA, T0 + 10 * DAY, MILESTONES)]),
        timeline("Mango", t_prom_fa=T0 + 8 * DAY, label_fa=0,
                 events=[QualityEvent(PROMOTION, FA, T0 + 8 * DAY, MILESTONES)]),
    ]
    return DictStore(pages), timelines


def test_column_layout(registry):
    assert len(feature_columns(FA, registry)) == 326
    assert len(feature_columns(GA, registry)) == 325
    assert len(set(feature_columns(FA, registry))) == 326
    groups = column_groups(FA, registry)
    assert groups["Baseline"] == ("Num-of-Revisions-Normalized",)
    assert len(groups["Discussions"]) == 40
    assert groups["All"] == feature_columns(FA, registry)


def featurizer(store, timelines, registry):
    index = CorpusIndex.build(store, timelines)
    binding = make_binding({})
    return lambda p, t: featurize_article(p, t, FA, registry, index, binding)


def test_assemble_write_and_read(tmp_path, registry):
    store, timelines = corpus()
    featurize = featurizer(store, timelines, registry)
    outputs = {t.title: featurize(store.load(t.title), t) for t in timelines}
    matrix = assemble_matrix(timelines, outputs, FA, registry, metadata={"seed": 0})
    assert matrix.articles == ("Kiwi", "Mango")
    assert matrix.features.shape == (2, 326)
    assert matrix.flags.shape == (2, len(flag_columns()))
    assert matrix.labels.tolist() == [1, 0]
    assert matrix.promotion_years.tolist() == [2010, 2010]

    path = str(tmp_path / "matrix.csv")
    meta = matrix.write(path)
    assert meta["n_features"] == 326
    loaded = FeatureMatrix.read(path)
    assert loaded.header_hash() == matrix.header_hash()
    assert np.array_equal(loaded.features, matrix.features)
    assert loaded.metadata == {"seed": 0}

    first = open(path, encoding="utf-8").readline().rstrip("\n").split(",")
    assert first[:4] == ["article", "label", "promotion_year", "Num-of-Editors"]


def test_missing_family_is_an_error(registry):
    store, timelines = corpus()
    featurize = featurizer(store, timelines, registry)
    outputs = {t.title: featurize(store.load(t.title), t) for t in timelines}
    del outputs["Mango"]["Network"]
    with pytest.raises(FeatureError) as info:
        assemble_matrix(timelines, outputs, FA, registry)
    assert info.value.family == "Network"


def test_select_with_flags(registry):
    store, timelines = corpus()
    featurize = featurizer(store, timelines, registry)
    outputs = {t.title: featurize(store.load(t.title), t) for t in timelines}
    matrix = assemble_matrix(timelines, outputs, FA, registry)
    x, names = matrix.select(["Num-of-Editors"], include_flags=True)
    assert x.shape == (2, 1 + len(flag_columns()))
    assert names[0] == "Num-of-Editors"
    with pytest.raises(FeatureError):
        matrix.select(["Nope"])


def test_leakage_audit_passes_for_windowed_features(registry):
    store, timelines = corpus()
    audited = leakage_audit(store, timelines, FA, featurizer(store, timelines, registry), sample=5)
    assert audited == ["Kiwi", "Mango"]


def test_leakage_audit_catches_future_revisions():
    store, timelines = corpus()

    def leaky(p, t):
        blocks = {family: FeatureBlock() for family in FAMILIES}
        blocks["EditHistory"] = FeatureBlock(values={"Num-of-Revisions": float(len(p.article_revisions))})
        return blocks

    with pytest.raises(FeatureError, match="leakage"):
        leakage_audit(store, timelines, FA, leaky)
