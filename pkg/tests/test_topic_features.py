import json
from collections import Counter

import pytest

from src.config_loader import DEFAULT_REGISTRY_PATH
from src.errors import ConfigError
from src.topic_features import ACTIVE_SIZE, build_registry, load_registry, topic_features
from tests.builders import T0, talk_revision

DURIAN_TALK = """{{WikiProject banner shell|class=FA|
{{WikiProject Plants|importance=High}}
{{WikiProject Malaysia|importance=mid}}
{{WikiProject South Asia|importance=Low}}
}}"""


@pytest.fixture(scope="module")
def registry():
    return load_registry(DEFAULT_REGISTRY_PATH)


def test_packaged_registry_has_the_active_projects(registry):
    assert len(registry.columns) == ACTIVE_SIZE == 247
    assert "Topic-Spoken Wikipedia" not in registry.columns
    assert registry.resolve("milhist") == "Military history"


def test_banner_importance(registry):
    values = topic_features([talk_revision(T0, text=DURIAN_TALK)], registry).values
    assert values["Topic-Plants"] == 3
    assert values["Topic-Malaysia"] == 2
    assert values["Topic-South Asia"] == 1
    assert sum(values.values()) == 6


def test_no_banners(registry):
    values = topic_features([], registry).values
    assert len(values) == 247
    assert not any(values.values())


def test_unregistered_and_unrated_banners(registry):
    diagnostics = Counter()
    text = "{{WikiProject Underwater Basket Weaving|importance=Top}}\n{{WikiProject Astronomy}}"
    values = topic_features([talk_revision(T0, text=text)], registry, diagnostics).values
    assert values["Topic-Astronomy"] == 1
    assert sum(values.values()) == 1
    assert diagnostics == Counter({"unregistered": 1, "unrated": 1})


def test_only_latest_talk_revision_is_read(registry):
    history = [talk_revision(T0, text=DURIAN_TALK), talk_revision(T0 + 1, text="{{WikiProject India|importance=top}}")]
    values = topic_features(history, registry).values
    assert values["Topic-India"] == 4
    assert values["Topic-Plants"] == 0


def test_build_registry_ranks_by_corpus_counts():
    seed = [{"name": n, "aliases": [], "removed": False} for n in ("A", "B", "C", "D")]
    seed[2]["aliases"] = ["Cee"]
    texts = ["{{WikiProject Cee}}", "{{WikiProject C}}{{WikiProject D}}", "{{WikiProject Zed}}{{WikiProject D}}",
             "{{WikiProject Zed}}"]
    entries = build_registry(texts, seed, size=4, removed=("D",))
    assert [e["name"] for e in entries if not e["removed"]] == ["C", "Zed", "A"]
    assert entries[-1] == {"name": "D", "aliases": [], "removed": True}


def test_registry_size_is_checked(tmp_path):
    path = tmp_path / "registry.json"
    path.write_text(json.dumps([{"name": "A"}, {"name": "B", "removed": True}]), encoding="utf-8")
    assert load_registry(str(path), expected_size=1).names == ("A",)
    with pytest.raises(ConfigError, match="paths.registry"):
        load_registry(str(path), expected_size=2)
