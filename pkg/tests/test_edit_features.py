import pytest

from src.edit_features import (count_reverts, detect_revert, edit_history_features, team_composition_features)
from src.errors import FeatureError
from src.records import FA, GA, Comment, Editor
from src.window import window_history
from tests.builders import DAY, T0, chain, page, revision, timeline, window


def comment(name, n=0):
    return Comment(thread_id=0, comment_id=n, parent_comment_id=None, discusser=Editor.from_name(name),
                   timestamp=T0, depth=0, text="ok")


def test_window_drops_revisions_after_promotion():
    article = chain("Example", [(T0 + i * DAY, "Alice", f"v{i}") for i in range(5)])
    full = page(article=article)
    w = window_history(full, timeline(t_prom_fa=T0 + 2 * DAY), FA)
    assert len(w.article_revisions) == 3
    assert w.t_birth == T0
    with pytest.raises(FeatureError):
        window_history(full, timeline(), GA)


def test_identity_revert_and_marker():
    a, b, c = chain("Example", [(T0, "Alice", "good"), (T0 + 1, "Vandal", "bad"), (T0 + 2, "Bob", "good")])
    assert detect_revert(c, [a, b])
    assert not detect_revert(b, [a])
    undo = revision(T0 + 3, text="new", comment="Undid revision 123 by X")
    assert detect_revert(undo, [])
    assert not detect_revert(revision(T0 + 4, text="x", comment="Reviewing sources"), [])


def test_planted_reverts_are_counted():
    texts = ["a", "b", "a", "c", "d", "c", "e", "f", "g", "f", "h", "i"]
    revisions = chain("Example", [(T0 + i, "Alice", t) for i, t in enumerate(texts)])
    assert count_reverts(revisions) == 3


def fixture_window():
    # 10 revisions by 4 editors across 20 days, one identity revert at index 5
    texts = ["r0", "r1", "r2", "r3", "r4", "r3", "r6", "r7", "r8", "r9"]
    who = ["Alice", "Bob", "Carol", "Alice", "Dave", "Bob", "Alice", "Carol", "Alice", "Bob"]
    stamps = [T0 + round(i * 20 * DAY / 9) for i in range(10)]
    article = chain("Example", list(zip(stamps, who, texts)))
    return window(article=article, t_birth=T0, t_prom=T0 + 20 * DAY)


def test_edit_history_fixture():
    w = fixture_window()
    block = edit_history_features(w, FA, timeline(t_prom_ga=T0 + 5 * DAY, t_prom_fa=T0 + 20 * DAY))
    assert block.values == pytest.approx({
        "Num-of-Editors": 4, "Num-of-Revisions": 10, "Time-to-Promotion": 20,
        "Reverted-Revisions-Percentage": 0.1, "Num-of-Editors-Normalized": 0.4,
        "Num-of-Revisions-Normalized": 0.5, "Was-a-Good-Article": 1,
    })
    assert block.flags == {"Time-to-Promotion-Zero-Flag": 0}
    assert "Was-a-Good-Article" not in edit_history_features(w, GA, timeline()).values


def test_single_revision_promoted_at_birth():
    w = window(article=[revision(T0, revision_id=1)], t_birth=T0, t_prom=T0)
    block = edit_history_features(w, FA, timeline())
    assert block.values["Num-of-Editors"] == 1
    assert block.values["Num-of-Revisions"] == 1
    assert block.values["Reverted-Revisions-Percentage"] == 0
    assert block.values["Was-a-Good-Article"] == 0
    assert block.values["Num-of-Revisions-Normalized"] == 1
    assert block.flags["Time-to-Promotion-Zero-Flag"] == 1


def test_empty_window_is_an_error():
    with pytest.raises(FeatureError):
        edit_history_features(window(t_prom=T0), FA, timeline())


def test_team_single_editor():
    w = window(article=chain("Example", [(T0 + i, "Alice", str(i)) for i in range(4)]))
    block = team_composition_features(w, [])
    assert block.values == {"Editors-Gini": 0.0, "Anonymous-Revisions-Percentage": 0.0,
                            "Editors-Who-Discuss-Percentage": 0.0, "Discussers-Who-Edit-Percentage": 0.0,
                            "Edit-Discussion-Share-Gap": 1.0}
    assert block.flags == {"Registered-Editors-Missing-Flag": 0, "Talk-Discussers-Missing-Flag": 1}


def test_team_overlap():
    steps = [(T0 + i, "Alice" if i < 5 else "Bob", str(i)) for i in range(10)]
    block = team_composition_features(window(article=chain("Example", steps)), [comment("Alice"), comment("Alice")])
    assert block.values["Editors-Who-Discuss-Percentage"] == 0.5
    assert block.values["Discussers-Who-Edit-Percentage"] == 1.0


def test_team_share_gap():
    steps = [(T0 + i, who, str(i)) for i, who in enumerate(["Alice"] * 8 + ["Bob", "Carol"])]
    block = team_composition_features(window(article=chain("Example", steps)), [comment("Alice"), comment("Bob")])
    assert block.values["Edit-Discussion-Share-Gap"] == pytest.approx((0.3 + 0.4 + 0.1) / 3)


def test_all_anonymous_article():
    steps = [(T0 + i, f"192.0.2.{i}", str(i)) for i in range(3)]
    block = team_composition_features(window(article=chain("Example", steps)), [])
    assert block.values["Editors-Gini"] == 0.0
    assert block.values["Anonymous-Revisions-Percentage"] == 1.0
    assert block.flags["Registered-Editors-Missing-Flag"] == 1


def test_unknown_contributors_are_not_counted_as_editors_or_ips():
    who = ["Alice", None, "192.0.2.1", None, "Bob"]
    w = window(article=chain("Example", [(T0 + i * DAY, name, str(i)) for i, name in enumerate(who)]))
    history = edit_history_features(w, GA, timeline()).values
    assert history["Num-of-Editors"] == 3
    assert history["Num-of-Revisions"] == 5
    team = team_composition_features(w, []).values
    assert team["Anonymous-Revisions-Percentage"] == pytest.approx(0.2)
    assert team["Editors-Gini"] == pytest.approx(0.0)
