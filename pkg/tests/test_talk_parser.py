from src.talk_parser import (comment_revisers, find_signature, mixed_comment_fraction, parse_discussions,
                             parse_talk_text)
from tests.builders import T0, signature, talk_revision


def thread_text(extra=""):
    return "\n".join([
        "{{WikiProject banner shell|{{WikiProject Plants|importance=high}}}}",
        "== Sources ==",
        f"Opening comment. {signature('Alice', T0)}",
        f":Reply. {signature('Bob', T0 + 60)}",
        f"::Nested reply. {signature('Alice', T0 + 120)}",
        f":Another reply{extra}. {signature('Carol', T0 + 180)}",
        "Unsigned trailing remark",
        "",
        "== Images ==",
        f":::Deep start. {signature('192.0.2.5', T0 + 240)}",
    ])


def test_signature_variants():
    editor, when = find_signature(f"text {signature('Alice', T0)}")
    assert (editor.name, when) == ("Alice", T0)
    editor, _ = find_signature(f"text {signature('192.0.2.5', T0)}")
    assert editor.is_anonymous
    assert find_signature("no signature here 00:00, 1 January 2010 (UTC)") is None
    assert find_signature("[[User:Alice|Alice]] unsigned") is None


def test_threads_depths_and_parents():
    comments = parse_talk_text(thread_text(), article="Durian")
    layout = [(c.thread_id, c.comment_id, c.parent_comment_id, c.depth, c.discusser.name) for c in comments]
    assert layout == [
        (1, 1, None, 0, "Alice"),
        (1, 2, 1, 1, "Bob"),
        (1, 3, 2, 2, "Alice"),
        (1, 4, 1, 1, "Carol"),
        (2, 1, None, 0, "192.0.2.5"),
    ]
    assert comments[3].text.endswith("Unsigned trailing remark")
    assert all(c.article == "Durian" for c in comments)


def test_comments_after_promotion_are_dropped():
    comments = parse_talk_text(thread_text(), t_prom=T0 + 60)
    assert [c.discusser.name for c in comments] == ["Alice", "Bob"]


def test_discussions_read_the_latest_in_window_revision():
    history = [talk_revision(T0 + 500, text=thread_text()), talk_revision(T0 + 10_000, text="blanked")]
    assert len(parse_discussions(history, T0 + 1000)) == 5
    assert parse_discussions(history, T0) == []
    assert parse_discussions(history, T0 + 20_000) == []


def test_comment_revisers_and_mixed_fraction():
    history = [talk_revision(T0 + 500, who="Alice", text=thread_text()),
               talk_revision(T0 + 600, who="Dave", text=thread_text(extra=" (copyedited)"))]
    revisers = comment_revisers(history, T0 + 1000)
    assert revisers[("Carol", T0 + 180)] == {"Carol", "Dave"}
    assert revisers[("Alice", T0)] == {"Alice"}
    comments = parse_discussions(history, T0 + 1000)
    assert mixed_comment_fraction(comments, revisers) == 0.2
    assert mixed_comment_fraction([], revisers) == 0.0


def test_unknown_talk_editor_is_not_a_reviser():
    history = [talk_revision(T0 + 500, who="Alice", text=thread_text()),
               talk_revision(T0 + 600, who=None, text=thread_text(extra=" (copyedited)"))]
    assert comment_revisers(history, T0 + 1000)[("Carol", T0 + 180)] == {"Carol"}
