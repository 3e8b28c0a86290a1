import os

from src.page_store import PageStore, merge_histories, pair_article_talk, split_talk_title
from tests.builders import DAY, T0, page, revision, talk_revision


def test_split_talk_title():
    assert split_talk_title("Talk:Moon") == ("Moon", True)
    assert split_talk_title("Moon") == ("Moon", False)


def test_merge_keeps_unique_ids_in_order():
    a = page("Moon", article=[revision(T0 + DAY, revision_id=2), revision(T0, revision_id=1)])
    b = page("Moon", article=[revision(T0 + DAY, revision_id=2), revision(T0 + 2 * DAY, revision_id=3)])
    merged = merge_histories(a, b)
    assert [r.revision_id for r in merged.article_revisions] == [1, 2, 3]


def test_pairing_attaches_talk_and_drops_orphans():
    fragments = [
        page("Moon", article=[revision(T0, title="Moon")]),
        page("Talk:Moon", talk=[talk_revision(T0 + DAY, title="Talk:Moon")]),
        page("Talk:Ghost", talk=[talk_revision(T0, title="Talk:Ghost")]),
    ]
    orphans = []
    pages = pair_article_talk(fragments, orphans)
    assert list(pages) == ["Moon"]
    assert len(pages["Moon"].talk_revisions) == 1
    assert orphans == ["Talk:Ghost"]


def test_store_merges_fragments_and_finalizes(tmp_path):
    store = PageStore(str(tmp_path / "pages"))
    store.write_fragment(page("AC/DC", article=[revision(T0, title="AC/DC", revision_id=1)]))
    store.write_fragment(page("Talk:AC/DC", talk=[talk_revision(T0, title="Talk:AC/DC", revision_id=5)]))
    store.write_fragment(page("AC/DC", article=[revision(T0 + DAY, title="AC/DC", revision_id=2)]))
    store.write_fragment(page("Talk:Lonely", talk=[talk_revision(T0, title="Talk:Lonely", revision_id=9)]))

    assert store.finalize() == ["Talk:Lonely"]
    assert store.titles() == ["AC/DC"]
    stored = store.load("AC/DC")
    assert [r.revision_id for r in stored.article_revisions] == [1, 2]
    assert [r.revision_id for r in stored.talk_revisions] == [5]
    assert os.path.exists(os.path.join(store.root, "_diagnostics.json"))
    assert [p.title for p in store] == ["AC/DC"]
