"""
Page pairing and storage module for wikisustain.

Attaches talk pages to their articles and keeps one JSON file per article
under ``<workdir>/pages``, named by the percent-encoded title.
"""
import json
import logging
import os

from src.records import TALK_PREFIX, PageHistory, sort_revisions
from src.utils import filename_to_title, stable_json_dumps, title_to_filename

DIAGNOSTICS_FILE = "_diagnostics.json"


def split_talk_title(title):
    """Return (article_title, is_talk) for a raw page title."""
    if title.startswith(TALK_PREFIX):
        return title[len(TALK_PREFIX):], True
    return title, False


def merge_histories(left, right):
    """Union two histories of the same article, keeping canonical order and unique revision ids."""
    def union(a, b):
        by_id = {r.revision_id: r for r in a}
        for revision in b:
            by_id.setdefault(revision.revision_id, revision)
        return sort_revisions(by_id.values())

    return PageHistory(
        title=left.title,
        article_revisions=union(left.article_revisions, right.article_revisions),
        talk_revisions=union(left.talk_revisions, right.talk_revisions),
    )


def _as_article_fragment(fragment):
    base, is_talk = split_talk_title(fragment.title)
    if is_talk:
        return base, PageHistory(title=base, talk_revisions=fragment.talk_revisions or fragment.article_revisions)
    return base, PageHistory(title=base, article_revisions=fragment.article_revisions,
                             talk_revisions=fragment.talk_revisions)


def pair_article_talk(pages, diagnostics=None):
    """
    Attach each "Talk:X" fragment to the article "X".

    Args:
        pages: Iterable of PageHistory fragments (article or talk)
        diagnostics (list, optional): Receives the titles of orphan talk pages

    Returns:
        dict: Article title -> PageHistory
    """
    merged = {}
    has_article = set()
    for fragment in pages:
        base, piece = _as_article_fragment(fragment)
        if not split_talk_title(fragment.title)[1]:
            has_article.add(base)
        merged[base] = merge_histories(merged[base], piece) if base in merged else piece

    result = {}
    for title in sorted(merged):
        if title in has_article:
            result[title] = merged[title]
        else:
            logging.warning(f"Talk page without article: '{TALK_PREFIX}{title}'")
            if diagnostics is not None:
                diagnostics.append(TALK_PREFIX + title)
    return result


class PageStore:
    """Directory of serialized PageHistory files, one per article title."""

    def __init__(self, root):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def path_for(self, title):
        return os.path.join(self.root, title_to_filename(title))

    def exists(self, title):
        return os.path.exists(self.path_for(title))

    def load(self, title):
        with open(self.path_for(title), "r", encoding="utf-8") as f:
            return PageHistory.from_dict(json.load(f))

    def save(self, page):
        with open(self.path_for(page.title), "w", encoding="utf-8") as f:
            f.write(stable_json_dumps(page.to_dict()))

    def write_fragment(self, fragment):
        """Merge a streamed fragment into the stored history of its article."""
        base, piece = _as_article_fragment(fragment)
        if self.exists(base):
            piece = merge_histories(self.load(base), piece)
        self.save(piece)
        return base

    def titles(self):
        return sorted(filename_to_title(name) for name in os.listdir(self.root)
                      if name.endswith(".json") and name != DIAGNOSTICS_FILE)

    def finalize(self):
        """
        Remove talk pages that never met their article and record them.

        Returns:
            list: Orphan talk titles, also written to ``_diagnostics.json``
        """
        orphans = []
        for title in self.titles():
            page = self.load(title)
            if not page.article_revisions:
                orphans.append(TALK_PREFIX + title)
                os.remove(self.path_for(title))
        if orphans:
            logging.warning(f"{len(orphans)} talk page(s) had no matching article")
        with open(os.path.join(self.root, DIAGNOSTICS_FILE), "w", encoding="utf-8") as f:
            f.write(stable_json_dumps({"orphan_talk_pages": orphans}, indent=2))
        return orphans

    def __iter__(self):
        for title in self.titles():
            yield self.load(title)
