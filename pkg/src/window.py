"""
Pre-promotion window for feature extraction.

Every feature family reads an article only through a WindowedHistory, so
nothing dated after the promotion of the active use case can leak in.
"""
from dataclasses import dataclass, field
from typing import Dict, Tuple

from src.errors import FeatureError
from src.records import PageHistory, RevisionRecord


@dataclass(frozen=True)
class WindowedHistory:
    title: str
    use_case: str
    t_birth: int
    t_prom: int
    article_revisions: Tuple[RevisionRecord, ...] = ()
    talk_revisions: Tuple[RevisionRecord, ...] = ()

    @property
    def latest_talk_text(self):
        return self.talk_revisions[-1].text if self.talk_revisions else ""


@dataclass
class FeatureBlock:
    """Named values of one feature family plus its missing/degenerate flag columns."""
    values: Dict[str, float] = field(default_factory=dict)
    flags: Dict[str, int] = field(default_factory=dict)


def window_history(page, timeline, use_case):
    """
    Restrict an article's histories to [t_birth, t_prom] of a use case.

    Args:
        page (PageHistory): Full article and talk histories
        timeline (ArticleTimeline): Labels and promotion times
        use_case (str): "FA" or "GA"

    Returns:
        WindowedHistory

    Raises:
        FeatureError: When the article has no promotion for the use case
    """
    t_prom = timeline.t_prom(use_case)
    if t_prom is None:
        raise FeatureError(timeline.title, "window", f"no {use_case} promotion")
    return WindowedHistory(
        title=timeline.title,
        use_case=use_case,
        t_birth=page.t_birth if page.t_birth is not None else t_prom,
        t_prom=t_prom,
        article_revisions=tuple(r for r in page.article_revisions if r.timestamp <= t_prom),
        talk_revisions=tuple(r for r in page.talk_revisions if r.timestamp <= t_prom),
    )


def truncate_page(page, t_prom):
    """Drop every revision dated after ``t_prom``."""
    return PageHistory(
        title=page.title,
        article_revisions=tuple(r for r in page.article_revisions if r.timestamp <= t_prom),
        talk_revisions=tuple(r for r in page.talk_revisions if r.timestamp <= t_prom),
    )
