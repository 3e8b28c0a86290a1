"""
Edit History and Team Composition feature families.

Both families are computed from a single article's pre-promotion window.
Anonymous editors count as distinct IPs for the editor total but are kept
out of every registered-editor statistic.
"""
from collections import Counter

from src.errors import FeatureError
from src.inequality import gini
from src.records import FA, GA
from src.utils import SECONDS_PER_DAY
from src.window import FeatureBlock

REVERT_LOOKBACK = 10
REVERT_PREFIXES = ("revert", "rv ", "rvv", "undid")

EDIT_HISTORY_FA = (
    "Num-of-Editors",
    "Num-of-Revisions",
    "Time-to-Promotion",
    "Reverted-Revisions-Percentage",
    "Num-of-Editors-Normalized",
    "Num-of-Revisions-Normalized",
    "Was-a-Good-Article",
)
EDIT_HISTORY_GA = EDIT_HISTORY_FA[:-1]
EDIT_HISTORY_FLAGS = ("Time-to-Promotion-Zero-Flag",)

TEAM_COMPOSITION = (
    "Editors-Gini",
    "Anonymous-Revisions-Percentage",
    "Editors-Who-Discuss-Percentage",
    "Discussers-Who-Edit-Percentage",
    "Edit-Discussion-Share-Gap",
)
TEAM_COMPOSITION_FLAGS = ("Registered-Editors-Missing-Flag", "Talk-Discussers-Missing-Flag")


def edit_history_columns(use_case):
    return EDIT_HISTORY_FA if use_case == FA else EDIT_HISTORY_GA


def _is_revert_comment(comment):
    text = (comment or "").strip().lower()
    return text == "rv" or text.startswith(REVERT_PREFIXES)


def detect_revert(revision, recent_window):
    """
    Decide whether a revision reverts earlier content.

    Args:
        revision (RevisionRecord): Candidate revision
        recent_window (sequence): Up to 10 preceding revisions, oldest first

    Returns:
        bool: True for an identity revert (content hash equal to one of the
        preceding revisions other than its direct parent) or a revert marker
        in the edit comment
    """
    if _is_revert_comment(revision.comment):
        return True
    if revision.suppressed:
        return False
    window = list(recent_window)[-REVERT_LOOKBACK:]
    if revision.parent_revision_id is not None:
        candidates = [r for r in window if r.revision_id != revision.parent_revision_id]
    else:
        candidates = window[:-1]
    return any(r.content_hash == revision.content_hash and not r.suppressed for r in candidates)


def count_reverts(revisions):
    revisions = list(revisions)
    return sum(1 for i, revision in enumerate(revisions)
               if detect_revert(revision, revisions[max(0, i - REVERT_LOOKBACK):i]))


def edit_history_features(w, use_case, timeline):
    """
    Editing dynamics of the article before promotion.

    Returns:
        FeatureBlock: 7 values for FA (including Was-a-Good-Article), 6 for GA;
        Time-to-Promotion-Zero-Flag set when the article was promoted at birth
    """
    revisions = w.article_revisions
    if not revisions:
        raise FeatureError(w.title, "EditHistory", "empty pre-promotion window")

    editors = len({r.editor for r in revisions if not r.editor.is_unknown})
    count = len(revisions)
    days = (w.t_prom - w.t_birth) / SECONDS_PER_DAY
    zero_time = days <= 0

    values = {
        "Num-of-Editors": float(editors),
        "Num-of-Revisions": float(count),
        "Time-to-Promotion": max(days, 0.0),
        "Reverted-Revisions-Percentage": count_reverts(revisions) / count,
        "Num-of-Editors-Normalized": editors / count,
        "Num-of-Revisions-Normalized": float(count) if zero_time else count / days,
    }
    if use_case == FA:
        t_ga = timeline.t_prom(GA)
        values["Was-a-Good-Article"] = float(t_ga is not None and t_ga < w.t_prom)
    return FeatureBlock(values=values, flags={"Time-to-Promotion-Zero-Flag": int(zero_time)})


def _shares(counter):
    total = sum(counter.values())
    return {name: n / total for name, n in counter.items()} if total else {}


def team_composition_features(w, comments):
    """
    Team composition of editors and discussers.

    Args:
        w (WindowedHistory): Pre-promotion window
        comments (list): Signed talk comments in the window

    Returns:
        FeatureBlock: TC values; flags mark an all-anonymous article and a
        talk page without registered discussers
    """
    revisions = w.article_revisions
    if not revisions:
        raise FeatureError(w.title, "TeamComposition", "empty pre-promotion window")

    edits = Counter(r.editor.name for r in revisions if r.editor.is_registered)
    talk = Counter(c.discusser.name for c in comments if c.discusser.is_registered)
    anonymous = sum(1 for r in revisions if r.editor.is_anonymous)

    editors, discussers = set(edits), set(talk)
    both = editors & discussers
    edit_shares, talk_shares = _shares(edits), _shares(talk)
    people = editors | discussers

    values = {
        "Editors-Gini": gini(list(edits.values())) if edits else 0.0,
        "Anonymous-Revisions-Percentage": anonymous / len(revisions),
        "Editors-Who-Discuss-Percentage": len(both) / len(editors) if editors else 0.0,
        "Discussers-Who-Edit-Percentage": len(both) / len(discussers) if discussers else 0.0,
        "Edit-Discussion-Share-Gap": (
            sum(abs(edit_shares.get(u, 0.0) - talk_shares.get(u, 0.0)) for u in sorted(people)) / len(people)
            if people else 0.0
        ),
    }
    flags = {
        "Registered-Editors-Missing-Flag": int(not editors),
        "Talk-Discussers-Missing-Flag": int(not discussers),
    }
    return FeatureBlock(values=values, flags=flags)
