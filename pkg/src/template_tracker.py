"""
Quality template tracking module for wikisustain.

Follows the Featured-Article and Good-Article templates through an
article's revisions. A presence change only becomes an event once the new
state survives long enough to rule out vandalism and edit wars.
"""
import re

from src.records import DEMOTION, FA, GA, PROMOTION, TEMPLATE, QualityEvent
from src.utils import SECONDS_PER_DAY

DEFAULT_FA_TEMPLATES = ("featured article",)
DEFAULT_GA_TEMPLATES = ("good article",)
MIN_REVISIONS = 5
MIN_SECONDS = 30 * SECONDS_PER_DAY
UPGRADE_WINDOW_SECONDS = 45 * SECONDS_PER_DAY


def template_pattern(names):
    """Case-insensitive ``{{ name`` matcher tolerant of whitespace and underscores."""
    alternatives = "|".join(r"[ _]+".join(re.escape(word) for word in name.split()) for name in names)
    return re.compile(r"\{\{\s*(?:" + alternatives + r")\s*(?:\||\}\})", re.IGNORECASE)


def _runs(states):
    """Split a boolean state sequence into (start_index, end_index_exclusive, state) runs."""
    runs = []
    start = 0
    for i in range(1, len(states) + 1):
        if i == len(states) or states[i] != states[start]:
            runs.append((start, i, states[start]))
            start = i
    return runs


def _accepted_transitions(revisions, states, min_revisions, min_seconds, horizon):
    """Indices where an accepted state run starts, with that run's state."""
    effective = False
    transitions = []
    for start, end, state in _runs(states):
        ended_at = revisions[end].timestamp if end < len(revisions) else horizon
        lasted = ended_at - revisions[start].timestamp
        accepted = (end - start) >= min_revisions or lasted >= min_seconds
        if accepted and state != effective:
            transitions.append((start, state))
            effective = state
    return transitions


def track_templates(article_history, fa_templates=DEFAULT_FA_TEMPLATES, ga_templates=DEFAULT_GA_TEMPLATES,
                    min_revisions=MIN_REVISIONS, min_seconds=MIN_SECONDS, horizon=None):
    """
    Detect stable presence transitions of the quality templates.

    A transition is accepted when the new state holds for at least
    ``min_revisions`` sequential revisions or at least ``min_seconds``; the
    event is dated at the first revision of the accepted state. A run still
    open at the end of the history lasts until ``horizon`` (defaults to the
    last revision's timestamp). A Good-Article template that disappears while
    the Featured-Article template takes over is an upgrade, not a demotion.

    Args:
        article_history (list): Article RevisionRecords, ascending
        fa_templates (tuple): Featured-Article template names and aliases
        ga_templates (tuple): Good-Article template names and aliases
        min_revisions (int): Revision persistence threshold
        min_seconds (int): Time persistence threshold
        horizon (int, optional): End of observation, epoch seconds

    Returns:
        list: QualityEvent values with source "template", sorted by time
    """
    revisions = list(article_history)
    if not revisions:
        return []
    if horizon is None or horizon < revisions[-1].timestamp:
        horizon = revisions[-1].timestamp

    patterns = {FA: template_pattern(fa_templates), GA: template_pattern(ga_templates)}
    states = {level: [bool(pattern.search(r.text)) for r in revisions] for level, pattern in patterns.items()}
    transitions = {level: _accepted_transitions(revisions, states[level], min_revisions, min_seconds, horizon)
                   for level in (FA, GA)}

    fa_promotions = [revisions[i].timestamp for i, state in transitions[FA] if state]
    events = []
    for level in (FA, GA):
        for index, state in transitions[level]:
            revision = revisions[index]
            if level == GA and not state:
                upgraded = states[FA][index] or any(
                    abs(t - revision.timestamp) <= UPGRADE_WINDOW_SECONDS for t in fa_promotions)
                if upgraded:
                    continue
            events.append(QualityEvent(kind=PROMOTION if state else DEMOTION, level=level,
                                       timestamp=revision.timestamp, source=TEMPLATE,
                                       revision_id=revision.revision_id))
    events.sort(key=lambda e: (e.timestamp, e.level, e.kind))
    return events
