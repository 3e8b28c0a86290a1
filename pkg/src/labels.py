"""
Label construction module for wikisustain.

Merges milestones and template events into an article timeline, derives
the unsustainability label per use case (promoted and later demoted -> 1,
promoted and never demoted -> 0) and applies right-censoring.
"""
import dataclasses
import json
import logging

import pandas as pd

from src.errors import LabelError
from src.milestones import extract_milestones, extract_reviews
from src.records import (DEMOTION, FA, GA, PROMOTION, TEMPLATE, ArticleTimeline)
from src.template_tracker import (DEFAULT_FA_TEMPLATES, DEFAULT_GA_TEMPLATES, MIN_REVISIONS,
                                  MIN_SECONDS, track_templates)
from src.utils import SECONDS_PER_DAY, end_of_year, stable_json_dumps

MERGE_WINDOW_DAYS = 45
DEFAULT_CUTOFF_FA = 2018
DEFAULT_CUTOFF_GA = 2019

# A demotion at any of these levels makes the use case unsustainable
DEMOTION_LEVELS = {FA: (FA,), GA: (GA, FA)}

_LIST_LEVEL = {"current_fa": FA, "former_fa": FA, "current_ga": GA, "delisted_ga": GA}


def merge_events(milestone_events, template_events, window_days=MERGE_WINDOW_DAYS):
    """
    Union of both event sources; a template event duplicating a milestones
    event of the same (kind, level) within the window is dropped.
    """
    window = window_days * SECONDS_PER_DAY
    kept = list(milestone_events)
    for event in template_events:
        duplicate = any(m.kind == event.kind and m.level == event.level
                        and abs(m.timestamp - event.timestamp) <= window
                        for m in milestone_events)
        if not duplicate:
            kept.append(event)
    kept.sort(key=lambda e: (e.timestamp, 0 if e.kind == PROMOTION else 1, e.level))
    return kept


def _feasible(events, notes):
    """Drop demotions that precede every promotion at their level."""
    promoted = set()
    result = []
    for event in events:
        if event.kind == PROMOTION:
            promoted.add(event.level)
        elif event.level not in promoted:
            notes.append(f"dropped {event.level} demotion before any promotion ({event.source})")
            continue
        result.append(event)
    return result


def _first(events, kind, level):
    times = [e.timestamp for e in events if e.kind == kind and e.level == level]
    return min(times) if times else None


def _label(events, use_case, t_prom):
    if t_prom is None:
        return None
    demoted = any(e.kind == DEMOTION and e.level in DEMOTION_LEVELS[use_case] and e.timestamp >= t_prom
                  for e in events)
    return 1 if demoted else 0


def build_timeline(title, page, lists, fa_templates=DEFAULT_FA_TEMPLATES, ga_templates=DEFAULT_GA_TEMPLATES,
                   merge_window_days=MERGE_WINDOW_DAYS, min_revisions=MIN_REVISIONS, min_seconds=MIN_SECONDS,
                   horizon=None):
    """
    Reconstruct an article's quality life-cycle and its labels.

    Args:
        title (str): Article title (member of the population)
        page (PageHistory): Article and talk histories
        lists (StatusLists): The four status lists
        fa_templates, ga_templates (tuple): Template names and aliases
        merge_window_days (int): Cross-source duplicate window
        min_revisions, min_seconds (int): Template persistence thresholds
        horizon (int, optional): End of observation for open template runs

    Returns:
        ArticleTimeline: Events, labels, promotion times; ``inconsistent``
        set when a listed level has no promotion event
    """
    notes = []
    milestone_events = extract_milestones(page.talk_revisions)
    template_events = track_templates(page.article_revisions, fa_templates, ga_templates,
                                      min_revisions=min_revisions, min_seconds=min_seconds, horizon=horizon)
    events = _feasible(merge_events(milestone_events, template_events, merge_window_days), notes)

    t_prom_fa = _first(events, PROMOTION, FA)
    t_prom_ga = _first(events, PROMOTION, GA)
    in_lists = lists.memberships(title)

    inconsistent = False
    for list_name in in_lists:
        level = _LIST_LEVEL[list_name]
        if (t_prom_fa if level == FA else t_prom_ga) is None:
            inconsistent = True
            notes.append(f"listed in {list_name} but no {level} promotion found")
    if page.t_birth is None:
        inconsistent = True
        notes.append("no article revisions")
    if inconsistent:
        logging.warning(f"Inconsistent timeline for '{title}': {'; '.join(notes)}")

    return ArticleTimeline(
        title=title,
        t_birth=page.t_birth,
        events=events,
        label_fa=_label(events, FA, t_prom_fa),
        label_ga=_label(events, GA, t_prom_ga),
        t_prom_fa=t_prom_fa,
        t_prom_ga=t_prom_ga,
        reviews=extract_reviews(page.talk_revisions),
        in_lists=in_lists,
        inconsistent=inconsistent,
        notes=notes,
    )


def apply_censoring(timelines, cutoff_fa=DEFAULT_CUTOFF_FA, cutoff_ga=DEFAULT_CUTOFF_GA):
    """
    Mark articles promoted after the cutoff year as censored, per use case.

    The boundary is Dec 31 23:59:59 UTC of the cutoff year. Censored
    articles drop out of that use case's training population but stay in
    the list for the at-risk report.

    Returns:
        list: New ArticleTimeline values with ``censored_fa``/``censored_ga`` set
    """
    fa_boundary = end_of_year(cutoff_fa)
    ga_boundary = end_of_year(cutoff_ga)
    result = []
    for timeline in timelines:
        result.append(dataclasses.replace(
            timeline,
            censored_fa=timeline.t_prom_fa is not None and timeline.t_prom_fa > fa_boundary,
            censored_ga=timeline.t_prom_ga is not None and timeline.t_prom_ga > ga_boundary,
        ))
    return result


def review_count(timeline, use_case):
    """
    Number of review events after promotion for a use case.

    Milestones reviews of the use case's own status count once each; a
    template-detected demotion with no matching milestones row stands for
    a review too.
    """
    t_prom = timeline.t_prom(use_case)
    if t_prom is None:
        return 0
    count = sum(1 for t, level in timeline.reviews if level == use_case and t > t_prom)
    count += sum(1 for e in timeline.events
                 if e.kind == DEMOTION and e.source == TEMPLATE and e.level in DEMOTION_LEVELS[use_case]
                 and e.timestamp > t_prom)
    return count


def write_timelines(path, timelines):
    with open(path, "w", encoding="utf-8") as f:
        for timeline in sorted(timelines, key=lambda t: t.title):
            f.write(stable_json_dumps(timeline.to_dict()) + "\n")


def read_timelines(path):
    """
    Read ``timelines.jsonl`` back into ArticleTimeline records.

    Raises:
        LabelError: If a line is not a valid timeline record
    """
    timelines = []
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                timelines.append(ArticleTimeline.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as e:
                raise LabelError(f"{path}:{number}: malformed timeline record ({e})") from e
    return timelines


def write_label_diagnostics(path, timelines):
    """CSV of inconsistent timelines (title, lists, notes)."""
    rows = [{"title": t.title, "in_lists": ";".join(t.in_lists), "notes": "; ".join(t.notes)}
            for t in sorted(timelines, key=lambda t: t.title) if t.inconsistent]
    pd.DataFrame(rows, columns=["title", "in_lists", "notes"]).to_csv(path, index=False)
    return len(rows)
