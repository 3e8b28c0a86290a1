"""
Article milestones parsing module for wikisustain.

Reads the ArticleHistory template (and the legacy single-event GA
templates) from the latest talk revision and turns its action rows into
promotion, demotion and review events.
"""
import logging
import re
from datetime import datetime, timezone

import mwparserfromhell

from src.records import DEMOTION, FA, GA, MILESTONES, PROMOTION, QualityEvent

ARTICLE_HISTORY_NAMES = {"articlehistory", "article history", "articlehistory/core"}

# (action, result) -> (kind, level); results are compared lower-cased
ACTION_RESULTS = {
    ("fac", "promoted"): (PROMOTION, FA),
    ("fac", "passed"): (PROMOTION, FA),
    ("far", "demoted"): (DEMOTION, FA),
    ("far", "removed"): (DEMOTION, FA),
    ("farc", "demoted"): (DEMOTION, FA),
    ("farc", "removed"): (DEMOTION, FA),
    ("gan", "listed"): (PROMOTION, GA),
    ("gan", "passed"): (PROMOTION, GA),
    ("gan", "promoted"): (PROMOTION, GA),
    ("gar", "delisted"): (DEMOTION, GA),
    ("gar", "demoted"): (DEMOTION, GA),
}

# Action rows counted as post-promotion reviews, whatever their result, and the status they review
REVIEW_ACTIONS = {"far": FA, "farc": FA, "gar": GA}

# Legacy talk templates that record a single event; first positional parameter is the date
LEGACY_TEMPLATES = {
    "ga": (PROMOTION, GA),
    "delistedga": (DEMOTION, GA),
    "delisted ga": (DEMOTION, GA),
}

DATE_FORMATS = (
    "%H:%M, %d %B %Y",
    "%H:%M, %B %d, %Y",
    "%Y-%m-%d",
    "%Y-%m-%dT%H:%M:%SZ",
    "%Y-%m-%d %H:%M:%S",
    "%d %B %Y",
    "%B %d, %Y",
    "%B %d %Y",
    "%d %b %Y",
    "%b %d, %Y",
)

_UTC_SUFFIX = re.compile(r"\s*\(UTC\)\s*$", re.IGNORECASE)
_ACTION_KEY = re.compile(r"^action(\d+)(date|result|link|oldid)?$", re.IGNORECASE)


def parse_milestone_date(value):
    """
    Parse the date formats found in milestones tables.

    Args:
        value (str): e.g. "14:02, 3 June 2022 (UTC)" or "2007-05-01"

    Returns:
        int or None: Epoch seconds (UTC), None when no format matches
    """
    value = _UTC_SUFFIX.sub("", " ".join(value.split()))
    for fmt in DATE_FORMATS:
        try:
            parsed = datetime.strptime(value, fmt)
        except ValueError:
            continue
        return int(parsed.replace(tzinfo=timezone.utc).timestamp())
    return None


def _template_name(template):
    return " ".join(template.name.strip_code().strip().replace("_", " ").lower().split())


def _param(template, name):
    if not template.has(name):
        return ""
    return template.get(name).value.strip_code().strip()


def _action_rows(template):
    """Group the numbered actionN* parameters into rows ordered by N."""
    rows = {}
    for param in template.params:
        match = _ACTION_KEY.match(str(param.name).strip())
        if not match:
            continue
        number, suffix = int(match.group(1)), (match.group(2) or "action").lower()
        rows.setdefault(number, {})[suffix] = param.value.strip_code().strip()
    return [rows[n] for n in sorted(rows)]


def _latest_text(talk_history):
    if not talk_history:
        return ""
    return talk_history[-1].text


def _iter_rows(talk_history):
    """Yield (action, result, date_string) rows from the latest talk revision."""
    code = mwparserfromhell.parse(_latest_text(talk_history))
    for template in code.filter_templates(recursive=True):
        name = _template_name(template)
        if name in ARTICLE_HISTORY_NAMES:
            for row in _action_rows(template):
                yield row.get("action", "").lower(), row.get("result", "").lower(), row.get("date", "")
        elif name in LEGACY_TEMPLATES:
            date = _param(template, "date") or (_param(template, "1") if template.has("1") else "")
            yield name, "legacy", date


def extract_milestones(talk_history):
    """
    Extract promotion/demotion events from the milestones table.

    Args:
        talk_history (list): Talk-page RevisionRecords, ascending

    Returns:
        list: QualityEvent values with source "milestones", in table order
    """
    events = []
    for action, result, date in _iter_rows(talk_history):
        if result == "legacy":
            mapped = LEGACY_TEMPLATES[action]
        else:
            mapped = ACTION_RESULTS.get((action, result))
        if mapped is None:
            continue
        timestamp = parse_milestone_date(date) if date else None
        if timestamp is None:
            logging.warning(f"Dropping milestones row {action}/{result} with unparseable date {date!r}")
            continue
        kind, level = mapped
        events.append(QualityEvent(kind=kind, level=level, timestamp=timestamp, source=MILESTONES))
    return events


def extract_reviews(talk_history, level=None):
    """
    Post-promotion reviews (FAR, FARC, GAR) in the milestones table, any result.

    A FARC row is the second stage of the FAR row before it unless that FAR
    ended as kept or a FAC row sits between them; the pair counts as one
    review dated at the FAR row.

    Args:
        talk_history (list): Talk-page RevisionRecords, ascending
        level (str, optional): FA or GA to keep only reviews of that status

    Returns:
        list: (epoch seconds, level) pairs, sorted
    """
    reviews = []
    open_far = False
    for action, result, date in _iter_rows(talk_history):
        if action == "fac":
            open_far = False
        if action not in REVIEW_ACTIONS:
            continue
        if action == "farc" and open_far:
            open_far = False
            continue
        timestamp = parse_milestone_date(date) if date else None
        if REVIEW_ACTIONS[action] == FA:
            open_far = timestamp is not None and action == "far" and result != "kept"
        if timestamp is None:
            logging.warning(f"Dropping review row {action} with unparseable date {date!r}")
            continue
        reviews.append((timestamp, REVIEW_ACTIONS[action]))
    return sorted(r for r in reviews if level is None or r[1] == level)
