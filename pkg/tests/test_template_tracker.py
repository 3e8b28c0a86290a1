from src.records import DEMOTION, FA, GA, PROMOTION, TEMPLATE
from src.template_tracker import template_pattern, track_templates
from tests.builders import DAY, T0, chain

FA_TAG = "{{Featured article}}\nText"
GA_TAG = "{{good_article}}\nText"
PLAIN = "Text"


def history(*texts, spacing=DAY):
    return chain("Example", [(T0 + i * spacing, "Alice", text) for i, text in enumerate(texts)])


def test_pattern_tolerates_case_and_underscores():
    pattern = template_pattern(("featured article",))
    assert pattern.search("{{ Featured_Article }}")
    assert pattern.search("{{featured article|small=yes}}")
    assert not pattern.search("{{featured article candidates}}")


def test_stable_promotion_and_demotion():
    revisions = history(*([PLAIN] * 3 + [FA_TAG] * 6 + [PLAIN] * 6))
    events = track_templates(revisions)
    assert [(e.kind, e.level) for e in events] == [(PROMOTION, FA), (DEMOTION, FA)]
    assert events[0].revision_id == revisions[3].revision_id
    assert events[0].timestamp == revisions[3].timestamp
    assert all(e.source == TEMPLATE for e in events)


def test_short_vandalism_is_ignored():
    texts = [FA_TAG] * 6 + [PLAIN] * 2 + [FA_TAG] * 6
    events = track_templates(history(*texts, spacing=60))
    assert [(e.kind, e.level) for e in events] == [(PROMOTION, FA)]


def test_time_threshold_accepts_few_revisions():
    revisions = history(PLAIN, FA_TAG, FA_TAG, spacing=40 * DAY)
    events = track_templates(revisions)
    assert [(e.kind, e.level) for e in events] == [(PROMOTION, FA)]


def test_open_run_lasts_until_horizon():
    revisions = history(PLAIN, PLAIN, FA_TAG, spacing=60)
    assert track_templates(revisions) == []
    events = track_templates(revisions, horizon=revisions[-1].timestamp + 31 * DAY)
    assert [(e.kind, e.level) for e in events] == [(PROMOTION, FA)]


def test_ga_to_fa_upgrade_is_not_a_demotion():
    revisions = history(*([GA_TAG] * 6 + [FA_TAG] * 6))
    events = track_templates(revisions)
    assert [(e.kind, e.level) for e in events] == [(PROMOTION, GA), (PROMOTION, FA)]


def test_ga_delisting():
    revisions = history(*([GA_TAG] * 6 + [PLAIN] * 6))
    events = track_templates(revisions)
    assert [(e.kind, e.level) for e in events] == [(PROMOTION, GA), (DEMOTION, GA)]
