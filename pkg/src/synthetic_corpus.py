"""
Deterministic synthetic corpus for wikisustain.

Generates a 50-article desk corpus: a JSON-lines revision dump with article
and talk pages, the four status-list files and a ready-to-run config.
Articles follow three paths (straight to FA, GA then FA, GA only); some are
demoted after promotion and a few are promoted after the censoring cutoffs.
Talk pages carry WikiProject banners, an ArticleHistory milestones table
and signed discussion threads.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import List, Optional, Tuple

import numpy as np

from src.records import FA, GA
from src.utils import SECONDS_PER_DAY, format_timestamp, stable_json_dumps

SYNTH_SEED = 7
N_ARTICLES = 50
SNAPSHOT_DATE = "2022-01-01"
EDITORS = tuple(f"Editor {i:02d}" for i in range(1, 41))
ADDRESSES = tuple(f"192.0.2.{i}" for i in range(1, 31))
MILESTONE_EDITOR = "Milestone Bot"
PROJECTS = ("Military history", "Biography", "Physics", "Film", "Music", "Birds", "Medicine", "Video games",
            "Chemistry", "Astronomy")
IMPORTANCE_LEVELS = ("top", "high", "mid", "low", "")

FRIENDLY = (
    "Thanks for the great work on the references, I agree with the changes.",
    "I think the sources here are fine; please add a citation for the last claim.",
    "Good improvements, thanks. However the lead might need a better summary.",
    "I appreciate the copyedit, the prose reads well now.",
    "Support. The article clearly meets the guideline regarding references.",
    "Perhaps we could propose a merge of the two sections? Cheers.",
)
HOSTILE = (
    "This is wrong and poorly sourced, obviously nonsense.",
    "Stop reverting, this is a pathetic edit war. Whatever.",
    "The section is broken and the prose is awful, I disagree with every change.",
    "Yeah this stuff is rubbish lol, definitely needs a rewrite.",
    "Unfortunately the citations failed verification, a bad problem.",
)


@dataclass
class SyntheticArticle:
    title: str
    path: str
    birth: int
    ga_prom: Optional[int] = None
    fa_prom: Optional[int] = None
    demotion: Optional[int] = None
    demotion_level: Optional[str] = None
    kept_reviews: List[int] = field(default_factory=list)
    team: Tuple[str, ...] = ()
    projects: Tuple[Tuple[str, str], ...] = ()

    @property
    def unsustainable(self):
        return self.demotion is not None

    @property
    def end(self):
        last = max(t for t in (self.ga_prom, self.fa_prom, self.demotion, *self.kept_reviews) if t is not None)
        return last + 200 * SECONDS_PER_DAY


def _epoch(year, month=1, day=1, hour=12):
    return int(datetime(year, month, day, hour, tzinfo=timezone.utc).timestamp())


def _days(rng, low, high):
    return int(rng.integers(low, high)) * SECONDS_PER_DAY


def milestone_date(seconds):
    """Talk-page date such as '14:02, 3 June 2010 (UTC)'."""
    moment = datetime.fromtimestamp(seconds, tz=timezone.utc)
    return f"{moment:%H:%M}, {moment.day} {moment:%B %Y} (UTC)"


def plan_articles(rng, n=N_ARTICLES):
    """Life-cycle of every article: path, promotion and demotion times, team and banners."""
    articles = []
    for i in range(n):
        title = f"Synthetic article {i + 1:02d}"
        path = "fa" if i < 20 else "ga-fa" if i < 30 else "ga"
        birth = _epoch(2004 + int(rng.integers(0, 5)), int(rng.integers(1, 13)), int(rng.integers(1, 28)))
        article = SyntheticArticle(title=title, path=path, birth=birth)
        at_risk = i in (17, 18, 19, 48, 49)

        if path == "ga-fa" or path == "ga":
            article.ga_prom = birth + _days(rng, 150, 700)
            if at_risk:
                article.ga_prom = _epoch(2020, 3, 1 + i % 20)
        if path == "fa":
            article.fa_prom = _epoch(2020, 4, 1 + i % 20) if at_risk else birth + _days(rng, 200, 1500)
        elif path == "ga-fa":
            article.fa_prom = article.ga_prom + _days(rng, 200, 700)

        top = article.fa_prom or article.ga_prom
        level = FA if article.fa_prom else GA
        if not at_risk and i % 3 == 0:
            article.demotion = top + _days(rng, 300, 1500)
            article.demotion_level = level
        elif not at_risk and i % 4 == 1:
            article.kept_reviews.append(top + _days(rng, 300, 900))

        size = int(rng.integers(3, 9))
        article.team = tuple(rng.choice(EDITORS, size=size, replace=False).tolist())
        chosen = rng.choice(PROJECTS, size=int(rng.integers(1, 4)), replace=False).tolist()
        article.projects = tuple((p, IMPORTANCE_LEVELS[int(rng.integers(0, len(IMPORTANCE_LEVELS)))])
                                 for p in chosen)
        articles.append(article)
    return articles


def _template_state(article, t):
    fa = article.fa_prom is not None and t >= article.fa_prom and not (
        article.demotion_level == FA and t >= article.demotion)
    ga = (not fa and article.ga_prom is not None and t >= article.ga_prom
          and (article.fa_prom is None or t < article.fa_prom)
          and not (article.demotion_level == GA and t >= article.demotion))
    return "{{featured article}}\n" if fa else "{{good article}}\n" if ga else ""


def _article_revisions(rng, article, next_id):
    keys = {article.birth, article.ga_prom, article.fa_prom, article.demotion} - {None}
    count = int(rng.integers(25, 60))
    span = max(article.end - article.birth, SECONDS_PER_DAY)
    times = set(int(article.birth + rng.integers(1, span)) for _ in range(count)) | keys
    times = sorted(times)

    anonymous_rate = 0.3 if article.unsustainable else 0.1
    revisions = []
    body_versions = []
    body = 0
    for k, t in enumerate(times):
        editor = (ADDRESSES[int(rng.integers(0, len(ADDRESSES)))] if rng.random() < anonymous_rate
                  else article.team[int(rng.integers(0, len(article.team)))])
        comment = ""
        near_event = any(abs(t - e) < 2 * SECONDS_PER_DAY for e in keys if e != article.birth)
        if k >= 2 and not near_event and rng.random() < (0.15 if article.unsustainable else 0.05):
            body = body_versions[k - 2]
            comment = f"Reverted edits by {revisions[-1]['editor']} to last version by {revisions[-2]['editor']}"
        else:
            body += 1
        body_versions.append(body)
        text = (_template_state(article, t) + f"'''{article.title}''' is a synthetic article.\n\n"
                + "\n\n".join(f"Paragraph {j} of the body." for j in range(body)))
        revisions.append({
            "page_id": next_id[0],
            "title": article.title,
            "namespace": 0,
            "revision_id": next_id[1],
            "parent_revision_id": revisions[-1]["revision_id"] if revisions else None,
            "timestamp": format_timestamp(t),
            "editor": editor,
            "comment": comment,
            "text": text,
        })
        next_id[1] += 1
    return revisions


def _milestone_rows(article):
    rows = []
    if article.ga_prom is not None:
        rows.append(("GAN", article.ga_prom, "listed"))
    if article.fa_prom is not None:
        rows.append(("FAC", article.fa_prom, "promoted"))
    for t in article.kept_reviews:
        rows.append(("FAR" if article.fa_prom else "GAR", t, "kept"))
    if article.demotion is not None:
        rows.append(("FAR", article.demotion, "demoted") if article.demotion_level == FA
                    else ("GAR", article.demotion, "delisted"))
    return sorted(rows, key=lambda row: row[1])


def _signature(name, t):
    stamp = milestone_date(t)
    if name[0].isdigit():
        return f"[[Special:Contributions/{name}|{name}]] {stamp}"
    return f"[[User:{name}|{name}]] ([[User talk:{name}|talk]]) {stamp}"


def _threads(rng, article):
    threads = []
    hostile_rate = 0.5 if article.unsustainable else 0.15
    for _ in range(int(rng.integers(1, 6))):
        start = article.birth + _days(rng, 20, max(21, (article.end - article.birth) // SECONDS_PER_DAY - 30))
        comments = []
        depth = 0
        t = start
        for position in range(int(rng.integers(1, 7))):
            if rng.random() < 0.1:
                author = ADDRESSES[int(rng.integers(0, len(ADDRESSES)))]
            elif rng.random() < 0.2:
                author = EDITORS[int(rng.integers(0, len(EDITORS)))]
            else:
                author = article.team[int(rng.integers(0, len(article.team)))]
            depth = 0 if position == 0 else int(rng.integers(1, depth + 2))
            pool = HOSTILE if rng.random() < hostile_rate else FRIENDLY
            comments.append((depth, author, t, pool[int(rng.integers(0, len(pool)))]))
            t += _days(rng, 0, 6) + int(rng.integers(60, 3600))
        threads.append(comments)
    return threads


def _talk_text(article, threads, rows, t):
    banners = "\n".join(f"{{{{WikiProject {name}|class=B" + (f"|importance={importance}" if importance else "")
                        + "}}" for name, importance in article.projects)
    parts = [f"{{{{WikiProject banner shell|1=\n{banners}\n}}}}"]
    visible = [row for row in rows if row[1] <= t]
    if visible:
        lines = ["{{ArticleHistory"]
        for n, (action, when, result) in enumerate(visible, 1):
            lines += [f"|action{n}={action}", f"|action{n}date={milestone_date(when)}", f"|action{n}result={result}"]
        lines.append("}}")
        parts.append("\n".join(lines))
    for number, comments in enumerate(threads, 1):
        shown = [c for c in comments if c[2] <= t]
        if not shown:
            continue
        body = "\n".join(f"{':' * depth}{text} {_signature(author, when)}" for depth, author, when, text in shown)
        parts.append(f"== Discussion {number} ==\n{body}")
    return "\n\n".join(parts) + "\n"


def _talk_revisions(rng, article, next_id):
    threads = _threads(rng, article)
    rows = _milestone_rows(article)
    moments = [(article.birth + 10 * SECONDS_PER_DAY, article.team[0])]
    moments += [(when, author) for comments in threads for _, author, when, _ in comments]
    moments += [(when + 3600, MILESTONE_EDITOR) for _, when, _ in rows]
    moments.sort()

    revisions = []
    for t, author in moments:
        revisions.append({
            "page_id": next_id[0] + 1,
            "title": f"Talk:{article.title}",
            "namespace": 1,
            "revision_id": next_id[1],
            "parent_revision_id": revisions[-1]["revision_id"] if revisions else None,
            "timestamp": format_timestamp(t),
            "editor": author,
            "comment": "",
            "text": _talk_text(article, threads, rows, t),
        })
        next_id[1] += 1
    return revisions


def status_lists_of(articles, snapshot):
    """The four list memberships as of the snapshot."""
    lists = {"current_fa": [], "current_ga": [], "former_fa": [], "delisted_ga": []}
    for a in articles:
        demoted = a.demotion is not None and a.demotion <= snapshot
        if a.fa_prom is not None:
            lists["former_fa" if demoted and a.demotion_level == FA else "current_fa"].append(a.title)
        elif a.ga_prom is not None:
            lists["delisted_ga" if demoted else "current_ga"].append(a.title)
    return {name: sorted(titles) for name, titles in lists.items()}


def synthetic_config():
    """Config for the desk corpus: small protocol sizes so a full run is quick."""
    return {
        "paths": {
            "dump": "corpus.jsonl",
            "lists": {name: f"lists/{name}.txt" for name in ("current_fa", "current_ga", "former_fa", "delisted_ga")},
            "workdir": "work",
        },
        "use_case": FA,
        "snapshot_date": SNAPSHOT_DATE,
        "model": {"n_estimators": 20, "max_depth": 2, "learning_rate": 0.1, "subsample": 1.0, "min_samples_leaf": 1},
        "evaluation": {
            "bootstrap_iterations": 10,
            "folds": 5,
            "heatmaps": [{"x": "Time-to-Promotion", "y": "Num-of-Editors", "bins": 2, "mode": "quantile"}],
            "min_positives": 5,
            "top_n": 10,
        },
        "settings": {"workers": 1, "log_dir": "logs", "leakage_audit_sample": 3},
        "seed": 0,
    }


def generate(out_dir, seed=SYNTH_SEED, n=N_ARTICLES):
    """
    Write the synthetic corpus into ``out_dir``.

    Returns:
        dict: Paths of the dump, the list files and the config
    """
    rng = np.random.default_rng(seed)
    articles = plan_articles(rng, n)
    os.makedirs(os.path.join(out_dir, "lists"), exist_ok=True)

    dump_path = os.path.join(out_dir, "corpus.jsonl")
    next_id = [1, 1000]
    with open(dump_path, "w", encoding="utf-8") as f:
        for article in articles:
            for revision in _article_revisions(rng, article, next_id):
                f.write(json.dumps(revision, sort_keys=True, ensure_ascii=False) + "\n")
            for revision in _talk_revisions(rng, article, next_id):
                f.write(json.dumps(revision, sort_keys=True, ensure_ascii=False) + "\n")
            next_id[0] += 2

    paths = {"dump": dump_path}
    snapshot = _epoch(2022, 1, 1, 0)
    for name, titles in status_lists_of(articles, snapshot).items():
        path = os.path.join(out_dir, "lists", f"{name}.txt")
        with open(path, "w", encoding="utf-8") as f:
            f.write("".join(f"{t}\n" for t in titles))
        paths[name] = path

    config_path = os.path.join(out_dir, "config.json")
    with open(config_path, "w", encoding="utf-8") as f:
        f.write(stable_json_dumps(synthetic_config(), indent=2) + "\n")
    paths["config"] = config_path
    logging.info(f"Synthetic corpus of {len(articles)} articles written to {out_dir}")
    return paths
