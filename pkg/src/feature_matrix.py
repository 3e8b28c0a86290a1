"""
Feature matrix assembly for wikisustain.

Runs every feature family for an article, lays the results out in the
fixed column order (Edit History, Team Composition, Topics, Experience,
Network, linguistic and structural Discussion features), appends the
missing/degenerate flag columns, and reads/writes the matrix as CSV plus a
JSON metadata document.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from src.discussion_features import (LINGUISTIC_FEATURES, LINGUISTIC_FLAGS, STRUCTURAL_FEATURES,
                                     STRUCTURAL_FLAGS, discussion_features)
from src.edit_features import (EDIT_HISTORY_FLAGS, TEAM_COMPOSITION, TEAM_COMPOSITION_FLAGS,
                               edit_history_columns, edit_history_features, team_composition_features)
from src.errors import FeatureError
from src.experience import EXPERIENCE_FEATURES, experience_features
from src.network_features import NETWORK_FEATURES, NETWORK_FLAGS, network_features
from src.topic_features import topic_features
from src.utils import stable_json_dumps, text_sha256, year_of
from src.window import truncate_page, window_history

FAMILIES = ("EditHistory", "TeamComposition", "Topics", "Experience", "Network",
            "DiscussionLinguistic", "DiscussionStructural")
BOOKKEEPING = ("article", "label", "promotion_year")
BASELINE_COLUMN = "Num-of-Revisions-Normalized"

FAMILY_FLAGS = {
    "EditHistory": EDIT_HISTORY_FLAGS,
    "TeamComposition": TEAM_COMPOSITION_FLAGS,
    "Topics": (),
    "Experience": (),
    "Network": NETWORK_FLAGS,
    "DiscussionLinguistic": LINGUISTIC_FLAGS,
    "DiscussionStructural": STRUCTURAL_FLAGS,
}


def family_columns(use_case, registry):
    return {
        "EditHistory": edit_history_columns(use_case),
        "TeamComposition": TEAM_COMPOSITION,
        "Topics": registry.columns,
        "Experience": EXPERIENCE_FEATURES,
        "Network": NETWORK_FEATURES,
        "DiscussionLinguistic": LINGUISTIC_FEATURES,
        "DiscussionStructural": STRUCTURAL_FEATURES,
    }


def feature_columns(use_case, registry):
    columns = family_columns(use_case, registry)
    return tuple(c for family in FAMILIES for c in columns[family])


def flag_columns():
    return tuple(c for family in FAMILIES for c in FAMILY_FLAGS[family])


def column_groups(use_case, registry):
    """Ablation groups: the six families, the single-column baseline and all columns."""
    columns = family_columns(use_case, registry)
    return {
        "Baseline": (BASELINE_COLUMN,),
        "EditHistory": columns["EditHistory"],
        "TeamComposition": columns["TeamComposition"],
        "Topics": columns["Topics"],
        "Experience": columns["Experience"],
        "Network": columns["Network"],
        "Discussions": columns["DiscussionLinguistic"] + columns["DiscussionStructural"],
        "All": feature_columns(use_case, registry),
    }


def featurize_article(page, timeline, use_case, registry, index, binding, diagnostics=None):
    """
    Compute all six feature families for one article.

    Args:
        page (PageHistory): Full histories (windowing happens here)
        timeline (ArticleTimeline): Labels and promotion times
        use_case (str): "FA" or "GA"
        registry (WikiProjectRegistry): Topic columns
        index (CorpusIndex): Population index for experience
        binding (ScorerBinding): Linguistic scorer and thresholds
        diagnostics (Counter, optional): Topic diagnostics tallies

    Returns:
        dict: Family name -> FeatureBlock
    """
    w = window_history(page, timeline, use_case)
    comments, linguistic, structural = discussion_features(w, binding)
    return {
        "EditHistory": edit_history_features(w, use_case, timeline),
        "TeamComposition": team_composition_features(w, comments),
        "Topics": topic_features(w.talk_revisions, registry, diagnostics),
        "Experience": experience_features(w, index),
        "Network": network_features(w),
        "DiscussionLinguistic": linguistic,
        "DiscussionStructural": structural,
    }


@dataclass
class FeatureMatrix:
    """Rows are articles sorted by title; features and flags are separate blocks."""
    use_case: str
    columns: Tuple[str, ...]
    flag_columns: Tuple[str, ...]
    articles: Tuple[str, ...]
    features: np.ndarray
    flags: np.ndarray
    labels: np.ndarray
    promotion_years: np.ndarray
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def n_rows(self):
        return len(self.articles)

    def column_index(self, names):
        lookup = {c: i for i, c in enumerate(self.columns)}
        unknown = [n for n in names if n not in lookup]
        if unknown:
            raise FeatureError("*", "columns", f"unknown columns {unknown}")
        return [lookup[n] for n in names]

    def select(self, names, include_flags=False):
        """Design matrix and column names for a column subset, optionally with the flag block."""
        x = self.features[:, self.column_index(names)]
        names = tuple(names)
        if include_flags and self.flag_columns:
            x = np.hstack([x, self.flags])
            names = names + self.flag_columns
        return x, names

    def rows(self, mask):
        return FeatureMatrix(
            use_case=self.use_case,
            columns=self.columns,
            flag_columns=self.flag_columns,
            articles=tuple(a for a, keep in zip(self.articles, mask) if keep),
            features=self.features[mask],
            flags=self.flags[mask],
            labels=self.labels[mask],
            promotion_years=self.promotion_years[mask],
            metadata=dict(self.metadata),
        )

    def header_hash(self):
        return text_sha256("\t".join(BOOKKEEPING + self.columns + self.flag_columns))

    def to_frame(self):
        frame = pd.DataFrame(self.features, columns=list(self.columns))
        flags = pd.DataFrame(self.flags.astype(np.int64), columns=list(self.flag_columns))
        head = pd.DataFrame({
            "article": list(self.articles),
            "label": self.labels.astype(np.int64),
            "promotion_year": self.promotion_years.astype(np.int64),
        })
        return pd.concat([head, frame, flags], axis=1)

    def write(self, path, meta_path=None):
        """Write ``matrix.csv`` and its ``.meta.json``; returns the metadata written."""
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        meta = {
            **self.metadata,
            "use_case": self.use_case,
            "bookkeeping_columns": list(BOOKKEEPING),
            "label_column": "label",
            "columns": list(self.columns),
            "flag_columns": list(self.flag_columns),
            "n_features": len(self.columns),
            "n_rows": self.n_rows,
            "header_hash": self.header_hash(),
        }
        with open(meta_path or meta_path_for(path), "w", encoding="utf-8") as f:
            f.write(stable_json_dumps(meta, indent=1) + "\n")
        return meta

    @classmethod
    def read(cls, path, meta_path=None):
        with open(meta_path or meta_path_for(path), "r", encoding="utf-8") as f:
            meta = json.load(f)
        frame = pd.read_csv(path, dtype={"article": str}, keep_default_na=False)
        columns = tuple(meta["columns"])
        flag_cols = tuple(meta["flag_columns"])
        extra = {k: v for k, v in meta.items() if k not in {
            "use_case", "bookkeeping_columns", "label_column", "columns", "flag_columns",
            "n_features", "n_rows", "header_hash"}}
        return cls(
            use_case=meta["use_case"],
            columns=columns,
            flag_columns=flag_cols,
            articles=tuple(frame["article"]),
            features=frame[list(columns)].to_numpy(dtype=np.float64),
            flags=frame[list(flag_cols)].to_numpy(dtype=np.float64),
            labels=frame["label"].to_numpy(dtype=np.int64),
            promotion_years=frame["promotion_year"].to_numpy(dtype=np.int64),
            metadata=extra,
        )


def meta_path_for(path):
    base = path[:-4] if path.endswith(".csv") else path
    return base + ".meta.json"


def _row(title, blocks, expected):
    values, flag_values = [], []
    for family in FAMILIES:
        block = blocks.get(family)
        if block is None:
            raise FeatureError(title, family)
        missing = [c for c in expected[family] if c not in block.values]
        if missing:
            raise FeatureError(title, family, f"missing columns {missing[:5]}")
        values.extend(block.values[c] for c in expected[family])
        flag_values.extend(block.flags.get(c, 0) for c in FAMILY_FLAGS[family])
    return values, flag_values


def assemble_matrix(timelines, outputs, use_case, registry, titles=None, metadata=None):
    """
    Build the feature matrix of a use case.

    Args:
        timelines (list): ArticleTimeline values
        outputs (dict): Title -> {family: FeatureBlock}
        use_case (str): "FA" or "GA"
        registry (WikiProjectRegistry): Topic column order
        titles (iterable, optional): Rows to include; defaults to the modeled population
        metadata (dict, optional): Extra metadata (provenance, scorer binding)

    Returns:
        FeatureMatrix

    Raises:
        FeatureError: An article lacks a family or a family lacks a column
    """
    by_title = {t.title: t for t in timelines}
    if titles is None:
        titles = [t.title for t in timelines if t.is_modeled(use_case)]
    titles = sorted(titles)
    expected = family_columns(use_case, registry)
    columns = feature_columns(use_case, registry)
    flags = flag_columns()

    rows, flag_rows, labels, years = [], [], [], []
    for title in titles:
        blocks = outputs.get(title)
        if blocks is None:
            raise FeatureError(title, "all")
        values, flag_values = _row(title, blocks, expected)
        timeline = by_title[title]
        rows.append(values)
        flag_rows.append(flag_values)
        label = timeline.label(use_case)
        labels.append(-1 if label is None else label)
        years.append(year_of(timeline.t_prom(use_case)))

    matrix = FeatureMatrix(
        use_case=use_case,
        columns=columns,
        flag_columns=flags,
        articles=tuple(titles),
        features=np.asarray(rows, dtype=np.float64).reshape(len(titles), len(columns)),
        flags=np.asarray(flag_rows, dtype=np.float64).reshape(len(titles), len(flags)),
        labels=np.asarray(labels, dtype=np.int64),
        promotion_years=np.asarray(years, dtype=np.int64),
        metadata=dict(metadata or {}),
    )
    if not np.isfinite(matrix.features).all():
        raise FeatureError("*", "all", "non-finite feature value")
    logging.info(f"Assembled {use_case} matrix: {matrix.n_rows} rows x {len(columns)} features "
                 f"+ {len(flags)} flags")
    return matrix


def _flatten(blocks):
    flat = {}
    for family in FAMILIES:
        block = blocks[family]
        flat.update({(family, k): v for k, v in block.values.items()})
        flat.update({(family, k): v for k, v in block.flags.items()})
    return flat


def leakage_audit(store, timelines, use_case, featurize, sample=5, seed=0):
    """
    Re-derive the features of a random sample of articles with every
    post-promotion revision removed and require identical vectors.

    Args:
        store: Object with ``load(title)``
        timelines (list): ArticleTimeline values
        use_case (str): "FA" or "GA"
        featurize (callable): (page, timeline) -> {family: FeatureBlock}
        sample (int): Number of articles to audit
        seed (int): Sampling seed

    Returns:
        list: Audited titles

    Raises:
        FeatureError: A feature value changed after truncation
    """
    candidates = sorted(t.title for t in timelines if t.is_modeled(use_case))
    if not candidates:
        return []
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(candidates, size=min(sample, len(candidates)), replace=False).tolist())
    by_title = {t.title: t for t in timelines}
    for title in chosen:
        timeline = by_title[title]
        page = store.load(title)
        full = _flatten(featurize(page, timeline))
        truncated = _flatten(featurize(truncate_page(page, timeline.t_prom(use_case)), timeline))
        changed = sorted(k for k in full if full[k] != truncated.get(k))
        if changed:
            family, column = changed[0]
            raise FeatureError(title, family, f"leakage audit failed on {column}")
    logging.info(f"Leakage audit passed for {len(chosen)} articles")
    return chosen
