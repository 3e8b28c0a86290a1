"""
Linguistic scorers for talk-page comments.

A scorer maps a comment to five scores in [0, 1]: sentiment, formality,
politeness, toxicity and certainty. The bundled lexicon scorer is
deterministic; the import scorer replays externally computed scores from a
sidecar CSV keyed by (article, thread_id, comment_id).
"""
import logging
import re
from dataclasses import dataclass, field
from typing import Dict

import pandas as pd

from src.errors import ConfigError, ScorerError
from src.records import LINGUISTIC_DIMENSIONS, LinguisticScores

DEFAULT_THRESHOLD = 0.5
SIDECAR_COLUMNS = ("article", "thread_id", "comment_id") + LINGUISTIC_DIMENSIONS

_TOKEN = re.compile(r"[a-z']+")

# dimension -> (raising words, lowering words)
LEXICON = {
    "sentiment": (
        {"good", "great", "excellent", "agree", "support", "nice", "well", "helpful", "improved", "happy",
         "fine", "love", "best", "better", "glad", "wonderful"},
        {"bad", "poor", "wrong", "disagree", "oppose", "terrible", "problem", "worse", "worst", "awful",
         "unfortunately", "sad", "hate", "broken", "fail", "failed"},
    ),
    "formality": (
        {"therefore", "however", "furthermore", "regarding", "accordingly", "sources", "citation", "policy",
         "guideline", "consensus", "reference", "references", "moreover", "propose", "whereas"},
        {"lol", "gonna", "wanna", "yeah", "hey", "ok", "okay", "stuff", "kinda", "dunno", "cool", "yep",
         "nope", "btw", "omg"},
    ),
    "politeness": (
        {"please", "thank", "thanks", "kindly", "appreciate", "sorry", "welcome", "grateful", "cheers",
         "respectfully", "pardon"},
        {"stupid", "idiot", "shut", "nonsense", "ridiculous", "rubbish", "whatever", "obviously", "pathetic",
         "clueless"},
    ),
    "toxicity": (
        {"stupid", "idiot", "moron", "hate", "damn", "crap", "shut", "dumb", "pathetic", "loser", "garbage",
         "vandal", "liar"},
        {"please", "thank", "thanks", "agree", "appreciate", "welcome", "kindly", "respectfully"},
    ),
    "certainty": (
        {"definitely", "certainly", "clearly", "always", "never", "must", "sure", "undoubtedly", "proven",
         "obviously", "confirm", "confirmed", "fact"},
        {"maybe", "perhaps", "possibly", "might", "unsure", "unclear", "probably", "seems", "guess", "think",
         "doubt", "could"},
    ),
}


@dataclass(frozen=True)
class ScorerBinding:
    """A scorer plus the per-dimension cutoffs that define a "high" value."""
    scorer: object
    thresholds: Dict[str, float] = field(default_factory=lambda: dict.fromkeys(LINGUISTIC_DIMENSIONS,
                                                                                DEFAULT_THRESHOLD))

    @property
    def scorer_id(self):
        return self.scorer.scorer_id

    def metadata(self):
        return {"scorer_id": self.scorer_id, "thresholds": dict(self.thresholds)}


class LexiconScorer:
    """Word-list scorer: 0.5 + 0.5 * (up - down) / (up + down + 1) per dimension."""
    scorer_id = "lexicon-v1"

    def __init__(self, lexicon=None):
        self.lexicon = lexicon or LEXICON

    def score_text(self, text):
        tokens = _TOKEN.findall((text or "").lower())
        values = {}
        for dim in LINGUISTIC_DIMENSIONS:
            up_words, down_words = self.lexicon[dim]
            up = sum(1 for t in tokens if t in up_words)
            down = sum(1 for t in tokens if t in down_words)
            values[dim] = 0.5 + 0.5 * (up - down) / (up + down + 1)
        return LinguisticScores(**values)

    def score(self, comment):
        return self.score_text(comment.text)


class ImportScorer:
    """Replays scores from a sidecar CSV."""
    scorer_id = "import"

    def __init__(self, path):
        self.path = path
        self.scores = read_sidecar(path)
        logging.info(f"Loaded {len(self.scores)} imported comment scores from {path}")

    def score(self, comment):
        key = (comment.article, comment.thread_id, comment.comment_id)
        try:
            return self.scores[key]
        except KeyError:
            raise ScorerError(f"no imported score for (article, thread_id, comment_id) = {key!r}") from None


def read_sidecar(path):
    """
    Read a score sidecar into {(article, thread_id, comment_id): LinguisticScores}.

    Raises:
        ScorerError: Unreadable file, missing columns, or values outside [0, 1]
    """
    try:
        frame = pd.read_csv(path, dtype={"article": str}, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ScorerError(f"cannot read score sidecar {path}: {e}") from e
    missing = [c for c in SIDECAR_COLUMNS if c not in frame.columns]
    if missing:
        raise ScorerError(f"score sidecar {path} lacks columns {missing}")
    values = frame[list(LINGUISTIC_DIMENSIONS)].astype(float)
    if ((values < 0) | (values > 1)).any().any():
        raise ScorerError(f"score sidecar {path} has values outside [0, 1]")

    scores = {}
    for row, dims in zip(frame.itertuples(index=False), values.itertuples(index=False)):
        key = (row.article, int(row.thread_id), int(row.comment_id))
        scores[key] = LinguisticScores(*[float(v) for v in dims])
    return scores


def write_sidecar(path, comments, scores):
    """Write comment scores in sidecar layout."""
    rows = [{"article": c.article, "thread_id": c.thread_id, "comment_id": c.comment_id, **s.as_dict()}
            for c, s in zip(comments, scores)]
    pd.DataFrame(rows, columns=list(SIDECAR_COLUMNS)).to_csv(path, index=False, float_format="%.17g")


def score_comment(comment, binding):
    return binding.scorer.score(comment)


def make_binding(scorer_config, sidecar_path=None):
    """
    Build the scorer binding from the ``scorer`` config section.

    Raises:
        ConfigError: Unknown scorer id, or import scorer without a sidecar
    """
    scorer_id = scorer_config.get("scorer_id", LexiconScorer.scorer_id)
    if scorer_id == LexiconScorer.scorer_id:
        scorer = LexiconScorer()
    elif scorer_id == ImportScorer.scorer_id:
        if not sidecar_path:
            raise ConfigError("paths.scores_sidecar", "required by the import scorer")
        scorer = ImportScorer(sidecar_path)
    else:
        raise ConfigError("scorer.scorer_id", f"unknown scorer {scorer_id!r}")

    thresholds = dict.fromkeys(LINGUISTIC_DIMENSIONS, DEFAULT_THRESHOLD)
    thresholds.update(scorer_config.get("thresholds") or {})
    for dim, value in thresholds.items():
        if dim not in LINGUISTIC_DIMENSIONS:
            raise ConfigError(f"scorer.thresholds.{dim}", "unknown dimension")
        if not 0 < float(value) < 1:
            raise ConfigError(f"scorer.thresholds.{dim}", "threshold must lie in (0, 1)")
    return ScorerBinding(scorer=scorer, thresholds={k: float(v) for k, v in thresholds.items()})
