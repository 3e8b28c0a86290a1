"""
Domain records shared by every pipeline stage.

All records are plain dataclasses with explicit ``to_dict``/``from_dict``
helpers so that serialized artifacts stay stable across runs.
"""
import ipaddress
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from src.utils import content_hash

ARTICLE_NAMESPACE = 0
TALK_NAMESPACE = 1
TALK_PREFIX = "Talk:"

REGISTERED = "registered"
ANONYMOUS = "anonymous"
UNKNOWN = "unknown"

# Name carried by revisions whose contributor was deleted or is missing in the dump
UNKNOWN_CONTRIBUTOR = "(unknown)"

FA = "FA"
GA = "GA"
USE_CASES = (FA, GA)

PROMOTION = "promotion"
DEMOTION = "demotion"

MILESTONES = "milestones"
TEMPLATE = "template"


@dataclass(frozen=True, order=True)
class Editor:
    """
    A revision author: a registered username, an anonymous IP, or an
    unknown contributor whose identity the dump does not carry.
    """
    kind: str
    name: str

    def __post_init__(self):
        if self.kind not in (REGISTERED, ANONYMOUS, UNKNOWN):
            raise ValueError(f"unknown editor kind {self.kind!r}")
        if self.kind == ANONYMOUS:
            ipaddress.ip_address(self.name)

    @classmethod
    def registered(cls, name):
        return cls(REGISTERED, name)

    @classmethod
    def anonymous(cls, ip):
        return cls(ANONYMOUS, ip)

    @classmethod
    def unknown(cls):
        return cls(UNKNOWN, UNKNOWN_CONTRIBUTOR)

    @classmethod
    def from_name(cls, name):
        """Classify a bare contributor string: IP literals are anonymous."""
        try:
            ipaddress.ip_address(name)
        except ValueError:
            return cls.registered(name)
        return cls.anonymous(name)

    @property
    def is_anonymous(self):
        return self.kind == ANONYMOUS

    @property
    def is_registered(self):
        return self.kind == REGISTERED

    @property
    def is_unknown(self):
        return self.kind == UNKNOWN

    def to_dict(self):
        return {"kind": self.kind, "name": self.name}

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], data["name"])


@dataclass(frozen=True)
class RevisionRecord:
    """One revision of an article (namespace 0) or talk page (namespace 1)."""
    page_id: int
    title: str
    namespace: int
    revision_id: int
    parent_revision_id: Optional[int]
    timestamp: int
    editor: Editor
    comment: str
    text: str
    content_hash: str
    suppressed: bool = False

    @classmethod
    def create(cls, page_id, title, namespace, revision_id, timestamp, editor,
               text="", comment="", parent_revision_id=None, suppressed=False):
        """Build a record, deriving content_hash from text."""
        return cls(page_id=page_id, title=title, namespace=namespace,
                   revision_id=revision_id, parent_revision_id=parent_revision_id,
                   timestamp=int(timestamp), editor=editor, comment=comment or "",
                   text=text or "", content_hash=content_hash(text),
                   suppressed=suppressed)

    @property
    def sort_key(self):
        return (self.timestamp, self.revision_id)

    def to_dict(self):
        return {
            "page_id": self.page_id,
            "title": self.title,
            "namespace": self.namespace,
            "revision_id": self.revision_id,
            "parent_revision_id": self.parent_revision_id,
            "timestamp": self.timestamp,
            "editor": self.editor.to_dict(),
            "comment": self.comment,
            "text": self.text,
            "content_hash": self.content_hash,
            "suppressed": self.suppressed,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            page_id=int(data["page_id"]),
            title=data["title"],
            namespace=int(data["namespace"]),
            revision_id=int(data["revision_id"]),
            parent_revision_id=data.get("parent_revision_id"),
            timestamp=int(data["timestamp"]),
            editor=Editor.from_dict(data["editor"]),
            comment=data.get("comment", ""),
            text=data.get("text", ""),
            content_hash=data.get("content_hash") or content_hash(data.get("text", "")),
            suppressed=bool(data.get("suppressed", False)),
        )


def sort_revisions(revisions):
    """Canonical revision order: ascending (timestamp, revision_id)."""
    return tuple(sorted(revisions, key=lambda r: r.sort_key))


@dataclass(frozen=True)
class PageHistory:
    """An article's revisions paired with its talk page revisions."""
    title: str
    article_revisions: Tuple[RevisionRecord, ...] = ()
    talk_revisions: Tuple[RevisionRecord, ...] = ()

    @property
    def t_birth(self):
        if not self.article_revisions:
            return None
        return self.article_revisions[0].timestamp

    def to_dict(self):
        return {
            "title": self.title,
            "article_revisions": [r.to_dict() for r in self.article_revisions],
            "talk_revisions": [r.to_dict() for r in self.talk_revisions],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            title=data["title"],
            article_revisions=sort_revisions(RevisionRecord.from_dict(r) for r in data.get("article_revisions", [])),
            talk_revisions=sort_revisions(RevisionRecord.from_dict(r) for r in data.get("talk_revisions", [])),
        )


@dataclass(frozen=True)
class StatusLists:
    """The four community status lists that define the candidate population."""
    current_fa: FrozenSet[str] = frozenset()
    current_ga: FrozenSet[str] = frozenset()
    former_fa: FrozenSet[str] = frozenset()
    delisted_ga: FrozenSet[str] = frozenset()
    snapshot_date: Optional[str] = None

    @property
    def population(self):
        return self.current_fa | self.current_ga | self.former_fa | self.delisted_ga

    def memberships(self, title):
        """Names of the lists a title appears in."""
        names = ("current_fa", "current_ga", "former_fa", "delisted_ga")
        return [name for name in names if title in getattr(self, name)]


@dataclass(frozen=True)
class QualityEvent:
    kind: str
    level: str
    timestamp: int
    source: str
    revision_id: Optional[int] = None

    def to_dict(self):
        return {"kind": self.kind, "level": self.level, "timestamp": self.timestamp,
                "source": self.source, "revision_id": self.revision_id}

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], data["level"], int(data["timestamp"]), data["source"],
                   data.get("revision_id"))


@dataclass
class ArticleTimeline:
    """Quality life-cycle of one article and its per-use-case labels."""
    title: str
    t_birth: Optional[int]
    events: List[QualityEvent] = field(default_factory=list)
    label_fa: Optional[int] = None
    label_ga: Optional[int] = None
    censored_fa: bool = False
    censored_ga: bool = False
    t_prom_fa: Optional[int] = None
    t_prom_ga: Optional[int] = None
    reviews: List[Tuple[int, str]] = field(default_factory=list)
    in_lists: List[str] = field(default_factory=list)
    inconsistent: bool = False
    notes: List[str] = field(default_factory=list)

    def label(self, use_case):
        return self.label_fa if use_case == FA else self.label_ga

    def t_prom(self, use_case):
        return self.t_prom_fa if use_case == FA else self.t_prom_ga

    def censored(self, use_case):
        return self.censored_fa if use_case == FA else self.censored_ga

    def is_modeled(self, use_case):
        """True when the article belongs to the training population of a use case."""
        return (not self.inconsistent and self.label(use_case) is not None
                and not self.censored(use_case))

    def to_dict(self):
        return {
            "title": self.title,
            "t_birth": self.t_birth,
            "events": [e.to_dict() for e in self.events],
            "label_fa": self.label_fa,
            "label_ga": self.label_ga,
            "censored_fa": self.censored_fa,
            "censored_ga": self.censored_ga,
            "t_prom_fa": self.t_prom_fa,
            "t_prom_ga": self.t_prom_ga,
            "reviews": [list(r) for r in self.reviews],
            "in_lists": list(self.in_lists),
            "inconsistent": self.inconsistent,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            title=data["title"],
            t_birth=data.get("t_birth"),
            events=[QualityEvent.from_dict(e) for e in data.get("events", [])],
            label_fa=data.get("label_fa"),
            label_ga=data.get("label_ga"),
            censored_fa=bool(data.get("censored_fa", False)),
            censored_ga=bool(data.get("censored_ga", False)),
            t_prom_fa=data.get("t_prom_fa"),
            t_prom_ga=data.get("t_prom_ga"),
            reviews=[tuple(r) for r in data.get("reviews", [])],
            in_lists=list(data.get("in_lists", [])),
            inconsistent=bool(data.get("inconsistent", False)),
            notes=list(data.get("notes", [])),
        )


@dataclass(frozen=True)
class Comment:
    """A signed talk-page comment inside a discussion thread."""
    thread_id: int
    comment_id: int
    parent_comment_id: Optional[int]
    discusser: Editor
    timestamp: int
    depth: int
    text: str
    article: str = ""


LINGUISTIC_DIMENSIONS = ("sentiment", "formality", "politeness", "toxicity", "certainty")


@dataclass(frozen=True)
class LinguisticScores:
    sentiment: float
    formality: float
    politeness: float
    toxicity: float
    certainty: float

    def as_dict(self) -> Dict[str, float]:
        return {dim: getattr(self, dim) for dim in LINGUISTIC_DIMENSIONS}
