"""
Experience feature family.

A corpus index records every registered editor's edits to population
articles plus each article's quality events. Experience counts an
article's editors' earlier edits elsewhere in the population; credibility
signs those edits by the status of the edited article at promotion time.
"""
import heapq
import json
import logging
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from src.records import DEMOTION, PROMOTION
from src.utils import stable_json_dumps, text_sha256
from src.window import FeatureBlock

EXPERIENCE_FEATURES = ("Experience-Sum", "Experience-Weighted", "Credibility-Sum", "Credibility-Weighted")
MANIFEST_FILE = "manifest.json"
RUN_PREFIX = "run-"
DEFAULT_RUN_CEILING = 1_000_000
LOAD_BATCH = 64
INDEX_ARRAYS = ("editor_ids", "article_ids", "timestamps")


def corpus_hash(titles, timelines):
    """Digest of the population and its quality events; a change forces an index rebuild."""
    payload = {
        "titles": sorted(titles),
        "events": {t.title: [e.to_dict() for e in t.events] for t in sorted(timelines, key=lambda t: t.title)},
    }
    return text_sha256(stable_json_dumps(payload))


def _article_rows(page):
    return [(r.editor.name, r.timestamp) for r in page.article_revisions if r.editor.is_registered]


class CorpusIndex:
    """
    Edits of registered editors across the population, sorted by
    (editor, article, timestamp), with per-editor offsets.
    """

    def __init__(self, editors, articles, editor_ids, article_ids, timestamps, events, digest):
        self.editors = list(editors)
        self.articles = list(articles)
        self.editor_ids = editor_ids
        self.article_ids = article_ids
        self.timestamps = timestamps
        self.events = events
        self.digest = digest
        self._editor_index = {name: i for i, name in enumerate(self.editors)}
        self._article_index = {title: i for i, title in enumerate(self.articles)}
        bounds = np.searchsorted(editor_ids, np.arange(len(self.editors) + 1), side="left")
        self._offsets = bounds
        self.peak_buffered_rows = None
        self.run_count = 0

    @classmethod
    def build(cls, store, timelines, workers=1, run_dir=None, run_ceiling=DEFAULT_RUN_CEILING):
        """
        One pass over the population's pages.

        Without ``run_dir`` the edit table is built and sorted in memory.
        With it, rows go through a buffer of at most ``run_ceiling`` rows;
        each full buffer is written as a sorted ``.npy`` run and the runs
        are k-way merged straight into the index arrays in ``run_dir``.

        Args:
            store: Object with ``load(title)`` returning PageHistory
            timelines (list): ArticleTimeline values of the population
            workers (int): Thread count for page loading
            run_dir (str, optional): Directory for spilled runs and the merged arrays
            run_ceiling (int): Rows held in memory before spilling

        Returns:
            CorpusIndex
        """
        articles = sorted(t.title for t in timelines)
        names, provisional = [], {}
        spiller = _RunSpiller(run_dir, run_ceiling) if run_dir is not None else None
        blocks = []
        for article_id, rows in _iter_article_rows(store, articles, workers):
            if not rows:
                continue
            block = np.empty((len(rows), 3), dtype=np.int64)
            for i, (name, timestamp) in enumerate(rows):
                if name not in provisional:
                    provisional[name] = len(names)
                    names.append(name)
                block[i] = (provisional[name], article_id, timestamp)
            if spiller is None:
                blocks.append(block)
            else:
                spiller.add(block, names)

        rank = _name_ranks(names)
        if spiller is None:
            table = np.concatenate(blocks) if blocks else np.empty((0, 3), dtype=np.int64)
            table[:, 0] = rank[table[:, 0]]
            table = table[np.lexsort((table[:, 2], table[:, 1], table[:, 0]))]
            arrays = (table[:, 0].copy(), table[:, 1].copy(), table[:, 2].copy())
            peak, run_count = len(table), 0
        else:
            spiller.flush(names)
            arrays = _merge_runs(spiller.runs, rank, run_dir, spiller.total)
            peak, run_count = spiller.peak, len(spiller.runs)

        events = {t.title: [(e.kind, e.level, e.timestamp) for e in t.events] for t in timelines}
        index = cls(sorted(names), articles, *arrays, events, corpus_hash(articles, timelines))
        index.peak_buffered_rows = peak
        index.run_count = run_count
        logging.info(f"Corpus index: {len(names)} editors, {len(articles)} articles, {len(arrays[0])} edits")
        return index

    def save(self, directory):
        os.makedirs(directory, exist_ok=True)
        for name in INDEX_ARRAYS:
            array = getattr(self, name)
            path = os.path.join(directory, f"{name}.npy")
            # merged runs already live in place
            if isinstance(array, np.memmap) and os.path.abspath(array.filename) == os.path.abspath(path):
                array.flush()
                continue
            np.save(path, array)
        manifest = {
            "corpus_hash": self.digest,
            "editors": self.editors,
            "articles": self.articles,
            "offsets": [int(x) for x in self._offsets],
            "events": {title: [list(e) for e in events] for title, events in self.events.items()},
        }
        with open(os.path.join(directory, MANIFEST_FILE), "w", encoding="utf-8") as f:
            f.write(stable_json_dumps(manifest))

    @classmethod
    def load(cls, directory):
        with open(os.path.join(directory, MANIFEST_FILE), "r", encoding="utf-8") as f:
            manifest = json.load(f)
        events = {title: [tuple(e) for e in rows] for title, rows in manifest["events"].items()}
        return cls(
            manifest["editors"],
            manifest["articles"],
            *(np.load(os.path.join(directory, f"{name}.npy")) for name in INDEX_ARRAYS),
            events,
            manifest["corpus_hash"],
        )

    @classmethod
    def load_or_build(cls, directory, store, timelines, workers=1, run_ceiling=DEFAULT_RUN_CEILING):
        """Reuse the persisted index unless its corpus hash no longer matches."""
        expected = corpus_hash([t.title for t in timelines], timelines)
        manifest_path = os.path.join(directory, MANIFEST_FILE)
        if os.path.exists(manifest_path):
            index = cls.load(directory)
            if index.digest == expected:
                logging.info("Corpus index up to date; reusing it")
                return index
            logging.info("Corpus hash changed; rebuilding the corpus index")
        index = cls.build(store, timelines, workers=workers, run_dir=directory, run_ceiling=run_ceiling)
        index.save(directory)
        return index

    def edits_of(self, editor):
        """(article_ids, timestamps) of an editor's edits; empty arrays when unknown."""
        i = self._editor_index.get(editor)
        if i is None:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        start, end = self._offsets[i], self._offsets[i + 1]
        return self.article_ids[start:end], self.timestamps[start:end]

    def status_sign(self, title, at):
        """+1 promoted and not demoted by ``at``, -1 demoted by ``at``, 0 otherwise."""
        known = [(kind, ts) for kind, _, ts in self.events.get(title, ()) if ts <= at]
        if any(kind == DEMOTION for kind, _ in known):
            return -1
        if any(kind == PROMOTION for kind, _ in known):
            return 1
        return 0

    def article_id(self, title):
        return self._article_index.get(title, -1)


def _iter_article_rows(store, articles, workers, batch=LOAD_BATCH):
    """(article_id, rows) in title order; pages are loaded ``batch`` at a time."""
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for start in range(0, len(articles), batch):
            chunk = articles[start:start + batch]
            for offset, rows in enumerate(pool.map(lambda title: _article_rows(store.load(title)), chunk)):
                yield start + offset, rows


def _name_ranks(names):
    """Position of each provisional editor id in the sorted editor list."""
    rank = np.empty(len(names), dtype=np.int64)
    rank[sorted(range(len(names)), key=names.__getitem__)] = np.arange(len(names), dtype=np.int64)
    return rank


class _RunSpiller:
    """Fixed-size row buffer written out as sorted ``.npy`` runs."""

    def __init__(self, run_dir, ceiling):
        if ceiling < 1:
            raise ValueError(f"run ceiling must be positive, got {ceiling}")
        os.makedirs(run_dir, exist_ok=True)
        self.run_dir = run_dir
        self.buffer = np.empty((ceiling, 3), dtype=np.int64)
        self.filled = 0
        self.peak = 0
        self.total = 0
        self.runs = []

    def add(self, rows, names):
        start = 0
        while start < len(rows):
            take = min(len(rows) - start, len(self.buffer) - self.filled)
            self.buffer[self.filled:self.filled + take] = rows[start:start + take]
            self.filled += take
            start += take
            self.peak = max(self.peak, self.filled)
            if self.filled == len(self.buffer):
                self.flush(names)

    def flush(self, names):
        """Sort the buffer by (editor name, article, timestamp) and write it as the next run."""
        if not self.filled:
            return
        # relative order of the names seen so far never changes as more arrive
        rank = _name_ranks(names)
        block = self.buffer[:self.filled]
        order = np.lexsort((block[:, 2], block[:, 1], rank[block[:, 0]]))
        path = os.path.join(self.run_dir, f"{RUN_PREFIX}{len(self.runs):05d}.npy")
        np.save(path, block[order])
        self.runs.append(path)
        self.total += self.filled
        self.filled = 0


def _merge_runs(runs, rank, out_dir, total):
    """
    K-way merge of memory-mapped runs into ``<out_dir>/<array>.npy``.

    Returns:
        tuple: (editor_ids, article_ids, timestamps) as memory maps
    """
    if not total:
        return tuple(np.empty(0, dtype=np.int64) for _ in INDEX_ARRAYS)
    logging.info(f"Merging {len(runs)} sorted index runs ({total} edits)")
    sources = [np.load(path, mmap_mode="r") for path in runs]
    outputs = [np.lib.format.open_memmap(os.path.join(out_dir, f"{name}.npy"), mode="w+", dtype=np.int64,
                                         shape=(total,))
               for name in INDEX_ARRAYS]
    editor_ids, article_ids, timestamps = outputs
    merged = heapq.merge(*sources, key=lambda row: (int(rank[row[0]]), int(row[1]), int(row[2])))
    for i, row in enumerate(merged):
        editor_ids[i] = rank[row[0]]
        article_ids[i] = row[1]
        timestamps[i] = row[2]
    for output in outputs:
        output.flush()
    del sources
    for path in runs:
        os.remove(path)
    return editor_ids, article_ids, timestamps


def experience_features(w, index):
    """
    Experience and credibility of the article's registered editors.

    Only edits to other population articles dated before the promotion
    count; an edited article's sign reflects events known at promotion time.

    Args:
        w (WindowedHistory): Pre-promotion window
        index (CorpusIndex): Population index

    Returns:
        FeatureBlock: Experience-Sum, Experience-Weighted, Credibility-Sum, Credibility-Weighted
    """
    revisions = w.article_revisions
    own_id = index.article_id(w.title)
    counts = Counter(r.editor.name for r in revisions if r.editor.is_registered)
    total = len(revisions)
    signs = {}

    exp_sum = exp_weighted = cred_sum = cred_weighted = 0.0
    for editor in sorted(counts):
        article_ids, timestamps = index.edits_of(editor)
        mask = (article_ids != own_id) & (timestamps < w.t_prom)
        foreign = article_ids[mask]
        experience = float(foreign.size)
        credibility = 0.0
        for article_id, n in zip(*np.unique(foreign, return_counts=True)):
            article_id = int(article_id)
            if article_id not in signs:
                signs[article_id] = index.status_sign(index.articles[article_id], w.t_prom)
            credibility += signs[article_id] * int(n)
        weight = counts[editor] / total if total else 0.0
        exp_sum += experience
        exp_weighted += weight * experience
        cred_sum += credibility
        cred_weighted += weight * credibility

    return FeatureBlock(values={
        "Experience-Sum": exp_sum,
        "Experience-Weighted": exp_weighted,
        "Credibility-Sum": cred_sum,
        "Credibility-Weighted": cred_weighted,
    })
