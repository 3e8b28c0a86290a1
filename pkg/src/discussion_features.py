"""
Discussion feature families: linguistic aggregates and thread structure.
"""
import itertools
from collections import defaultdict

import networkx as nx
import numpy as np

from src.inequality import gini
from src.records import LINGUISTIC_DIMENSIONS
from src.scorers import score_comment
from src.talk_parser import comment_revisers, mixed_comment_fraction, parse_discussions
from src.window import FeatureBlock

LINGUISTIC_STATS = ("Mean", "Median", "High-Percentage", "Discusser-Mean", "Discusser-Median")
LINGUISTIC_FEATURES = tuple(f"{dim.capitalize()}-{stat}"
                            for dim in LINGUISTIC_DIMENSIONS for stat in LINGUISTIC_STATS)
LINGUISTIC_FLAGS = ("Linguistic-Missing-Flag",)

STRUCTURAL_FEATURES = (
    "Num-of-Discussions",
    "Num-of-Comments",
    "Num-of-Discussers",
    "Discussers-Gini",
    "Mean-Discussers",
    "Median-Discussers",
    "Mixed-Discussers-Comments",
    "Direct-Discusser-Interactions",
    "Indirect-Discusser-Interactions",
    "Mean-Triangles-Direct",
    "Mean-Triangles-Indirect",
    "Mean-Depth",
    "Mean-Comments",
    "Mean-Responded-Comments",
    "Time-to-Reply",
)
STRUCTURAL_FLAGS = ("Discussion-Missing-Flag",)


def linguistic_aggregates(comments, scores, binding):
    """
    Mean, median and share of high values per dimension, plus the same
    mean and median taken per discusser first and then averaged over
    discussers.

    Args:
        comments (list): Comments in the window
        scores (list): LinguisticScores aligned with ``comments``
        binding (ScorerBinding): Thresholds for "high"

    Returns:
        FeatureBlock: 25 values; all zero with the missing flag when there are no comments
    """
    values = dict.fromkeys(LINGUISTIC_FEATURES, 0.0)
    if not comments:
        return FeatureBlock(values=values, flags={"Linguistic-Missing-Flag": 1})

    for dim in LINGUISTIC_DIMENSIONS:
        column = np.array([getattr(s, dim) for s in scores], dtype=np.float64)
        per_discusser = defaultdict(list)
        for comment, value in zip(comments, column):
            per_discusser[comment.discusser].append(value)
        discussers = sorted(per_discusser)
        name = dim.capitalize()
        values[f"{name}-Mean"] = float(column.mean())
        values[f"{name}-Median"] = float(np.median(column))
        values[f"{name}-High-Percentage"] = float(np.mean(column > binding.thresholds[dim]))
        values[f"{name}-Discusser-Mean"] = float(np.mean([np.mean(per_discusser[d]) for d in discussers]))
        values[f"{name}-Discusser-Median"] = float(np.mean([np.median(per_discusser[d]) for d in discussers]))
    return FeatureBlock(values=values, flags={"Linguistic-Missing-Flag": 0})


def _mean_triangles(graph):
    if graph.number_of_nodes() == 0:
        return 0.0
    return float(np.mean(list(nx.triangles(graph).values())))


def structural_features(comments, mixed_fraction=0.0):
    """
    Thread-structure features of the talk page.

    Discusser counts and pair graphs use registered discussers only. A
    direct pair is two discussers where one replied to the other; an
    indirect pair is two discussers commenting in the same thread.

    Args:
        comments (list): Comments in the window
        mixed_fraction (float): Share of comment blocks revised by two or more discussers

    Returns:
        FeatureBlock: 15 values; all zero with the missing flag when there are no threads
    """
    values = dict.fromkeys(STRUCTURAL_FEATURES, 0.0)
    threads = defaultdict(list)
    for comment in comments:
        threads[comment.thread_id].append(comment)
    if not threads:
        return FeatureBlock(values=values, flags={"Discussion-Missing-Flag": 1})

    registered = [c for c in comments if c.discusser.is_registered]
    per_discusser = defaultdict(int)
    for comment in registered:
        per_discusser[comment.discusser.name] += 1

    direct = nx.Graph()
    indirect = nx.Graph()
    direct.add_nodes_from(per_discusser)
    indirect.add_nodes_from(per_discusser)

    thread_discussers = []
    depths = []
    roots = replied = 0
    reply_times = []
    for thread_id in sorted(threads):
        thread = threads[thread_id]
        by_id = {c.comment_id: c for c in thread}
        names = sorted({c.discusser.name for c in thread if c.discusser.is_registered})
        thread_discussers.append(len(names))
        indirect.add_edges_from(itertools.combinations(names, 2))
        depths.append(max(c.depth for c in thread))

        children = defaultdict(list)
        for comment in thread:
            parent = by_id.get(comment.parent_comment_id)
            if parent is None:
                continue
            children[parent.comment_id].append(comment)
            a, b = parent.discusser, comment.discusser
            if a.is_registered and b.is_registered and a.name != b.name:
                direct.add_edge(a.name, b.name)

        for comment in thread:
            if comment.depth != 0:
                continue
            roots += 1
            if children[comment.comment_id]:
                replied += 1
                first = min(c.timestamp for c in children[comment.comment_id])
                reply_times.append(max(0, first - comment.timestamp))

    values.update({
        "Num-of-Discussions": float(len(threads)),
        "Num-of-Comments": float(len(comments)),
        "Num-of-Discussers": float(len(per_discusser)),
        "Discussers-Gini": gini(list(per_discusser.values())) if per_discusser else 0.0,
        "Mean-Discussers": float(np.mean(thread_discussers)),
        "Median-Discussers": float(np.median(thread_discussers)),
        "Mixed-Discussers-Comments": float(mixed_fraction),
        "Direct-Discusser-Interactions": float(direct.number_of_edges()),
        "Indirect-Discusser-Interactions": float(indirect.number_of_edges()),
        "Mean-Triangles-Direct": _mean_triangles(direct),
        "Mean-Triangles-Indirect": _mean_triangles(indirect),
        "Mean-Depth": float(np.mean(depths)),
        "Mean-Comments": len(comments) / len(threads),
        "Mean-Responded-Comments": replied / roots if roots else 0.0,
        "Time-to-Reply": float(np.mean(reply_times)) if reply_times else 0.0,
    })
    return FeatureBlock(values=values, flags={"Discussion-Missing-Flag": 0})


def discussion_features(w, binding):
    """
    Parse, score and aggregate the discussions of a window.

    Returns:
        tuple: (comments, linguistic FeatureBlock, structural FeatureBlock)
    """
    comments = parse_discussions(w.talk_revisions, w.t_prom, article=w.title)
    scores = [score_comment(c, binding) for c in comments]
    mixed = mixed_comment_fraction(comments, comment_revisers(w.talk_revisions, w.t_prom))
    return comments, linguistic_aggregates(comments, scores, binding), structural_features(comments, mixed)
