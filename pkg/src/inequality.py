"""Gini index of contribution counts, shared by team-composition and discussion features."""
import numpy as np


def gini(counts):
    """
    Gini index of non-negative contribution counts.

    Equal to sum_i sum_j |x_i - x_j| / (2 n^2 mean(x)), evaluated through the
    sorted-rank form. 0.0 means perfect equality; a single contributor among
    n gives 1 - 1/n. A single-element input is 0.

    Args:
        counts (sequence): Contribution counts

    Returns:
        float: Value in [0, 1)

    Raises:
        ValueError: Empty input, negative counts, or no contributions at all
    """
    x = np.sort(np.asarray(counts, dtype=np.float64))
    if x.size == 0:
        raise ValueError("gini of an empty sequence")
    if x[0] < 0:
        raise ValueError("gini is only defined for non-negative counts")
    total = x.sum()
    if total == 0:
        raise ValueError("gini undefined: no contributions")
    n = x.size
    if n == 1:
        return 0.0
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(np.sum((2 * ranks - n - 1) * x) / (n * total))
