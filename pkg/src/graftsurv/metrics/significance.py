"""Paired one-sided tests with family-wise error control."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from graftsurv.exceptions import DataError

EXACT_LIMIT = 25


@dataclass(frozen=True)
class TestResult:
    raw_p: float
    adjusted_p: float
    statistic: float
    n_pairs: int
    method: str


def bonferroni(p, n_comparisons):
    if n_comparisons < 1:
        raise DataError(f"n_comparisons must be >= 1, got {n_comparisons}")
    return min(1.0, p * n_comparisons)


def _paired_diffs(x, y):
    x = np.asarray(x, dtype=np.float64)
    if y is not None:
        y = np.asarray(y, dtype=np.float64)
        if x.shape != y.shape:
            raise DataError(f"paired samples differ in shape: {x.shape} vs {y.shape}")
        d = x - y
    else:
        d = x
    if d.ndim != 1 or d.shape[0] == 0:
        raise DataError("need a non-empty 1d vector of paired differences")
    if not np.all(np.isfinite(d)):
        raise DataError("paired differences must be finite")
    return d


def _exact_signed_rank_p(doubled_ranks, doubled_w):
    """P(W+ >= w) under independent random signs, by subset-sum counting.

    Works on doubled ranks so midranks from ties stay integral. Counts are
    exact Python integers; the final probability is count / 2**n.
    """
    total = int(sum(doubled_ranks))
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled_ranks:
        for s in range(total - r, -1, -1):
            if counts[s]:
                counts[s + r] += counts[s]
    tail = sum(counts[doubled_w:])
    return tail / (1 << len(doubled_ranks))


def wilcoxon_greater(x, y=None, n_comparisons=1):
    """One-sided Wilcoxon signed-rank test of median difference > 0.

    Zero differences are dropped; tied magnitudes receive midranks. Up to
    25 informative pairs the p-value is computed exactly by enumerating
    the sign distribution; larger samples use the normal approximation
    with continuity and tie corrections.
    """
    d = _paired_diffs(x, y)
    d = d[d != 0.0]
    n = d.shape[0]
    if n == 0:
        raise DataError("all paired differences are zero")

    ranks = stats.rankdata(np.abs(d))
    w_plus = float(np.sum(ranks[d > 0.0]))

    if n <= EXACT_LIMIT:
        doubled = [int(round(2.0 * r)) for r in ranks]
        doubled_w = int(round(2.0 * w_plus))
        p = _exact_signed_rank_p(doubled, doubled_w)
        method = "wilcoxon-exact"
    else:
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0
        _, tie_sizes = np.unique(ranks, return_counts=True)
        var -= float(np.sum(tie_sizes**3 - tie_sizes)) / 48.0
        z = (w_plus - mean - 0.5) / np.sqrt(var)
        p = float(stats.norm.sf(z))
        method = "wilcoxon-normal"

    return TestResult(p, bonferroni(p, n_comparisons), w_plus, n, method)


def paired_t_greater(x, y=None, n_comparisons=1):
    """One-sided paired t-test of mean difference > 0."""
    d = _paired_diffs(x, y)
    n = d.shape[0]
    if n < 2:
        raise DataError("paired t-test needs at least 2 pairs")
    mean = float(np.mean(d))
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise DataError("paired differences have zero variance")
    statistic = mean / (sd / np.sqrt(n))
    p = float(stats.t.sf(statistic, df=n - 1))
    return TestResult(p, bonferroni(p, n_comparisons), float(statistic), n, "paired-t")
