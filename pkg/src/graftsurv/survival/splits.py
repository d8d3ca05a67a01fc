"""Deterministic train/validation/test splits for repeated experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from graftsurv.exceptions import DataError

__all__ = ["SplitPlan", "make_splits"]


@dataclass(frozen=True)
class SplitPlan:
    """Index sets of one 60/20/20 split, plus the seed that produced it."""

    seed: int
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray

    def __post_init__(self) -> None:
        parts = (self.train, self.valid, self.test)
        n = sum(p.size for p in parts)
        union = np.concatenate(parts)
        if np.unique(union).size != n:
            raise DataError("split parts must be disjoint")
        if not np.array_equal(np.sort(union), np.arange(n)):
            raise DataError("split parts must cover all row indices exactly once")


def make_splits(n_rows: int, n_repeats: int, master_seed: int) -> list[SplitPlan]:
    """Repeated random 60/20/20 partitions of ``range(n_rows)``.

    Each repeat permutes the indices with its own PCG64 generator seeded
    ``master_seed + repeat_index``, then cuts the permutation into test and
    validation parts of ``floor(0.2 * n_rows)`` rows each, remainder to
    train. Splits are unstratified. Requires ``n_rows >= 10`` so every part
    is non-empty.
    """
    if n_rows < 10:
        raise DataError(f"need at least 10 rows to split 60/20/20, got {n_rows}")
    if n_repeats < 1:
        raise DataError("n_repeats must be >= 1")
    n_test = int(np.floor(0.2 * n_rows))
    n_valid = n_test
    plans = []
    for k in range(n_repeats):
        seed = master_seed + k
        perm = np.random.default_rng(seed).permutation(n_rows)
        test = np.sort(perm[:n_test])
        valid = np.sort(perm[n_test : n_test + n_valid])
        train = np.sort(perm[n_test + n_valid :])
        plans.append(SplitPlan(seed=seed, train=train, valid=valid, test=test))
    return plans
