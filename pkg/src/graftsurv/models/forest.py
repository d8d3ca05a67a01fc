"""Random survival forest on log-rank split trees."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from graftsurv.exceptions import DataError
from graftsurv.survival.stepfunction import StepFunction
from graftsurv.survival.targets import observed_events
from graftsurv.models.tree import _apply, _grow_tree
from graftsurv.validation import check_X_y, unpack_features


@dataclass(frozen=True)
class TreeArrays:
    """One fitted tree in flat-array form (node 0 is the root)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_ofs: np.ndarray
    leaf_len: np.ndarray
    mortality: np.ndarray
    leaf_times: np.ndarray
    leaf_values: np.ndarray

    def leaf_hazard(self, node):
        """Nelson-Aalen StepFunction stored at a leaf node."""
        o = self.leaf_ofs[node]
        ln = self.leaf_len[node]
        return StepFunction(
            self.leaf_times[o : o + ln], self.leaf_values[o : o + ln], baseline=0.0
        )


def rsf_grid():
    """Depth grid used for model selection; everything else at defaults."""
    return [{"n_trees": 500, "max_depth": d} for d in (5, 10, 15)]


class RandomSurvivalForest(BaseEstimator):
    """Bootstrap ensemble of log-rank survival trees.

    Each node draws ceil(sqrt(p)) candidate columns without replacement and
    takes the threshold maximizing the two-sample log-rank statistic. Leaves
    hold Nelson-Aalen cumulative hazards; a row's risk is the ensemble
    cumulative hazard summed over all distinct training event times.
    `bootstrap` exists as a test hook and is on in any real fit.
    """

    def __init__(self, n_trees=500, max_depth=10, min_leaf_events=3, seed=0, bootstrap=True):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf_events = min_leaf_events
        self.seed = seed
        self.bootstrap = bootstrap

    def fit(self, X, y):
        if self.n_trees < 1:
            raise DataError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise DataError(f"max_depth must be >= 1, got {self.max_depth}")
        values, names, y = check_X_y(X, y)
        if observed_events(y) == 0:
            raise DataError("need at least one observed event")
        time = np.ascontiguousarray(y["time"], dtype=np.float64)
        event = np.ascontiguousarray(y["event"], dtype=np.uint8)
        values = np.ascontiguousarray(values)
        n, p = values.shape

        if np.all(values == values[0:1, :]):
            warnings.warn(
                "all feature columns are constant; trees degenerate to root leaves",
                UserWarning,
                stacklevel=2,
            )

        D = np.unique(time[event.astype(bool)])
        mtry = math.ceil(math.sqrt(p))
        max_leaves = min(n, 2 ** min(self.max_depth, 30))
        cap = 2 * max_leaves + 1
        # A bootstrap draw can hold more event rows than the original data,
        # so the knot bound is the sample size, not the event count.
        knot_cap = n

        tree_seeds = np.random.SeedSequence(self.seed).generate_state(self.n_trees)
        trees = []
        for ts in tree_seeds:
            feature = np.empty(cap, np.int64)
            threshold = np.empty(cap, np.float64)
            left = np.empty(cap, np.int64)
            right = np.empty(cap, np.int64)
            leaf_ofs = np.empty(cap, np.int64)
            leaf_len = np.empty(cap, np.int64)
            mortality = np.empty(cap, np.float64)
            leaf_times = np.empty(knot_cap, np.float64)
            leaf_values = np.empty(knot_cap, np.float64)
            n_nodes, n_knots = _grow_tree(
                values,
                time,
                event,
                D,
                np.int64(ts),
                self.bootstrap,
                self.max_depth,
                self.min_leaf_events,
                mtry,
                feature,
                threshold,
                left,
                right,
                leaf_ofs,
                leaf_len,
                mortality,
                leaf_times,
                leaf_values,
            )
            trees.append(
                TreeArrays(
                    feature[:n_nodes].copy(),
                    threshold[:n_nodes].copy(),
                    left[:n_nodes].copy(),
                    right[:n_nodes].copy(),
                    leaf_ofs[:n_nodes].copy(),
                    leaf_len[:n_nodes].copy(),
                    mortality[:n_nodes].copy(),
                    leaf_times[:n_knots].copy(),
                    leaf_values[:n_knots].copy(),
                )
            )

        self.trees_ = trees
        self.event_times_ = D
        self.column_names_ = names
        self.n_features_in_ = p
        return self

    def _leaves(self, X):
        check_is_fitted(self, "trees_")
        values, _ = unpack_features(X, self.column_names_, self.n_features_in_)
        values = np.ascontiguousarray(values)
        return values, [
            _apply(t.feature, t.threshold, t.left, t.right, values) for t in self.trees_
        ]

    def predict(self, X):
        """Ensemble mortality: mean over trees of the leaf's hazard mass."""
        _, leaves = self._leaves(X)
        acc = np.zeros(leaves[0].shape[0])
        for tree, leaf in zip(self.trees_, leaves):
            acc += tree.mortality[leaf]
        return acc / len(self.trees_)

    def predict_cumulative_hazard(self, X):
        """Per-row ensemble cumulative hazard on the training event grid."""
        _, leaves = self._leaves(X)
        n = leaves[0].shape[0]
        D = self.event_times_
        acc = np.zeros((n, D.shape[0]))
        for tree, leaf in zip(self.trees_, leaves):
            for i in range(n):
                node = leaf[i]
                o = tree.leaf_ofs[node]
                ln = tree.leaf_len[node]
                if ln == 0:
                    continue
                knots = tree.leaf_times[o : o + ln]
                vals = tree.leaf_values[o : o + ln]
                pos = np.searchsorted(knots, D, side="right") - 1
                acc[i] += np.where(pos >= 0, vals[np.maximum(pos, 0)], 0.0)
        acc /= len(self.trees_)
        return [StepFunction(D, acc[i], baseline=0.0) for i in range(n)]
