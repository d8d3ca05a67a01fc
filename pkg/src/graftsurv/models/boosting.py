"""Stochastic gradient boosting on the Cox partial-likelihood loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from graftsurv.exceptions import DataError
from graftsurv.models.coxnet import breslow_gradient_eta, breslow_partial_loglik
from graftsurv.survival.targets import observed_events
from graftsurv.validation import check_X_y, unpack_features

# SSE gain below this relative floor is treated as noise, not a split.
_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class RegressionTreeArrays:
    """Depth-limited least-squares tree in flat-array form."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X):
        out = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            node = 0
            while self.feature[node] >= 0:
                if X[i, self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.value[node]
        return out


def _fit_regression_tree(X, target, max_depth):
    """Exhaustive squared-error CART on midpoint thresholds.

    Ties in gain keep the lowest column index, then the lowest threshold
    (columns ascending, thresholds ascending, strictly-greater updates).
    """
    feature = [0]
    threshold = [0.0]
    left = [0]
    right = [0]
    value = [0.0]

    def grow(node, idx, depth):
        t = target[idx]
        total = t.sum()
        n = idx.shape[0]
        feature[node] = -1
        left[node] = -1
        right[node] = -1
        value[node] = total / n
        if depth >= max_depth or n < 2:
            return

        base = total * total / n
        best_gain = 0.0
        best = None
        for c in range(X.shape[1]):
            col = X[idx, c]
            order = np.argsort(col, kind="stable")
            cs = col[order]
            ts = np.cumsum(t[order])
            # Positions where the value changes; split after position k
            # puts k+1 rows on the left.
            cut = np.flatnonzero(cs[:-1] != cs[1:])
            if cut.shape[0] == 0:
                continue
            n_l = cut + 1.0
            s_l = ts[cut]
            gain = s_l**2 / n_l + (total - s_l) ** 2 / (n - n_l) - base
            k = int(np.argmax(gain))
            g = float(gain[k])
            if g > best_gain + _MIN_GAIN * max(1.0, abs(base)):
                best_gain = g
                best = (c, 0.5 * (cs[cut[k]] + cs[cut[k] + 1]), order, cut[k])
        if best is None:
            return

        c, thr, order, k = best
        for arrays in (feature, threshold, left, right, value):
            arrays.extend([0, 0])
        l_id = len(feature) - 2
        r_id = l_id + 1
        feature[node] = c
        threshold[node] = thr
        left[node] = l_id
        right[node] = r_id
        grow(l_id, idx[order[: k + 1]], depth + 1)
        grow(r_id, idx[order[k + 1 :]], depth + 1)

    grow(0, np.arange(X.shape[0]), 0)
    return RegressionTreeArrays(
        np.asarray(feature, np.int64),
        np.asarray(threshold, np.float64),
        np.asarray(left, np.int64),
        np.asarray(right, np.int64),
        np.asarray(value, np.float64),
    )


def gb_grid():
    """Depth grid used for model selection; everything else at defaults."""
    return [{"n_trees": 500, "max_depth": d} for d in (1, 2, 3)]


class GradientBoostedSurvival(BaseEstimator):
    """Stage-wise Cox-deviance boosting with shallow regression trees.

    Each stage computes the full-data negative loss gradient at the current
    scores, fits a depth-limited least-squares tree to it on a fresh row
    subsample drawn without replacement, and moves every score by
    learning_rate times the tree prediction. Risk is the final score.
    """

    def __init__(self, n_trees=500, subsample=0.5, max_depth=2, learning_rate=0.1, seed=0):
        self.n_trees = n_trees
        self.subsample = subsample
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.seed = seed

    def fit(self, X, y):
        if self.n_trees < 1:
            raise DataError(f"n_trees must be >= 1, got {self.n_trees}")
        if not 0.0 < self.subsample <= 1.0:
            raise DataError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.learning_rate < 0.0:
            raise DataError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.max_depth < 1:
            raise DataError(f"max_depth must be >= 1, got {self.max_depth}")
        values, names, y = check_X_y(X, y)
        if observed_events(y) == 0:
            raise DataError("need at least one observed event")
        time = y["time"]
        event = y["event"]
        n = values.shape[0]

        rng = np.random.default_rng(self.seed)
        k = max(1, int(self.subsample * n))
        scores = np.zeros(n)
        trees = []
        losses = [-breslow_partial_loglik(time, event, scores) / n]
        for _ in range(self.n_trees):
            residual = breslow_gradient_eta(time, event, scores)
            if k == n:
                rows = np.arange(n)
            else:
                rows = np.sort(rng.choice(n, size=k, replace=False))
            tree = _fit_regression_tree(values[rows], residual[rows], self.max_depth)
            trees.append(tree)
            scores += self.learning_rate * tree.predict(values)
            losses.append(-breslow_partial_loglik(time, event, scores) / n)

        self.trees_ = trees
        self.init_score_ = 0.0
        self.train_loss_ = np.asarray(losses)
        self.column_names_ = names
        self.n_features_in_ = values.shape[1]
        return self

    def predict(self, X):
        """Accumulated boosting score; larger means higher risk."""
        check_is_fitted(self, "trees_")
        values, _ = unpack_features(X, self.column_names_, self.n_features_in_)
        out = np.full(values.shape[0], self.init_score_)
        for tree in self.trees_:
            out += self.learning_rate * tree.predict(values)
        return out
