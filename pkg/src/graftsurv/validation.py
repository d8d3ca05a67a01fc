"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from graftsurv.exceptions import DataError
from graftsurv.features.matrix import FeatureMatrix
from graftsurv.survival.targets import check_survival_target

__all__ = ["unpack_features", "check_X_y"]


def unpack_features(X, expected_names=None, expected_n_features=None):
    """Normalize estimator input to (values, column_names_or_None).

    Accepts a FeatureMatrix (column names validated against the fit-time
    names when given) or any 2-d numeric array-like (names unavailable,
    only the column count is checked).
    """
    if isinstance(X, FeatureMatrix):
        names = X.column_names
        if expected_names is not None and names != tuple(expected_names):
            expected = tuple(expected_names)
            detail = (
                "names or order differ"
                if len(names) == len(expected)
                else f"got {len(names)} columns, expected {len(expected)}"
            )
            raise DataError(f"feature columns do not match the fitted model ({detail})")
        return X.values, names
    try:
        values = check_array(X, dtype=np.float64, ensure_all_finite=True)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    n_expected = (
        len(tuple(expected_names)) if expected_names is not None else expected_n_features
    )
    if n_expected is not None and values.shape[1] != n_expected:
        raise DataError(
            f"X has {values.shape[1]} features, but the model was fit with {n_expected}"
        )
    return values, None


def check_X_y(X, y):
    """Validate aligned features and survival target for fitting.

    Returns (values, column_names_or_None, y).
    """
    values, names = unpack_features(X)
    y = check_survival_target(y)
    if y.shape[0] != values.shape[0]:
        raise DataError(
            f"X has {values.shape[0]} rows but y has {y.shape[0]} entries"
        )
    return values, names, y
