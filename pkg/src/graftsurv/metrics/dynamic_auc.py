"""Time-dependent AUC under inverse-probability-of-censoring weighting."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from graftsurv.exceptions import DataError
from graftsurv.survival.estimators import censoring_survival
from graftsurv.survival.targets import check_survival_target


@dataclass(frozen=True)
class DynamicAucResult:
    value: float
    times: np.ndarray
    aucs: np.ndarray
    n_comparable: int


def dynamic_auc(y_train, y_test, risk, t):
    """Cumulative/dynamic AUC at horizon t.

    Cases are test rows with an observed event at or before t, weighted by
    1/G(T_i) where G is the censoring survival curve fit on the training
    target (right-continuous evaluation). Controls are rows still at risk
    beyond t, unweighted. A case/control pair scores 1 if the case has the
    strictly higher risk, 0.5 on ties.
    """
    y_train = check_survival_target(y_train)
    y_test = check_survival_target(y_test)
    risk = np.asarray(risk, dtype=np.float64)
    if risk.ndim != 1 or risk.shape[0] != y_test.shape[0]:
        raise DataError(
            f"risk must be 1d with {y_test.shape[0]} entries, got shape {risk.shape}"
        )
    if not np.all(np.isfinite(risk)):
        raise DataError("risk scores must be finite")
    t = float(t)

    time = y_test["time"]
    event = y_test["event"]
    is_case = event & (time <= t)
    is_control = time > t
    n_cases = int(np.count_nonzero(is_case))
    n_controls = int(np.count_nonzero(is_control))
    if n_cases == 0 or n_controls == 0:
        raise DataError(
            f"horizon {t} leaves {n_cases} cases and {n_controls} controls"
        )

    g = censoring_survival(y_train)
    g_at_case = g(time[is_case])
    if np.any(g_at_case <= 0.0):
        raise DataError(
            "censoring survival vanishes at a case time; horizon too deep for training follow-up"
        )
    w = 1.0 / g_at_case

    case_risk = risk[is_case]
    control_risk = np.sort(risk[is_control])
    # For each case, rank its risk among the sorted controls.
    lo = np.searchsorted(control_risk, case_risk, side="left")
    hi = np.searchsorted(control_risk, case_risk, side="right")
    wins = lo + 0.5 * (hi - lo)

    numerator = float(np.sum(w * wins))
    denominator = float(np.sum(w)) * n_controls
    value = numerator / denominator
    return DynamicAucResult(
        value, np.array([t]), np.array([value]), n_cases * n_controls
    )


def mean_dynamic_auc(y_train, y_test, risk, n_times=5):
    """Average of dynamic AUC over an evaluation grid.

    The grid is n_times equally spaced points between the 10th and 90th
    percentiles of observed event times in the test target. Grid points
    where either the case or the control group is empty are dropped with
    a warning; an entirely degenerate grid is an error.
    """
    y_test_checked = check_survival_target(y_test)
    event_times = y_test_checked["time"][y_test_checked["event"]]
    if np.unique(event_times).shape[0] < 5:
        raise DataError(
            "need at least 5 distinct observed event times to build the evaluation grid"
        )
    lo, hi = np.quantile(event_times, [0.1, 0.9])
    grid = np.linspace(lo, hi, n_times)

    kept_times = []
    kept_aucs = []
    n_comp = 0
    for t in grid:
        try:
            res = dynamic_auc(y_train, y_test, risk, t)
        except DataError:
            warnings.warn(
                f"dropping degenerate evaluation time {t:g}", UserWarning, stacklevel=2
            )
            continue
        kept_times.append(t)
        kept_aucs.append(res.value)
        n_comp += res.n_comparable
    if not kept_times:
        raise DataError("every evaluation time was degenerate")
    aucs = np.asarray(kept_aucs)
    return DynamicAucResult(float(np.mean(aucs)), np.asarray(kept_times), aucs, n_comp)
