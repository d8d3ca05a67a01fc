"""Nonparametric survival and cumulative-hazard estimators.

Tie handling follows the standard product-limit convention: at a time with
both failures and censorings, the censored rows are still in the risk set
for that time and leave afterwards.
"""

from __future__ import annotations

import numpy as np

from graftsurv.exceptions import DataError
from graftsurv.survival.stepfunction import StepFunction
from graftsurv.survival.targets import check_survival_target

__all__ = ["event_table", "kaplan_meier", "nelson_aalen", "censoring_survival"]


def event_table(y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct event times with death and at-risk counts.

    Returns
    -------
    times : ndarray
        Distinct times at which at least one event occurred, increasing.
    deaths : ndarray
        Number of events at each time.
    at_risk : ndarray
        Number of rows with observed time >= each time.
    """
    y = check_survival_target(y)
    t, e = y["time"], y["event"]
    times = np.unique(t[e])
    order = np.sort(t)
    at_risk = t.size - np.searchsorted(order, times, side="left")
    deaths = np.array([np.count_nonzero(e & (t == u)) for u in times], dtype=np.int64)
    return times, deaths, at_risk


def kaplan_meier(y) -> StepFunction:
    """Product-limit estimate of the survival function S(t) = P(T > t).

    The returned step function has knots at the distinct event times and
    baseline 1.0; censoring times shape the risk-set sizes only.
    """
    times, deaths, at_risk = event_table(y)
    surv = np.cumprod(1.0 - deaths / at_risk)
    return StepFunction(times, surv, baseline=1.0)


def nelson_aalen(y) -> StepFunction:
    """Nelson-Aalen estimate of the cumulative hazard H(t).

    Non-decreasing, with knots at the distinct event times, baseline 0.0.
    """
    times, deaths, at_risk = event_table(y)
    chf = np.cumsum(deaths / at_risk)
    return StepFunction(times, chf, baseline=0.0)


def censoring_survival(y) -> StepFunction:
    """Kaplan-Meier estimate of the censoring survival G(t) = P(C > t).

    Computed by inverting the event indicator, so censorings play the role
    of failures. Used for inverse-probability-of-censoring weights.
    """
    y = check_survival_target(y)
    flipped = y.copy()
    flipped["event"] = ~y["event"]
    return kaplan_meier(flipped)


def distinct_event_times(y) -> np.ndarray:
    """Sorted distinct times of observed events."""
    y = check_survival_target(y)
    return np.unique(y["time"][y["event"]])


def check_has_events(y) -> None:
    """Raise DataError when the target contains no observed events."""
    if not np.any(np.asarray(y)["event"]):
        raise DataError("survival data contains no observed events")
