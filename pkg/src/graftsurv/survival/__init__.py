"""Survival-analysis core: targets, step functions, estimators, splits."""

from graftsurv.survival.estimators import (
    censoring_survival,
    check_has_events,
    distinct_event_times,
    event_table,
    kaplan_meier,
    nelson_aalen,
)
from graftsurv.survival.splits import SplitPlan, make_splits
from graftsurv.survival.stepfunction import StepFunction
from graftsurv.survival.targets import (
    SURVIVAL_DTYPE,
    check_survival_target,
    make_survival_target,
    observed_events,
)

__all__ = [
    "SURVIVAL_DTYPE",
    "StepFunction",
    "SplitPlan",
    "censoring_survival",
    "check_has_events",
    "check_survival_target",
    "distinct_event_times",
    "event_table",
    "kaplan_meier",
    "make_splits",
    "make_survival_target",
    "nelson_aalen",
    "observed_events",
]
