"""Right-censored survival targets as structured numpy arrays.

The target for one row is the pair (event, time): `time` is days from
transplant to graft failure when `event` is True, days to last follow-up
when False. This mirrors the structured-array convention survival
estimators in the Python ecosystem use for `y`.
"""

from __future__ import annotations

import numpy as np

from graftsurv.exceptions import DataError

__all__ = ["SURVIVAL_DTYPE", "make_survival_target", "check_survival_target", "observed_events"]

SURVIVAL_DTYPE = np.dtype([("event", "?"), ("time", "<f8")])


def make_survival_target(time, event) -> np.ndarray:
    """Pack parallel time/event sequences into a structured target array.

    Parameters
    ----------
    time : array-like of float
        Non-negative follow-up times in days.
    event : array-like of bool
        True where the graft failed at `time`, False where censored.
    """
    time = np.asarray(time, dtype=np.float64)
    event = np.asarray(event)
    if event.dtype != np.bool_:
        if not np.all(np.isin(event, (0, 1))):
            raise DataError("event indicators must be boolean or 0/1")
        event = event.astype(bool)
    if time.ndim != 1 or event.ndim != 1 or time.shape != event.shape:
        raise DataError("time and event must be 1-d arrays of equal length")
    y = np.empty(time.shape[0], dtype=SURVIVAL_DTYPE)
    y["event"] = event
    y["time"] = time
    check_survival_target(y)
    return y


def check_survival_target(y) -> np.ndarray:
    """Validate a structured survival target array and return it.

    Checks dtype field names, finiteness and non-negativity of times.
    """
    y = np.asarray(y)
    if y.dtype.names != ("event", "time"):
        raise DataError(
            "survival target must be a structured array with fields ('event', 'time')"
        )
    if y.ndim != 1:
        raise DataError("survival target must be 1-d")
    t = y["time"]
    if not np.all(np.isfinite(t)):
        raise DataError("survival times must be finite")
    if np.any(t < 0):
        raise DataError("survival times must be >= 0")
    return y


def observed_events(y) -> int:
    """Number of rows whose event indicator is True."""
    return int(np.count_nonzero(np.asarray(y)["event"]))
