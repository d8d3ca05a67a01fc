"""Right-continuous step functions over time."""

from __future__ import annotations

import numpy as np

from graftsurv.exceptions import DataError

__all__ = ["StepFunction"]


class StepFunction:
    """A right-continuous piecewise-constant function of time.

    The function equals ``baseline`` strictly before the first knot and
    ``values[i]`` on ``[times[i], times[i+1])``. Evaluation past the last
    knot returns the last value.

    Parameters
    ----------
    times : array-like
        Strictly increasing knot locations.
    values : array-like
        Function value at and after each knot, same length as `times`.
    baseline : float
        Value returned for query points before the first knot.
    """

    def __init__(self, times, values, baseline: float) -> None:
        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if times.ndim != 1 or values.ndim != 1 or times.shape != values.shape:
            raise DataError("times and values must be 1-d arrays of equal length")
        if times.size and np.any(np.diff(times) <= 0):
            raise DataError("step function times must be strictly increasing")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
            raise DataError("step function knots must be finite")
        self.times = times.copy()
        self.values = values.copy()
        self.baseline = float(baseline)
        self.times.flags.writeable = False
        self.values.flags.writeable = False

    def __call__(self, t):
        """Evaluate at scalar or array query points."""
        t = np.asarray(t, dtype=np.float64)
        scalar = t.ndim == 0
        q = np.atleast_1d(t)
        if self.times.size == 0:
            out = np.full(q.shape, self.baseline)
        else:
            idx = np.searchsorted(self.times, q, side="right") - 1
            out = np.where(idx >= 0, self.values[np.maximum(idx, 0)], self.baseline)
        return float(out[0]) if scalar else out

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (
            self.baseline == other.baseline
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"StepFunction({self.times.size} knots, baseline={self.baseline})"
