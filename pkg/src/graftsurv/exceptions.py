"""Exception hierarchy.

Everything raised on purpose by this package derives from :class:`GraftSurvError`
so callers can catch one type at the boundary. The CLI maps the subtypes onto
exit codes (usage 1, data 2, numerical 3).
"""

from __future__ import annotations


class GraftSurvError(Exception):
    """Base class for all errors raised by graftsurv."""


class DataError(GraftSurvError):
    """Invalid, unparseable, or contract-violating data."""


class ParseError(DataError):
    """A textual value could not be parsed. Carries the offending token."""


class EncodingError(DataError):
    """A record cannot be encoded under the fitted plan."""


class NumericalError(GraftSurvError):
    """A numerical routine failed (degenerate weights, no events, ...)."""


class ConvergenceError(NumericalError):
    """An iterative solver exhausted its iteration budget."""
