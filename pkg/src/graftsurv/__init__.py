"""graftsurv: survival analysis toolkit for kidney graft outcome prediction.

Builds censoring-aware models of graft survival from donor/recipient HLA
typing and clinical covariates, with HLA feature encodings ranging from
plain mismatch counts to biologically filtered antigen-pair indicators.
"""

from graftsurv.exceptions import (
    ConvergenceError,
    DataError,
    EncodingError,
    GraftSurvError,
    NumericalError,
    ParseError,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DataError",
    "EncodingError",
    "GraftSurvError",
    "NumericalError",
    "ParseError",
    "__version__",
]
