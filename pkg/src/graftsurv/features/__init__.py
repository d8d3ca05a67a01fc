"""Feature engineering: records, encoders, target encoding, matrices."""

from graftsurv.features.encoder import FEATURE_SETS, TransplantFeatureEncoder, active_pairs
from graftsurv.features.matrix import FeatureMatrix
from graftsurv.features.records import (
    PersonCovariates,
    PostTransplant,
    Race,
    Sex,
    TransplantRecord,
    targets_of,
)
from graftsurv.features.target_encoding import (
    DAYS_PER_YEAR,
    TargetEncodingMap,
    fit_target_encoding,
)

__all__ = [
    "DAYS_PER_YEAR",
    "FEATURE_SETS",
    "FeatureMatrix",
    "PersonCovariates",
    "PostTransplant",
    "Race",
    "Sex",
    "TargetEncodingMap",
    "TransplantFeatureEncoder",
    "TransplantRecord",
    "active_pairs",
    "fit_target_encoding",
    "targets_of",
]
