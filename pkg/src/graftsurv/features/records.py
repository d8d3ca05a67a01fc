"""Transplant case records: typing, clinical covariates, outcome."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from graftsurv.hla.antigen import HlaProfile
from graftsurv.survival.targets import make_survival_target

__all__ = ["Sex", "Race", "PersonCovariates", "PostTransplant", "TransplantRecord", "targets_of"]


class Sex(str, Enum):
    MALE = "M"
    FEMALE = "F"


class Race(str, Enum):
    """Race/ethnicity categories used for one-hot encoding.

    The category list is a fixed part of the feature ontology, not learned
    from data, so basic-block column counts never drift between fits.
    """

    WHITE = "White"
    BLACK = "Black"
    HISPANIC = "Hispanic"
    ASIAN = "Asian"
    OTHER = "Other"


@dataclass(frozen=True)
class PersonCovariates:
    """Pre-transplant covariates of one person (donor or recipient)."""

    age: float
    sex: Sex
    race: Race
    bmi: float


@dataclass(frozen=True)
class PostTransplant:
    """Covariates known only once the transplant happened.

    cold_ischemia_hours may be None (missing); every other field is
    required. Encoders impute missing cold ischemia time from the training
    mean and add a missingness indicator column.
    """

    donor_creatinine: float
    recipient_creatinine_tx: float
    recipient_creatinine_discharge: float
    dialysis_first_week: bool
    cold_ischemia_hours: float | None = None


@dataclass(frozen=True)
class TransplantRecord:
    """One deceased-donor kidney transplant.

    time is days from transplant to graft failure (event=True) or to last
    follow-up (event=False).
    """

    id: str
    donor_hla: HlaProfile
    recipient_hla: HlaProfile
    donor: PersonCovariates
    recipient: PersonCovariates
    time: float
    event: bool
    post_transplant: PostTransplant | None = None


def targets_of(records) -> np.ndarray:
    """Stack record outcomes into a structured survival target array."""
    return make_survival_target(
        [r.time for r in records], [r.event for r in records]
    )
