"""Target encoding: hand-computed maps on a 10-row fixture."""

from __future__ import annotations

import pytest

from graftsurv.exceptions import DataError
from graftsurv.features import (
    PersonCovariates,
    Race,
    Sex,
    TransplantRecord,
    fit_target_encoding,
)
from graftsurv.hla import HlaProfile, parse_antigen

PERSON = PersonCovariates(age=45.0, sex=Sex.MALE, race=Race.WHITE, bmi=26.0)


def rec(rid, don_a, rec_a, time, event):
    don = HlaProfile.from_labels([*don_a, "B7", "B8", "DR1", "DR4"])
    re_ = HlaProfile.from_labels([*rec_a, "B7", "B8", "DR1", "DR4"])
    return TransplantRecord(rid, don, re_, PERSON, PERSON, float(time), bool(event))


# Ten rows, A-locus varies, B/DR identical everywhere.
ROWS = [
    rec("r01", ("A1", "A2"), ("A1", "A2"), 1000, 1),
    rec("r02", ("A1", "A1"), ("A2", "A3"), 2000, 0),
    rec("r03", ("A2", "A3"), ("A1", "A2"), 3000, 1),
    rec("r04", ("A3", "A3"), ("A3", "A3"), 400, 0),
    rec("r05", ("A1", "A3"), ("A2", "A2"), 1500, 1),
    rec("r06", ("A2", "A2"), ("A1", "A3"), 2500, 0),
    rec("r07", ("A1", "A2"), ("A3", "A3"), 800, 1),
    rec("r08", ("A3", "A1"), ("A1", "A1"), 3500, 0),
    rec("r09", ("A2", "A3"), ("A2", "A3"), 600, 1),
    rec("r10", ("A1", "A1"), ("A1", "A1"), 5000, 0),
]

A1, A2, A3 = (parse_antigen(s) for s in ("A1", "A2", "A3"))


class TestRegressionMode:
    def test_values_are_carrier_means_of_observed_time(self):
        m = fit_target_encoding(ROWS, "regression")
        # Carrier rows (either party, typed level, each row once):
        # A1 in r01,r02,r03,r05,r06,r07,r08,r10; A2 in r01,r02,r03,r05,r06,r07,r09;
        # A3 in r02..r09 except r01.
        assert m.value(A1) == 19300 / 8
        assert m.value(A2) == 11400 / 7
        assert m.value(A3) == 14300 / 8

    def test_censored_rows_contribute_their_censoring_times(self):
        # r10 (censored at 5000) moves the A1 mean; dropping it would give
        # 14300/7 instead.
        m = fit_target_encoding(ROWS, "regression")
        assert m.value(A1) != pytest.approx(14300 / 7)

    def test_fallback_is_global_mean(self):
        m = fit_target_encoding(ROWS, "regression")
        assert m.fallback == 2030.0
        assert m.value(parse_antigen("A99")) == 2030.0

    def test_shared_antigens_pool_to_global_mean(self):
        m = fit_target_encoding(ROWS, "regression")
        assert m.value(parse_antigen("B7")) == 2030.0
        assert m.value(parse_antigen("DR4")) == 2030.0

    def test_row_with_antigen_on_both_sides_counts_once(self):
        # r01 carries A1 on both sides; if it were double counted the A1
        # denominator would be 9, not 8.
        m = fit_target_encoding(ROWS, "regression")
        assert m.value(A1) == 19300 / 8


class TestClassificationMode:
    def test_five_year_map(self):
        m = fit_target_encoding(ROWS, "classification", horizon_years=5.0)
        # Cutoff 1826.25 days. r04 (censored at 400) is excluded; failures
        # by the horizon are r01, r05, r07, r09; r03 failed after it.
        assert m.value(A1) == 3 / 8
        assert m.value(A2) == 4 / 7
        assert m.value(A3) == 3 / 7
        assert m.fallback == 4 / 9

    def test_one_year_map_counts_late_failures_as_functioning(self):
        m = fit_target_encoding(ROWS, "classification", horizon_years=1.0)
        # Every event time exceeds 365.25 and the shortest censoring time
        # (400) reaches the horizon, so all rows are decidable, none failed.
        assert m.value(A1) == 0.0
        assert m.value(A3) == 0.0
        assert m.fallback == 0.0

    def test_values_are_probabilities(self):
        for years in (1.0, 5.0, 10.0):
            m = fit_target_encoding(ROWS, "classification", horizon_years=years)
            for v in list(m.values.values()) + [m.fallback]:
                assert 0.0 <= v <= 1.0

    def test_exclusion_count_is_reported(self):
        # At 10 years only censoring times past 3652.5 stay decidable:
        # r10 (5000) does, r02/r04/r06/r08 drop out.
        m = fit_target_encoding(ROWS, "classification", horizon_years=10.0)
        assert (m.n_rows, m.n_excluded) == (10, 4)
        r = fit_target_encoding(ROWS, "regression")
        assert (r.n_rows, r.n_excluded) == (10, 0)

    def test_no_decidable_rows_is_an_error(self):
        censored_early = [rec("c1", ("A1", "A2"), ("A1", "A2"), 100, 0)]
        with pytest.raises(DataError):
            fit_target_encoding(censored_early, "classification", horizon_years=5.0)

    def test_needs_positive_horizon(self):
        with pytest.raises(DataError):
            fit_target_encoding(ROWS, "classification", horizon_years=0.0)
        with pytest.raises(DataError):
            fit_target_encoding(ROWS, "classification")


class TestModeValidation:
    def test_regression_rejects_horizon(self):
        with pytest.raises(DataError):
            fit_target_encoding(ROWS, "regression", horizon_years=5.0)

    def test_unknown_mode(self):
        with pytest.raises(DataError):
            fit_target_encoding(ROWS, "ranking")

    def test_empty_records(self):
        with pytest.raises(DataError):
            fit_target_encoding([], "regression")
