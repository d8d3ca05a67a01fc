"""Survival-aware target encoding of HLA antigens.

Maps each antigen to a scalar statistic of the training outcome, pooled over
donor and recipient carriers. Two modes:

* regression: mean observed time (failure or censoring alike) over the
  training rows in which either party carries the antigen.
* classification at horizon t years: fraction of grafts known to have failed
  by t among rows whose status at t is decidable. Rows censored before
  t * 365.25 days are excluded; an event row counts as failed when its time
  is <= the horizon and as functioning otherwise.

Antigens are counted at the typed level (no broad/split expansion), and a
row counts once per antigen even if both parties carry it. Antigens never
seen in training fall back to the pooled statistic over all training rows.
"""

from __future__ import annotations

from dataclasses import dataclass

from graftsurv.exceptions import DataError
from graftsurv.hla.antigen import HlaAntigen

__all__ = ["DAYS_PER_YEAR", "TargetEncodingMap", "fit_target_encoding"]

DAYS_PER_YEAR = 365.25

REGRESSION = "regression"
CLASSIFICATION = "classification"


@dataclass(frozen=True)
class TargetEncodingMap:
    """Fitted antigen -> statistic map with a fallback for unseen antigens.

    n_excluded counts training rows dropped by the censored-before-horizon
    rule (always 0 in regression mode), so short-horizon fits on heavily
    censored data are auditable.
    """

    mode: str
    horizon_years: float | None
    values: dict[HlaAntigen, float]
    fallback: float
    n_rows: int = 0
    n_excluded: int = 0

    def value(self, antigen: HlaAntigen) -> float:
        return self.values.get(antigen, self.fallback)


def _carried_antigens(record) -> set[HlaAntigen]:
    return set(record.donor_hla.antigens()) | set(record.recipient_hla.antigens())


def fit_target_encoding(
    records, mode: str = REGRESSION, horizon_years: float | None = None
) -> TargetEncodingMap:
    """Learn one shared encoding map from training records.

    Parameters
    ----------
    records : sequence of TransplantRecord
        Training rows. Must be non-empty; classification mode additionally
        needs at least one row decidable at the horizon.
    mode : {"regression", "classification"}
    horizon_years : float, optional
        Required in classification mode, in years; the cutoff in days is
        horizon_years * 365.25.
    """
    if not records:
        raise DataError("cannot fit a target encoding on zero records")
    if mode == REGRESSION:
        if horizon_years is not None:
            raise DataError("horizon_years only applies to classification mode")
        sums: dict[HlaAntigen, float] = {}
        counts: dict[HlaAntigen, int] = {}
        total = 0.0
        for r in records:
            total += r.time
            for ag in _carried_antigens(r):
                sums[ag] = sums.get(ag, 0.0) + r.time
                counts[ag] = counts.get(ag, 0) + 1
        values = {ag: sums[ag] / counts[ag] for ag in sums}
        fallback = total / len(records)
        return TargetEncodingMap(REGRESSION, None, values, fallback, len(records), 0)
    if mode == CLASSIFICATION:
        if horizon_years is None or horizon_years <= 0:
            raise DataError("classification mode needs a positive horizon_years")
        cutoff = horizon_years * DAYS_PER_YEAR
        failed: dict[HlaAntigen, int] = {}
        decidable: dict[HlaAntigen, int] = {}
        failed_all = 0
        decidable_all = 0
        for r in records:
            if not r.event and r.time < cutoff:
                continue  # censored before the horizon: status unknown
            is_failed = r.event and r.time <= cutoff
            decidable_all += 1
            failed_all += is_failed
            for ag in _carried_antigens(r):
                decidable[ag] = decidable.get(ag, 0) + 1
                failed[ag] = failed.get(ag, 0) + is_failed
        if decidable_all == 0:
            raise DataError(
                f"no training row has a decidable status at {horizon_years} years"
            )
        values = {ag: failed.get(ag, 0) / decidable[ag] for ag in decidable}
        fallback = failed_all / decidable_all
        return TargetEncodingMap(
            CLASSIFICATION,
            float(horizon_years),
            values,
            fallback,
            len(records),
            len(records) - decidable_all,
        )
    raise DataError(f"unknown target encoding mode {mode!r}")
