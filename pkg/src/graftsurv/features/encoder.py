"""Feature encodings of transplant records.

Eight feature sets, all sharing the clinical basic block:

* ``basic``: donor and recipient age, sex, BMI, one-hot race, plus seven
  engineered pair covariates (differences, match flags, thresholds, BMI
  ratio). 23 columns, 29 with the post-transplant block.
* ``mm_total``: basic + the 0..6 total HLA mismatch count.
* ``mm_abdr``: basic + per-locus mismatch counts (A, B, DR).
* ``types_binary``: basic + one indicator per antigen seen in training,
  donor and recipient sides separate. A split antigen also switches on its
  parent broad's indicator, so every row carries at least
  12 - (homozygous loci) ones across the type block when all its antigens
  are in vocabulary.
* ``types_target``: basic + six target-encoded columns (donor and recipient
  x locus), each the mean of the fitted antigen statistic over the two
  slots at that locus.
* ``pairs``: basic + one indicator per biologically admissible
  (donor antigen, recipient antigen) pair seen active in training.
* ``freq_pairs``: like pairs, restricted to pairs active in at least
  ``min_pair_count`` training rows.
* ``all``: basic + mm_total + mm_abdr + types_binary + pairs.

Pair admissibility filters the cross product of typed donor x typed
recipient antigens per locus: a matched donor antigen (expansion set
intersects the recipient's expanded set) contributes only identity-level
pairs, i.e. (d, r) with r in expand(d); a mismatched donor antigen
contributes every (d, r) at its locus. A donor antigen matched only at
broad level with no typed identity partner therefore contributes no pair.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from graftsurv.exceptions import DataError, EncodingError
from graftsurv.features.matrix import FeatureMatrix
from graftsurv.features.records import Sex
from graftsurv.features.target_encoding import (
    CLASSIFICATION,
    REGRESSION,
    fit_target_encoding,
)
from graftsurv.hla.antigen import HlaAntigen, HlaProfile, Locus
from graftsurv.hla.broadsplit import BroadSplitTable, default_broad_split_table
from graftsurv.hla.mismatch import expand

__all__ = ["FEATURE_SETS", "TransplantFeatureEncoder", "active_pairs"]

FEATURE_SETS = (
    "basic",
    "mm_total",
    "mm_abdr",
    "types_binary",
    "types_target",
    "pairs",
    "freq_pairs",
    "all",
)

_BLOCKS = {
    "basic": ("basic",),
    "mm_total": ("basic", "mm_total"),
    "mm_abdr": ("basic", "mm_abdr"),
    "types_binary": ("basic", "types_binary"),
    "types_target": ("basic", "types_target"),
    "pairs": ("basic", "pairs"),
    "freq_pairs": ("basic", "freq_pairs"),
    "all": ("basic", "mm_total", "mm_abdr", "types_binary", "pairs"),
}

_RACES = ("white", "black", "hispanic", "asian", "other")


class _Expander:
    """Memoized antigen expansion against one broad/split table."""

    def __init__(self, table: BroadSplitTable) -> None:
        self.table = table
        self._cache: dict[HlaAntigen, frozenset[HlaAntigen]] = {}

    def __call__(self, antigen: HlaAntigen) -> frozenset[HlaAntigen]:
        got = self._cache.get(antigen)
        if got is None:
            got = expand(antigen, self.table)
            self._cache[antigen] = got
        return got

    def locus_set(self, profile: HlaProfile, locus: Locus) -> frozenset[HlaAntigen]:
        acc: frozenset[HlaAntigen] = frozenset()
        for ag in profile.typed(locus):
            acc |= self(ag)
        return acc


def active_pairs(
    donor: HlaProfile, recipient: HlaProfile, table: BroadSplitTable
) -> set[tuple[HlaAntigen, HlaAntigen]]:
    """Biologically admissible (donor, recipient) antigen pairs of a record.

    Candidates are typed donor antigens x typed recipient antigens within
    each locus. A matched donor antigen keeps only pairs with r in its
    expansion set; a mismatched donor antigen keeps all its pairs.
    """
    ex = table if isinstance(table, _Expander) else _Expander(table)
    out: set[tuple[HlaAntigen, HlaAntigen]] = set()
    for locus in Locus:
        rec_typed = recipient.typed(locus)
        rec_expanded = ex.locus_set(recipient, locus)
        for d in donor.typed(locus):
            d_exp = ex(d)
            if d_exp & rec_expanded:
                out.update((d, r) for r in rec_typed if r in d_exp)
            else:
                out.update((d, r) for r in rec_typed)
    return out


def _person_columns(prefix: str) -> list[str]:
    cols = [f"{prefix}_age", f"{prefix}_sex_female", f"{prefix}_bmi"]
    cols += [f"{prefix}_race_{r}" for r in _RACES]
    return cols


_BASIC_COLUMNS = tuple(
    _person_columns("don")
    + _person_columns("rec")
    + [
        "age_difference",
        "bmi_difference",
        "sex_match",
        "race_match",
        "don_age_over_50",
        "rec_age_over_60",
        "weight_ratio",
    ]
)

_POST_COLUMNS = (
    "don_creatinine",
    "rec_creatinine_tx",
    "rec_creatinine_discharge",
    "dialysis_first_week",
    "cit_hours",
    "cit_missing",
)

_TARGET_COLUMNS = tuple(
    f"{side}_target_{locus.value}" for side in ("don", "rec") for locus in Locus
)


class TransplantFeatureEncoder(TransformerMixin, BaseEstimator):
    """Fit/transform encoder from transplant records to a FeatureMatrix.

    Parameters
    ----------
    feature_set : str
        One of ``FEATURE_SETS``.
    include_post_transplant : bool
        Append the 6-column post-transplant block (creatinines, dialysis
        flag, cold ischemia time + missingness indicator). Missing cold
        ischemia times are imputed with the training mean.
    target_mode : {"regression", "classification"}
        Statistic used by the ``types_target`` set.
    horizon_years : float
        Horizon for classification-mode target encoding, in years.
    min_pair_count : int
        Training-activation threshold for the ``freq_pairs`` vocabulary.
    table : BroadSplitTable, optional
        Broad/split hierarchy; defaults to the packaged table.

    Notes
    -----
    Everything learned (vocabularies, target statistics, imputation mean)
    comes from the records passed to :meth:`fit` only. Antigens or pairs
    unseen at fit time contribute no columns at transform time, and
    target-encoded columns fall back to the pooled training statistic.
    """

    def __init__(
        self,
        feature_set: str = "basic",
        include_post_transplant: bool = False,
        target_mode: str = REGRESSION,
        horizon_years: float = 5.0,
        min_pair_count: int = 1000,
        table: BroadSplitTable | None = None,
    ) -> None:
        self.feature_set = feature_set
        self.include_post_transplant = include_post_transplant
        self.target_mode = target_mode
        self.horizon_years = horizon_years
        self.min_pair_count = min_pair_count
        self.table = table

    # -- fitting ---------------------------------------------------------

    def fit(self, records, y=None) -> "TransplantFeatureEncoder":
        if self.feature_set not in FEATURE_SETS:
            raise DataError(
                f"unknown feature set {self.feature_set!r}; expected one of {FEATURE_SETS}"
            )
        records = list(records)
        if not records:
            raise DataError("cannot fit an encoder on zero records")
        self._check_records(records)
        blocks = _BLOCKS[self.feature_set]
        table = self.table if self.table is not None else default_broad_split_table()
        ex = _Expander(table)
        self.table_ = table
        self._expander_ = ex

        if self.include_post_transplant:
            observed = [
                r.post_transplant.cold_ischemia_hours
                for r in records
                if r.post_transplant.cold_ischemia_hours is not None
            ]
            self.cit_mean_ = float(np.mean(observed)) if observed else 0.0

        if "types_binary" in blocks:
            don_vocab: set[HlaAntigen] = set()
            rec_vocab: set[HlaAntigen] = set()
            for r in records:
                for locus in Locus:
                    don_vocab |= ex.locus_set(r.donor_hla, locus)
                    rec_vocab |= ex.locus_set(r.recipient_hla, locus)
            self.donor_types_ = tuple(sorted(don_vocab))
            self.recipient_types_ = tuple(sorted(rec_vocab))

        if "pairs" in blocks or "freq_pairs" in blocks:
            counts: dict[tuple[HlaAntigen, HlaAntigen], int] = {}
            for r in records:
                for p in active_pairs(r.donor_hla, r.recipient_hla, ex):
                    counts[p] = counts.get(p, 0) + 1
            self.pair_counts_ = counts
            self.pairs_ = tuple(sorted(counts))
            self.frequent_pairs_ = tuple(
                sorted(p for p, c in counts.items() if c >= self.min_pair_count)
            )

        if "types_target" in blocks:
            horizon = self.horizon_years if self.target_mode == CLASSIFICATION else None
            self.target_map_ = fit_target_encoding(records, self.target_mode, horizon)

        self.columns_ = tuple(
            name for block in blocks for name in self._block_columns(block)
        )
        return self

    def _block_columns(self, block: str) -> tuple[str, ...]:
        if block == "basic":
            cols = _BASIC_COLUMNS
            if self.include_post_transplant:
                cols = cols + _POST_COLUMNS
            return cols
        if block == "mm_total":
            return ("mm_total",)
        if block == "mm_abdr":
            return ("mm_a", "mm_b", "mm_dr")
        if block == "types_binary":
            return tuple(f"don_type_{ag}" for ag in self.donor_types_) + tuple(
                f"rec_type_{ag}" for ag in self.recipient_types_
            )
        if block == "types_target":
            return _TARGET_COLUMNS
        if block == "pairs":
            return tuple(f"pair_{d}_{r}" for d, r in self.pairs_)
        if block == "freq_pairs":
            return tuple(f"pair_{d}_{r}" for d, r in self.frequent_pairs_)
        raise AssertionError(block)

    # -- validation ------------------------------------------------------

    def _check_records(self, records) -> None:
        bad: list[str] = []
        for r in records:
            ok = (
                np.isfinite(r.donor.age)
                and np.isfinite(r.donor.bmi)
                and np.isfinite(r.recipient.age)
                and np.isfinite(r.recipient.bmi)
                and r.recipient.bmi > 0
            )
            if ok and self.include_post_transplant:
                p = r.post_transplant
                ok = p is not None and all(
                    np.isfinite(v)
                    for v in (
                        p.donor_creatinine,
                        p.recipient_creatinine_tx,
                        p.recipient_creatinine_discharge,
                    )
                )
            if not ok:
                bad.append(r.id)
        if bad:
            shown = ", ".join(bad[:10]) + ("..." if len(bad) > 10 else "")
            raise EncodingError(
                f"{len(bad)} record(s) have missing or non-finite required covariates: {shown}"
            )

    # -- transform -------------------------------------------------------

    def transform(self, records) -> FeatureMatrix:
        check_is_fitted(self, "columns_")
        records = list(records)
        self._check_records(records)
        blocks = _BLOCKS[self.feature_set]
        parts = [self._encode_block(block, records) for block in blocks]
        values = (
            np.hstack(parts) if parts else np.empty((len(records), 0))
        )
        return FeatureMatrix(self.columns_, values)

    def _encode_block(self, block: str, records) -> np.ndarray:
        n = len(records)
        ex = self._expander_
        if block == "basic":
            return self._encode_basic(records)
        if block == "mm_total":
            out = np.empty((n, 1))
            for i, r in enumerate(records):
                out[i, 0] = sum(self._locus_mm(r, locus) for locus in Locus)
            return out
        if block == "mm_abdr":
            out = np.empty((n, 3))
            for i, r in enumerate(records):
                for j, locus in enumerate(Locus):
                    out[i, j] = self._locus_mm(r, locus)
            return out
        if block == "types_binary":
            don_idx = {ag: j for j, ag in enumerate(self.donor_types_)}
            rec_idx = {ag: j for j, ag in enumerate(self.recipient_types_)}
            off = len(self.donor_types_)
            out = np.zeros((n, off + len(self.recipient_types_)))
            for i, r in enumerate(records):
                for locus in Locus:
                    for ag in ex.locus_set(r.donor_hla, locus):
                        j = don_idx.get(ag)
                        if j is not None:
                            out[i, j] = 1.0
                    for ag in ex.locus_set(r.recipient_hla, locus):
                        j = rec_idx.get(ag)
                        if j is not None:
                            out[i, off + j] = 1.0
            return out
        if block == "types_target":
            m = self.target_map_
            out = np.empty((n, 6))
            for i, r in enumerate(records):
                for j, (profile, locus) in enumerate(
                    [(r.donor_hla, lo) for lo in Locus] + [(r.recipient_hla, lo) for lo in Locus]
                ):
                    s1, s2 = profile.at(locus)
                    out[i, j] = 0.5 * (m.value(s1) + m.value(s2))
            return out
        if block in ("pairs", "freq_pairs"):
            vocab = self.pairs_ if block == "pairs" else self.frequent_pairs_
            idx = {p: j for j, p in enumerate(vocab)}
            out = np.zeros((n, len(vocab)))
            for i, r in enumerate(records):
                for p in active_pairs(r.donor_hla, r.recipient_hla, ex):
                    j = idx.get(p)
                    if j is not None:
                        out[i, j] = 1.0
            return out
        raise AssertionError(block)

    def _locus_mm(self, record, locus: Locus) -> int:
        ex = self._expander_
        rec_expanded = ex.locus_set(record.recipient_hla, locus)
        return sum(1 for d in record.donor_hla.typed(locus) if not (ex(d) & rec_expanded))

    def _encode_basic(self, records) -> np.ndarray:
        n = len(records)
        n_cols = len(_BASIC_COLUMNS) + (6 if self.include_post_transplant else 0)
        if n == 0:
            return np.empty((0, n_cols))
        don_age = np.array([r.donor.age for r in records], dtype=np.float64)
        rec_age = np.array([r.recipient.age for r in records], dtype=np.float64)
        don_bmi = np.array([r.donor.bmi for r in records], dtype=np.float64)
        rec_bmi = np.array([r.recipient.bmi for r in records], dtype=np.float64)
        cols = [
            don_age,
            np.array([r.donor.sex is Sex.FEMALE for r in records], dtype=np.float64),
            don_bmi,
        ]
        cols += [
            np.array([r.donor.race.value.lower() == race for r in records], dtype=np.float64)
            for race in _RACES
        ]
        cols += [
            rec_age,
            np.array([r.recipient.sex is Sex.FEMALE for r in records], dtype=np.float64),
            rec_bmi,
        ]
        cols += [
            np.array([r.recipient.race.value.lower() == race for r in records], dtype=np.float64)
            for race in _RACES
        ]
        cols += [
            don_age - rec_age,
            don_bmi - rec_bmi,
            np.array([r.donor.sex is r.recipient.sex for r in records], dtype=np.float64),
            np.array([r.donor.race is r.recipient.race for r in records], dtype=np.float64),
            (don_age > 50).astype(np.float64),
            (rec_age > 60).astype(np.float64),
            don_bmi / rec_bmi,
        ]
        if self.include_post_transplant:
            cit = np.array(
                [
                    np.nan
                    if r.post_transplant.cold_ischemia_hours is None
                    else r.post_transplant.cold_ischemia_hours
                    for r in records
                ],
                dtype=np.float64,
            )
            missing = np.isnan(cit)
            cols += [
                np.array([r.post_transplant.donor_creatinine for r in records]),
                np.array([r.post_transplant.recipient_creatinine_tx for r in records]),
                np.array([r.post_transplant.recipient_creatinine_discharge for r in records]),
                np.array(
                    [r.post_transplant.dialysis_first_week for r in records], dtype=np.float64
                ),
                np.where(missing, self.cit_mean_, cit),
                missing.astype(np.float64),
            ]
        return np.column_stack(cols)
