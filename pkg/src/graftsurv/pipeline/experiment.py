"""Repeated-split benchmarking of feature sets and models.

The protocol per split: fit the encoder on the training rows, fit every
grid configuration on the encoded training rows, pick the configuration
with the best validation C-index (ties keep the first grid entry), refit
encoder and chosen configuration on train+validation, and score C-index
and mean dynamic AUC on the held-out test rows. Test rows never reach any
fit call. After all splits, each non-baseline feature set is compared to
the baseline with one-sided Wilcoxon signed-rank and paired t-tests on
the per-split test metrics, Bonferroni-corrected by the number of
compared sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from graftsurv.exceptions import DataError, GraftSurvError
from graftsurv.features.encoder import FEATURE_SETS, TransplantFeatureEncoder
from graftsurv.features.records import targets_of
from graftsurv.features.target_encoding import CLASSIFICATION, REGRESSION
from graftsurv.metrics import (
    bonferroni,
    concordance_index,
    mean_dynamic_auc,
    paired_t_greater,
    wilcoxon_greater,
)
from graftsurv.models import (
    CoxnetSurvival,
    GradientBoostedSurvival,
    RandomSurvivalForest,
    coxnet_grid,
    gb_grid,
    rsf_grid,
)
from graftsurv.survival.splits import make_splits

__all__ = [
    "MODEL_NAMES",
    "EncoderVariant",
    "DetailRow",
    "SummaryRow",
    "ExperimentReport",
    "default_grid",
    "run_experiment",
    "run_target_encoding_comparison",
]

_MODEL_REGISTRY = {
    "coxnet": (CoxnetSurvival, coxnet_grid, False),
    "rsf": (RandomSurvivalForest, rsf_grid, True),
    "gb": (GradientBoostedSurvival, gb_grid, True),
}

MODEL_NAMES = tuple(_MODEL_REGISTRY)


def default_grid(model: str):
    """The declared hyperparameter grid for one model name."""
    if model not in _MODEL_REGISTRY:
        raise DataError(f"unknown model {model!r}; expected one of {MODEL_NAMES}")
    return _MODEL_REGISTRY[model][1]()


def _build(model: str, cfg: dict, seed: int):
    cls, _, seeded = _MODEL_REGISTRY[model]
    return cls(**cfg, seed=seed) if seeded else cls(**cfg)


@dataclass(frozen=True)
class EncoderVariant:
    """One encoding under comparison: a label plus encoder settings."""

    label: str
    feature_set: str
    target_mode: str = REGRESSION
    horizon_years: float = 5.0

    def make(self, include_post, min_pair_count, table=None) -> TransplantFeatureEncoder:
        return TransplantFeatureEncoder(
            feature_set=self.feature_set,
            include_post_transplant=include_post,
            target_mode=self.target_mode,
            horizon_years=self.horizon_years,
            min_pair_count=min_pair_count,
            table=table,
        )


@dataclass(frozen=True)
class DetailRow:
    split_index: int
    feature_set: str
    model: str
    hyperparams: str
    validation_c_index: float | None
    test_c_index: float | None
    test_mean_auc: float | None


@dataclass(frozen=True)
class SummaryRow:
    feature_set: str
    model: str
    mean_test_c_index: float | None
    mean_test_auc: float | None
    wilcoxon_adj_p_c_index: float | None
    wilcoxon_adj_p_auc: float | None
    paired_t_adj_p_c_index: float | None
    paired_t_adj_p_auc: float | None


@dataclass(frozen=True)
class ExperimentReport:
    detail_rows: tuple[DetailRow, ...]
    summary_rows: tuple[SummaryRow, ...]
    n_splits: int
    baseline: str
    correction_factor: int


def _take(records, idx):
    return [records[i] for i in idx]


def _annotate(exc, split_index, label, model):
    coordinate = f"split {split_index}, set {label}, model {model}"
    return exc.__class__(f"{coordinate}: {exc}")


def _fit_cell(
    model, grid, x_train, y_train, x_valid, y_valid, x_final, y_final, x_test, y_test, seed
):
    """Grid-select on validation, refit, score on test."""
    best_cfg = None
    best_vc = -np.inf
    for cfg in grid:
        est = _build(model, cfg, seed).fit(x_train, y_train)
        vc = concordance_index(y_valid, est.predict(x_valid)).value
        if vc > best_vc:
            best_vc = vc
            best_cfg = cfg
    final = _build(model, best_cfg, seed).fit(x_final, y_final)
    risk = final.predict(x_test)
    test_c = concordance_index(y_test, risk).value
    test_auc = mean_dynamic_auc(y_final, y_test, risk).value
    return best_cfg, best_vc, test_c, test_auc


def _adjusted_p(test_fn, sample, baseline, m):
    """Adjusted one-sided p of sample > baseline; degenerate pairs give 1."""
    try:
        return test_fn(np.asarray(sample), np.asarray(baseline), n_comparisons=m).adjusted_p
    except DataError:
        return 1.0


def _mean_or_none(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def _run(
    records,
    variants,
    models,
    grids,
    n_splits,
    master_seed,
    include_post,
    min_pair_count,
    baseline,
    refit_encoder,
    strict,
    audit,
    table,
):
    if not records:
        raise DataError("cannot run an experiment on zero records")
    labels = [v.label for v in variants]
    if len(set(labels)) != len(labels):
        raise DataError(f"duplicate feature-set labels: {labels}")
    if len(variants) > 1 and baseline not in labels:
        raise DataError(
            f"feature sets {labels} do not include the comparison baseline {baseline!r}"
        )
    for m in models:
        if m not in _MODEL_REGISTRY:
            raise DataError(f"unknown model {m!r}; expected one of {MODEL_NAMES}")

    plans = make_splits(len(records), n_splits, master_seed)
    details = []
    for split_index, plan in enumerate(plans):
        if audit:
            test_set = set(plan.test.tolist())
            if test_set & set(plan.train.tolist()) or test_set & set(plan.valid.tolist()):
                raise DataError(f"split {split_index}: test rows leak into fit rows")
        train = _take(records, plan.train)
        valid = _take(records, plan.valid)
        test = _take(records, plan.test)
        final_rows = train + valid
        y_train = targets_of(train)
        y_valid = targets_of(valid)
        y_final = targets_of(final_rows)
        y_test = targets_of(test)

        for variant in variants:
            try:
                encoder = variant.make(include_post, min_pair_count, table).fit(train)
                x_train = encoder.transform(train)
                x_valid = encoder.transform(valid)
                if refit_encoder:
                    final_encoder = variant.make(include_post, min_pair_count, table).fit(
                        final_rows
                    )
                else:
                    final_encoder = encoder
                x_final = final_encoder.transform(final_rows)
                x_test = final_encoder.transform(test)
            except GraftSurvError as exc:
                if strict:
                    raise _annotate(exc, split_index, variant.label, "-") from exc
                for model in models:
                    details.append(
                        DetailRow(split_index, variant.label, model, "", None, None, None)
                    )
                continue

            for model in models:
                grid = grids[model]
                try:
                    cfg, vc, test_c, test_auc = _fit_cell(
                        model,
                        grid,
                        x_train,
                        y_train,
                        x_valid,
                        y_valid,
                        x_final,
                        y_final,
                        x_test,
                        y_test,
                        plan.seed,
                    )
                except GraftSurvError as exc:
                    if strict:
                        raise _annotate(exc, split_index, variant.label, model) from exc
                    details.append(
                        DetailRow(split_index, variant.label, model, "", None, None, None)
                    )
                    continue
                details.append(
                    DetailRow(
                        split_index,
                        variant.label,
                        model,
                        json.dumps(cfg, sort_keys=True),
                        vc,
                        test_c,
                        test_auc,
                    )
                )

    assert len(details) == n_splits * len(variants) * len(models)

    correction = max(1, len(variants) - 1)
    by_cell = {}
    for row in details:
        by_cell.setdefault((row.feature_set, row.model), []).append(row)
    for rows in by_cell.values():
        rows.sort(key=lambda r: r.split_index)

    summaries = []
    for variant in variants:
        for model in models:
            rows = by_cell[(variant.label, model)]
            mean_c = _mean_or_none([r.test_c_index for r in rows])
            mean_auc = _mean_or_none([r.test_mean_auc for r in rows])
            p_w_c = p_w_a = p_t_c = p_t_a = None
            if variant.label != baseline and len(variants) > 1:
                base_rows = by_cell[(baseline, model)]
                pairs_c = [
                    (r.test_c_index, b.test_c_index)
                    for r, b in zip(rows, base_rows)
                    if r.test_c_index is not None and b.test_c_index is not None
                ]
                pairs_a = [
                    (r.test_mean_auc, b.test_mean_auc)
                    for r, b in zip(rows, base_rows)
                    if r.test_mean_auc is not None and b.test_mean_auc is not None
                ]
                if pairs_c:
                    xs, bs = zip(*pairs_c)
                    p_w_c = _adjusted_p(wilcoxon_greater, xs, bs, correction)
                    p_t_c = _adjusted_p(paired_t_greater, xs, bs, correction)
                if pairs_a:
                    xs, bs = zip(*pairs_a)
                    p_w_a = _adjusted_p(wilcoxon_greater, xs, bs, correction)
                    p_t_a = _adjusted_p(paired_t_greater, xs, bs, correction)
            summaries.append(
                SummaryRow(
                    variant.label, model, mean_c, mean_auc, p_w_c, p_w_a, p_t_c, p_t_a
                )
            )

    return ExperimentReport(
        detail_rows=tuple(details),
        summary_rows=tuple(summaries),
        n_splits=n_splits,
        baseline=baseline,
        correction_factor=correction,
    )


def run_experiment(
    records,
    feature_sets=("basic", "mm_total"),
    models=MODEL_NAMES,
    n_splits=10,
    master_seed=0,
    include_post=False,
    grids=None,
    target_mode=REGRESSION,
    horizon_years=5.0,
    min_pair_count=1000,
    refit_encoder=True,
    strict=True,
    audit=False,
    table=None,
) -> ExperimentReport:
    """Feature-set benchmark with the baseline fixed at 'basic'."""
    for fs in feature_sets:
        if fs not in FEATURE_SETS:
            raise DataError(f"unknown feature set {fs!r}; expected one of {FEATURE_SETS}")
    variants = [
        EncoderVariant(fs, fs, target_mode=target_mode, horizon_years=horizon_years)
        for fs in feature_sets
    ]
    grids = {m: (grids or {}).get(m) or default_grid(m) for m in models}
    return _run(
        records,
        variants,
        list(models),
        grids,
        n_splits,
        master_seed,
        include_post,
        min_pair_count,
        baseline="basic",
        refit_encoder=refit_encoder,
        strict=strict,
        audit=audit,
        table=table,
    )


def run_target_encoding_comparison(
    records,
    n_splits=10,
    master_seed=0,
    include_post=False,
    grids=None,
    horizons=(1.0, 5.0, 10.0, 15.0, 20.0),
    min_pair_count=1000,
    refit_encoder=True,
    strict=True,
    audit=False,
    table=None,
) -> ExperimentReport:
    """Binary type encoding vs target encodings, random survival forest only."""
    variants = [EncoderVariant("types_binary", "types_binary")]
    variants.append(
        EncoderVariant("types_target_regression", "types_target", target_mode=REGRESSION)
    )
    for t in horizons:
        label = f"types_target_classification_{t:g}y"
        variants.append(
            EncoderVariant(label, "types_target", target_mode=CLASSIFICATION, horizon_years=t)
        )
    grids = {"rsf": (grids or {}).get("rsf") or default_grid("rsf")}
    return _run(
        records,
        variants,
        ["rsf"],
        grids,
        n_splits,
        master_seed,
        include_post,
        min_pair_count,
        baseline="types_binary",
        refit_encoder=refit_encoder,
        strict=strict,
        audit=audit,
        table=table,
    )
