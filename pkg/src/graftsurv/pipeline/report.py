"""Report serialization: CSV round trip and a markdown rendering.

The CSV is a single flat table with a row_type discriminator. One meta
row carries the report-level fields, then one row per detail record and
one per summary record. Floats are written with six significant digits;
parsing the file and writing it again reproduces the bytes exactly.
"""

from __future__ import annotations

import csv
import io

from graftsurv.exceptions import DataError
from graftsurv.ioutil import atomic_write_text
from graftsurv.pipeline.experiment import DetailRow, ExperimentReport, SummaryRow

__all__ = [
    "report_to_csv_text",
    "parse_report_csv_text",
    "write_report_csv",
    "read_report_csv",
    "render_markdown",
    "write_report_markdown",
]

_COLUMNS = (
    "row_type",
    "split_index",
    "feature_set",
    "model",
    "hyperparams",
    "validation_c_index",
    "test_c_index",
    "test_mean_auc",
    "mean_test_c_index",
    "mean_test_auc",
    "wilcoxon_adj_p_c_index",
    "wilcoxon_adj_p_auc",
    "paired_t_adj_p_c_index",
    "paired_t_adj_p_auc",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".6g")


def _num(cell: str) -> float | None:
    return None if cell == "" else float(cell)


def report_to_csv_text(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_COLUMNS)
    # Report-level fields ride in one meta row: n_splits in split_index,
    # baseline in feature_set, the correction factor in hyperparams.
    meta = {
        "row_type": "meta",
        "split_index": report.n_splits,
        "feature_set": report.baseline,
        "hyperparams": report.correction_factor,
    }
    writer.writerow([_fmt(meta.get(c)) for c in _COLUMNS])
    for row in report.detail_rows:
        cells = {
            "row_type": "detail",
            "split_index": row.split_index,
            "feature_set": row.feature_set,
            "model": row.model,
            "hyperparams": row.hyperparams,
            "validation_c_index": row.validation_c_index,
            "test_c_index": row.test_c_index,
            "test_mean_auc": row.test_mean_auc,
        }
        writer.writerow([_fmt(cells.get(c)) for c in _COLUMNS])
    for row in report.summary_rows:
        cells = {
            "row_type": "summary",
            "feature_set": row.feature_set,
            "model": row.model,
            "mean_test_c_index": row.mean_test_c_index,
            "mean_test_auc": row.mean_test_auc,
            "wilcoxon_adj_p_c_index": row.wilcoxon_adj_p_c_index,
            "wilcoxon_adj_p_auc": row.wilcoxon_adj_p_auc,
            "paired_t_adj_p_c_index": row.paired_t_adj_p_c_index,
            "paired_t_adj_p_auc": row.paired_t_adj_p_auc,
        }
        writer.writerow([_fmt(cells.get(c)) for c in _COLUMNS])
    return buf.getvalue()


def parse_report_csv_text(text: str) -> ExperimentReport:
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise DataError("report CSV is empty") from None
    if header != _COLUMNS:
        raise DataError(f"unexpected report header: {header}")
    n_splits = None
    baseline = None
    correction = None
    details = []
    summaries = []
    for line_no, cells in enumerate(reader, start=2):
        if len(cells) != len(_COLUMNS):
            raise DataError(f"report line {line_no}: expected {len(_COLUMNS)} cells")
        get = dict(zip(_COLUMNS, cells))
        kind = get["row_type"]
        if kind == "meta":
            n_splits = int(get["split_index"])
            baseline = get["feature_set"]
            correction = int(get["hyperparams"])
        elif kind == "detail":
            details.append(
                DetailRow(
                    split_index=int(get["split_index"]),
                    feature_set=get["feature_set"],
                    model=get["model"],
                    hyperparams=get["hyperparams"],
                    validation_c_index=_num(get["validation_c_index"]),
                    test_c_index=_num(get["test_c_index"]),
                    test_mean_auc=_num(get["test_mean_auc"]),
                )
            )
        elif kind == "summary":
            summaries.append(
                SummaryRow(
                    feature_set=get["feature_set"],
                    model=get["model"],
                    mean_test_c_index=_num(get["mean_test_c_index"]),
                    mean_test_auc=_num(get["mean_test_auc"]),
                    wilcoxon_adj_p_c_index=_num(get["wilcoxon_adj_p_c_index"]),
                    wilcoxon_adj_p_auc=_num(get["wilcoxon_adj_p_auc"]),
                    paired_t_adj_p_c_index=_num(get["paired_t_adj_p_c_index"]),
                    paired_t_adj_p_auc=_num(get["paired_t_adj_p_auc"]),
                )
            )
        else:
            raise DataError(f"report line {line_no}: unknown row_type {kind!r}")
    if n_splits is None:
        raise DataError("report CSV has no meta row")
    return ExperimentReport(
        detail_rows=tuple(details),
        summary_rows=tuple(summaries),
        n_splits=n_splits,
        baseline=baseline,
        correction_factor=correction,
    )


def write_report_csv(report: ExperimentReport, path) -> None:
    atomic_write_text(path, report_to_csv_text(report))


def read_report_csv(path) -> ExperimentReport:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return parse_report_csv_text(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc


def _md_cell(value) -> str:
    return "" if value is None else format(float(value), ".4f")


def render_markdown(report: ExperimentReport) -> str:
    """Two summary tables, one per metric, feature sets down and models across."""
    models = []
    for row in report.summary_rows:
        if row.model not in models:
            models.append(row.model)
    sets = []
    for row in report.summary_rows:
        if row.feature_set not in sets:
            sets.append(row.feature_set)
    by_cell = {(r.feature_set, r.model): r for r in report.summary_rows}

    def table(title, metric_attr, p_attr):
        header = ["feature_set"]
        for m in models:
            header.extend([f"{m}_{metric_attr}", f"{m}_p"])
        lines = [f"## {title}", ""]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "|".join([" --- "] * len(header)) + "|")
        for fs in sets:
            cells = [fs]
            for m in models:
                row = by_cell[(fs, m)]
                cells.append(_md_cell(getattr(row, metric_attr)))
                cells.append(_md_cell(getattr(row, p_attr)))
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
        return lines

    out = [
        "# Experiment report",
        "",
        f"Splits: {report.n_splits}. Baseline: {report.baseline}. "
        f"P-values are one-sided Wilcoxon signed-rank vs the baseline, "
        f"Bonferroni-corrected by {report.correction_factor}.",
        "",
    ]
    out.extend(table("Test C-index", "mean_test_c_index", "wilcoxon_adj_p_c_index"))
    out.extend(table("Mean dynamic AUC", "mean_test_auc", "wilcoxon_adj_p_auc"))
    return "\n".join(out)


def write_report_markdown(report: ExperimentReport, path) -> None:
    atomic_write_text(path, render_markdown(report))
