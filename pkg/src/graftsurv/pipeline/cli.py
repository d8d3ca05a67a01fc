"""Command-line interface.

Subcommands cover the full workflow: synthesize or ingest a cohort CSV,
encode features, train and evaluate single models, run the repeated-split
experiment and the target-encoding comparison, and re-render reports.

A flat ``key=value`` config file (``--config``) supplies defaults;
explicit command-line options win over config values, which win over
built-in defaults. All output files are written atomically. Exit codes:
0 success, 1 usage error, 2 data error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys

import numpy as np

from graftsurv.exceptions import DataError, GraftSurvError, NumericalError
from graftsurv.features.encoder import FEATURE_SETS, TransplantFeatureEncoder
from graftsurv.features.matrix import FeatureMatrix
from graftsurv.features.records import targets_of
from graftsurv.features.target_encoding import CLASSIFICATION, REGRESSION
from graftsurv.hla.broadsplit import load_broad_split_table
from graftsurv.ioutil import atomic_write_text
from graftsurv.metrics import concordance_index, mean_dynamic_auc
from graftsurv.models import (
    CoxnetSurvival,
    GradientBoostedSurvival,
    RandomSurvivalForest,
    load_model,
    save_model,
)
from graftsurv.pipeline.experiment import (
    MODEL_NAMES,
    run_experiment,
    run_target_encoding_comparison,
)
from graftsurv.pipeline.ingest import (
    IngestConfig,
    ingest,
    parse_case_rows,
    rows_to_records,
    write_case_rows,
)
from graftsurv.pipeline.report import (
    read_report_csv,
    render_markdown,
    report_to_csv_text,
    write_report_csv,
)
from graftsurv.pipeline.synth import SynthConfig, synthesize
from graftsurv.survival.targets import make_survival_target

__all__ = ["main"]

THREADS_ENV = "GRAFTSURV_THREADS"


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _coerce(raw: str):
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    return raw


def parse_config_text(text: str) -> dict:
    """Flat key=value lines; blank lines and # comments ignored."""
    out = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise DataError(f"config line {line_no}: expected key=value, got {raw!r}")
        out[key.strip()] = _coerce(value.strip())
    return out


def _load_config(args) -> dict:
    if not args.config:
        return {}
    try:
        with open(args.config, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read config {args.config}: {exc}") from exc


class _Settings:
    """CLI > config > default resolution for one invocation."""

    def __init__(self, args, config):
        self.args = args
        self.config = config

    def get(self, key, default, cast=None):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.config.get(key, default)
        if cast is not None and value is not None:
            value = cast(value)
        return value


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    raise DataError(f"expected a boolean (true/false), got {value!r}")


def _as_int_tuple(value):
    if isinstance(value, int):
        return (value,)
    if isinstance(value, (tuple, list)):
        return tuple(int(v) for v in value)
    return tuple(int(part) for part in str(value).split(",") if part.strip())


def _as_float_tuple(value):
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, (tuple, list)):
        return tuple(float(v) for v in value)
    return tuple(float(part) for part in str(value).split(",") if part.strip())


def write_targets_csv(path, y) -> None:
    """Two columns, time and event; exact float round trip."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "event"])
    for row in y:
        w.writerow([repr(float(row["time"])), int(row["event"])])
    atomic_write_text(path, buf.getvalue())


def read_targets_csv(path) -> np.ndarray:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read targets {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty targets CSV") from None
        if header != ["time", "event"]:
            raise DataError(f"{path}: expected header time,event, got {header}")
        rows = [row for row in reader if row]
    times = [float(r[0]) for r in rows]
    events = [int(r[1]) for r in rows]
    return make_survival_target(times, events)


def _read_records(path):
    rows = parse_case_rows(path)
    return rows_to_records(rows), rows


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_ingest(args, settings):
    config = IngestConfig(
        input_path=args.input,
        broadsplit_path=settings.get("broadsplit_path", None),
        year_min=settings.get("year_min", 2000, int),
        year_max=settings.get("year_max", 2016, int),
        min_recipient_age=settings.get("min_recipient_age", 18.0, float),
        max_peak_pra=settings.get("max_peak_pra", 80.0, float),
        deceased_only=_as_bool(settings.get("deceased_only", True)),
        first_transplant_only=_as_bool(settings.get("first_transplant_only", True)),
    )
    records, rows, log = ingest(config)
    write_case_rows(args.output, rows)
    if args.attrition:
        atomic_write_text(args.attrition, log.to_csv_text())
    for line in log.lines():
        print(line)
    print(f"wrote {len(records)} records to {args.output}")
    return 0


def _cmd_synth(args, settings):
    config = SynthConfig(
        n_records=settings.get("n_records", 1000, int),
        seed=settings.get("seed", 0, int),
        mm_log_hazard=settings.get("mm_log_hazard", 0.15, float),
        baseline_shape=settings.get("baseline_shape", 1.1, float),
        baseline_scale=settings.get("baseline_scale", 4000.0, float),
        censor_rate=settings.get("censor_rate", 0.6, float),
        cit_missing_rate=settings.get("cit_missing_rate", 0.05, float),
    )
    rows = synthesize(config)
    write_case_rows(args.output, rows)
    print(f"wrote {len(rows)} synthetic rows to {args.output}")
    return 0


def _table_from(settings):
    path = settings.get("broadsplit_path", None)
    return None if path is None else load_broad_split_table(path)


def _encoder_from(args, settings) -> TransplantFeatureEncoder:
    return TransplantFeatureEncoder(
        feature_set=args.feature_set,
        include_post_transplant=_as_bool(settings.get("post", False)),
        target_mode=settings.get("target_mode", REGRESSION),
        horizon_years=settings.get("horizon_years", 5.0, float),
        min_pair_count=settings.get("min_pair_count", 1000, int),
        table=_table_from(settings),
    )


def _cmd_encode(args, settings):
    records, _ = _read_records(args.input)
    encoder = _encoder_from(args, settings)
    matrix = encoder.fit(records).transform(records)
    matrix.to_csv(args.output)
    if args.targets_out:
        write_targets_csv(args.targets_out, targets_of(records))
    print(f"wrote {matrix.n_rows} x {matrix.n_cols} feature matrix to {args.output}")
    return 0


_TRAIN_PARAMS = {
    "coxnet": ("alpha", "l1_ratio", "max_iter", "tol"),
    "rsf": ("n_trees", "max_depth", "min_leaf_events"),
    "gb": ("n_trees", "max_depth", "learning_rate", "subsample"),
}

_MODEL_CLASSES = {
    "coxnet": CoxnetSurvival,
    "rsf": RandomSurvivalForest,
    "gb": GradientBoostedSurvival,
}


def _cmd_train(args, settings):
    matrix = FeatureMatrix.from_csv(args.features)
    y = read_targets_csv(args.targets)
    kwargs = {}
    for key in _TRAIN_PARAMS[args.model]:
        value = settings.config.get(key)
        if value is not None:
            kwargs[key] = value
    if args.model in ("rsf", "gb"):
        kwargs["seed"] = settings.get("seed", 0, int)
    model = _MODEL_CLASSES[args.model](**kwargs).fit(matrix, y)
    save_model(model, args.output)
    print(f"trained {args.model} on {matrix.n_rows} rows; saved to {args.output}")
    return 0


def _cmd_eval(args, settings):
    model = load_model(args.model)
    matrix = FeatureMatrix.from_csv(args.features)
    y = read_targets_csv(args.targets)
    risk = model.predict(matrix)
    lines = [f"c_index={concordance_index(y, risk).value:.6g}"]
    if args.train_targets:
        y_train = read_targets_csv(args.train_targets)
        lines.append(f"mean_auc={mean_dynamic_auc(y_train, y, risk).value:.6g}")
    text = "\n".join(lines) + "\n"
    if args.output:
        atomic_write_text(args.output, text)
    print(text, end="")
    return 0


def _experiment_grids(settings) -> dict:
    """Default grids with config-driven size overrides for each model."""
    from graftsurv.models import coxnet_grid

    grids = {}
    rsf_trees = settings.get("rsf_n_trees", 500, int)
    rsf_depths = _as_int_tuple(settings.get("rsf_depths", (5, 10, 15)))
    grids["rsf"] = [{"n_trees": rsf_trees, "max_depth": d} for d in rsf_depths]
    gb_trees = settings.get("gb_n_trees", 500, int)
    gb_depths = _as_int_tuple(settings.get("gb_depths", (1, 2, 3)))
    grids["gb"] = [{"n_trees": gb_trees, "max_depth": d} for d in gb_depths]
    grids["coxnet"] = coxnet_grid(
        alpha_count=settings.get("coxnet_alpha_count", 10, int),
        l1_ratio_count=settings.get("coxnet_l1_ratio_count", 10, int),
    )
    return grids


def _split_csv(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _cmd_experiment(args, settings):
    records, _ = _read_records(args.input)
    feature_sets = _split_csv(settings.get("feature_sets", "basic,mm_total"))
    models = _split_csv(settings.get("models", ",".join(MODEL_NAMES)))
    report = run_experiment(
        records,
        feature_sets=feature_sets,
        models=models,
        n_splits=settings.get("n_splits", 10, int),
        master_seed=settings.get("seed", 0, int),
        include_post=_as_bool(settings.get("post", False)),
        grids=_experiment_grids(settings),
        target_mode=settings.get("target_mode", REGRESSION),
        horizon_years=settings.get("horizon_years", 5.0, float),
        min_pair_count=settings.get("min_pair_count", 1000, int),
        refit_encoder=_as_bool(settings.get("refit_encoder", True)),
        strict=args.strict_resolved,
        audit=_as_bool(settings.get("audit", False)),
        table=_table_from(settings),
    )
    write_report_csv(report, args.output)
    print(f"wrote experiment report ({len(report.detail_rows)} cells) to {args.output}")
    return 0


def _cmd_target_enc_compare(args, settings):
    records, _ = _read_records(args.input)
    grids = {"rsf": _experiment_grids(settings)["rsf"]}
    report = run_target_encoding_comparison(
        records,
        n_splits=settings.get("n_splits", 10, int),
        master_seed=settings.get("seed", 0, int),
        include_post=_as_bool(settings.get("post", False)),
        grids=grids,
        horizons=_as_float_tuple(settings.get("horizons", (1.0, 5.0, 10.0, 15.0, 20.0))),
        min_pair_count=settings.get("min_pair_count", 1000, int),
        refit_encoder=_as_bool(settings.get("refit_encoder", True)),
        strict=args.strict_resolved,
        audit=_as_bool(settings.get("audit", False)),
        table=_table_from(settings),
    )
    write_report_csv(report, args.output)
    print(f"wrote comparison report ({len(report.detail_rows)} cells) to {args.output}")
    return 0


def _cmd_report(args, settings):
    report = read_report_csv(args.input)
    if args.format == "markdown":
        atomic_write_text(args.output, render_markdown(report))
    else:
        atomic_write_text(args.output, report_to_csv_text(report))
    print(f"wrote {args.format} report to {args.output}")
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master random seed")
    common.add_argument("--config", default=None, help="flat key=value config file")
    common.add_argument(
        "--strict",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="abort on any cell failure (default); --no-strict records and continues",
    )

    parser = _Parser(prog="graftsurv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse and filter a cohort CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--attrition", default=None, help="also write the attrition table")
    p.set_defaults(run=_cmd_ingest)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic cohort CSV")
    p.add_argument("--output", required=True)
    p.add_argument("--n", dest="n_records", type=int, default=None)
    p.add_argument("--mm-log-hazard", dest="mm_log_hazard", type=float, default=None)
    p.add_argument("--censor-rate", dest="censor_rate", type=float, default=None)
    p.set_defaults(run=_cmd_synth)

    p = sub.add_parser("encode", parents=[common], help="encode records into features")
    p.add_argument("--input", required=True)
    p.add_argument("--feature-set", required=True, choices=FEATURE_SETS)
    p.add_argument("--output", required=True)
    p.add_argument("--targets-out", default=None, help="also write time/event targets")
    p.add_argument("--post", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--target-mode", choices=(REGRESSION, CLASSIFICATION), default=None)
    p.add_argument("--horizon-years", type=float, default=None)
    p.add_argument("--min-pair-count", type=int, default=None)
    p.set_defaults(run=_cmd_encode)

    p = sub.add_parser("train", parents=[common], help="fit one model on encoded features")
    p.add_argument("--features", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--model", required=True, choices=MODEL_NAMES)
    p.add_argument("--output", required=True)
    p.set_defaults(run=_cmd_train)

    p = sub.add_parser("eval", parents=[common], help="score a saved model on features")
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--features", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument(
        "--train-targets",
        default=None,
        help="training targets; enables the mean dynamic AUC",
    )
    p.add_argument("--output", default=None)
    p.set_defaults(run=_cmd_eval)

    p = sub.add_parser(
        "experiment", parents=[common], help="repeated-split feature-set benchmark"
    )
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--feature-sets", dest="feature_sets", default=None)
    p.add_argument("--models", default=None)
    p.add_argument("--n-splits", dest="n_splits", type=int, default=None)
    p.add_argument("--post", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(run=_cmd_experiment)

    p = sub.add_parser(
        "target-enc-compare",
        parents=[common],
        help="binary vs target type encodings, forest model",
    )
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--n-splits", dest="n_splits", type=int, default=None)
    p.add_argument("--post", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(run=_cmd_target_enc_compare)

    p = sub.add_parser("report", parents=[common], help="re-render a report CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.set_defaults(run=_cmd_report)

    return parser


def _apply_thread_env() -> None:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return
    try:
        n = int(raw)
    except ValueError:
        raise DataError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise DataError(f"{THREADS_ENV} must be >= 1, got {n}")
    try:
        import numba

        numba.set_num_threads(n)
    except ImportError:
        pass


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_thread_env()
        config = _load_config(args)
        settings = _Settings(args, config)
        strict = settings.get("strict", True)
        args.strict_resolved = _as_bool(strict)
        return args.run(args, settings)
    except NumericalError as exc:
        print(f"graftsurv: numerical error: {exc}", file=sys.stderr)
        return 3
    except GraftSurvError as exc:
        print(f"graftsurv: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
