"""Cohort ingestion, synthetic data, the experiment harness, and the CLI."""

from graftsurv.pipeline.experiment import (
    ExperimentReport,
    run_experiment,
    run_target_encoding_comparison,
)
from graftsurv.pipeline.ingest import IngestConfig, ingest
from graftsurv.pipeline.report import read_report_csv, render_markdown, write_report_csv
from graftsurv.pipeline.synth import SynthConfig, synthesize, synthesize_records

__all__ = [
    "ExperimentReport",
    "IngestConfig",
    "SynthConfig",
    "ingest",
    "read_report_csv",
    "render_markdown",
    "run_experiment",
    "run_target_encoding_comparison",
    "synthesize",
    "synthesize_records",
    "write_report_csv",
]
