"""Seeded batch evaluation, result tables and the command-line interface."""

from treedrive.harness.evaluation import (
    DEFAULT_SEEDS,
    EvalSummary,
    RandomPolicy,
    SeedRecord,
    evaluate,
    run_seed,
    summarize,
)
from treedrive.harness.reports import (
    ExperimentGrid,
    GridRow,
    grid_report,
    read_records,
    summary_table,
    tree_report,
    write_records,
)

__all__ = [
    "DEFAULT_SEEDS",
    "EvalSummary",
    "ExperimentGrid",
    "GridRow",
    "RandomPolicy",
    "SeedRecord",
    "evaluate",
    "grid_report",
    "read_records",
    "run_seed",
    "summarize",
    "summary_table",
    "tree_report",
    "write_records",
]
