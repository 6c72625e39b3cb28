"""Plain-text result tables and the per-seed record files behind them."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from treedrive.dsl import PolicyTree, metrics
from treedrive.harness.evaluation import (
    DEFAULT_SEEDS,
    EvalSummary,
    SeedRecord,
    evaluate,
    summarize,
)
from treedrive.sim.config import ScenarioConfig
from treedrive.sim.episode import Policy

NON_COMPARABLE_NOTE = (
    "# Results come from this package's own kinematic simulator with IDM traffic. They are\n"
    "# formatted like published highway benchmarks but are not numerically comparable to them.\n"
)


@dataclass(frozen=True)
class GridRow:
    lane_count: int
    density: float
    label: str


@dataclass(frozen=True)
class ExperimentGrid:
    rows: tuple[GridRow, ...] = (
        GridRow(4, 2.00, "Normal"),
        GridRow(5, 2.50, "Hard"),
        GridRow(6, 3.00, "Extreme"),
    )

    def __post_init__(self):
        labels = [r.label for r in self.rows]
        if len(set(labels)) != len(labels):
            raise ValueError(f"grid labels must be unique, got {labels}")
        if not self.rows:
            raise ValueError("grid needs at least one row")


def format_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    rows = [list(map(str, r)) for r in rows]
    widths = [max(len(h), *(len(r[k]) for r in rows)) if rows else len(h)
              for k, h in enumerate(header)]

    def line(cells):
        padded = [c.ljust(w) if k == 0 else c.rjust(w)
                  for k, (c, w) in enumerate(zip(cells, widths))]
        return "  ".join(padded).rstrip()

    out = [line(header), "  ".join("-" * w for w in widths)]
    out.extend(line(r) for r in rows)
    return "\n".join(out) + "\n"


def write_records(records: Iterable[SeedRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_records(path: str | Path) -> list[SeedRecord]:
    with open(path, encoding="utf-8") as fh:
        return [SeedRecord.from_json(line) for line in fh if line.strip()]


def summary_table(summaries: Sequence[tuple[str, EvalSummary]]) -> str:
    rows = []
    for label, s in summaries:
        lanes, density = s.scenario
        rows.append([label, lanes, f"{density:.2f}", s.n_seeds, f"{s.mean_driving_time:.2f}",
                     f"{s.median_decision_latency:.2e}", f"{s.p99_decision_latency:.2e}",
                     f"{s.collision_rate:.2f}"])
    header = ["Scenario", "Lanes", "Density", "Seeds", "Average Driving Time (s)",
              "Control Efficiency (s/command, median)", "p99 (s/command)", "Collision Rate"]
    return format_table(header, rows)


def grid_report(policy: Policy, grid: ExperimentGrid = ExperimentGrid(),
                seeds: Iterable[int] = DEFAULT_SEEDS,
                base: ScenarioConfig = ScenarioConfig(),
                records_path: str | Path | None = None) -> tuple[str, list[SeedRecord]]:
    """Evaluate ``policy`` on every grid row; table means are recomputed from the records."""
    seeds = list(seeds)
    records: list[SeedRecord] = []
    for row in grid.rows:
        scenario = replace(base, lane_count=row.lane_count, density=row.density)
        records.extend(evaluate(policy, scenario, seeds, label=row.label).records)
    if records_path is not None:
        write_records(records, records_path)
    summaries = [(row.label, summarize([r for r in records if r.label == row.label]))
                 for row in grid.rows]
    return NON_COMPARABLE_NOTE + summary_table(summaries), records


def tree_report(policies: Sequence[tuple[str, PolicyTree]]) -> str:
    rows = []
    for label, tree in policies:
        m = metrics(tree)
        rows.append([label, m.node_count, m.branch_count, m.depth])
    return format_table(["Policy", "Number of Nodes", "Number of Branches",
                         "Decision Tree Depth"], rows)
