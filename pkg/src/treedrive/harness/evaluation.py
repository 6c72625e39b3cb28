"""Batch evaluation over seeds. Every aggregate is computed from per-seed records."""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from treedrive.actions import Action
from treedrive.dsl.namespace import FeatureView
from treedrive.sim.config import ScenarioConfig
from treedrive.sim.episode import EpisodeResult, Policy, run_episode
from treedrive.sim.world import new_world

DEFAULT_SEEDS = tuple(range(20))

# Field order of the line-delimited per-seed records.
RECORD_FIELDS = ("label", "lane_count", "density", "seed", "survival_time", "collided",
                 "collided_with", "decisions", "trajectory_hash", "latencies_ns")


@dataclass(frozen=True)
class SeedRecord:
    label: str
    lane_count: int
    density: float
    seed: int
    survival_time: float
    collided: bool
    collided_with: int | None
    decisions: int
    trajectory_hash: str
    latencies_ns: tuple[int, ...]

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps({k: d[k] for k in RECORD_FIELDS})

    @classmethod
    def from_json(cls, line: str) -> "SeedRecord":
        d = json.loads(line)
        d["latencies_ns"] = tuple(d["latencies_ns"])
        return cls(**d)


@dataclass(frozen=True)
class EvalSummary:
    scenario: tuple[int, float]  # (lane_count, density)
    n_seeds: int
    mean_driving_time: float
    per_seed_times: tuple[float, ...]
    mean_decision_latency: float  # s/command
    median_decision_latency: float
    p99_decision_latency: float
    collision_rate: float
    records: tuple[SeedRecord, ...] = field(default=(), compare=False, repr=False)


class RandomPolicy:
    """Uniformly random action each decision, from its own seeded stream."""

    def __init__(self, seed: int = 0):
        self._rng = random.Random(seed)
        self._actions = tuple(Action)

    def __call__(self, fv: FeatureView) -> Action:
        return self._rng.choice(self._actions)


def run_seed(policy: Policy, scenario: ScenarioConfig, label: str = ""
             ) -> tuple[SeedRecord, EpisodeResult]:
    """One episode on ``scenario`` (its ``seed`` selects the traffic)."""
    ep = run_episode(new_world(scenario), policy)
    rec = SeedRecord(label, scenario.lane_count, scenario.density, scenario.seed,
                     ep.survival_time, ep.collided, ep.collided_with, ep.decision_count,
                     ep.trajectory_hash, ep.latencies_ns)
    return rec, ep


def summarize(records: Sequence[SeedRecord]) -> EvalSummary:
    if not records:
        raise ValueError("no records to summarize")
    times = tuple(r.survival_time for r in records)
    samples = np.fromiter((ns for r in records for ns in r.latencies_ns), dtype=np.float64)
    samples *= 1e-9
    if samples.size:
        mean_lat = float(samples.mean())
        median_lat = float(np.median(samples))
        p99_lat = float(np.percentile(samples, 99))
    else:
        mean_lat = median_lat = p99_lat = 0.0
    first = records[0]
    return EvalSummary(
        scenario=(first.lane_count, first.density),
        n_seeds=len(records),
        mean_driving_time=statistics.fmean(times),
        per_seed_times=times,
        mean_decision_latency=mean_lat,
        median_decision_latency=median_lat,
        p99_decision_latency=p99_lat,
        collision_rate=sum(r.collided for r in records) / len(records),
        records=tuple(records),
    )


def evaluate(policy: Policy | type[RandomPolicy], scenario: ScenarioConfig,
             seeds: Iterable[int] = DEFAULT_SEEDS, label: str = "") -> EvalSummary:
    """One episode per seed; latency covers the policy call only.

    Passing the :class:`RandomPolicy` class (not an instance) gives each seed
    its own random stream seeded with that seed.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    records = []
    for s in seeds:
        p = policy(s) if policy is RandomPolicy else policy
        rec, _ = run_seed(p, replace(scenario, seed=s), label)
        records.append(rec)
    return summarize(records)
