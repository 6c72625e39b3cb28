"""Closed-loop episodes: observe -> features -> decide -> step, with recording."""

from __future__ import annotations

import hashlib
import json
import time
from collections import deque
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterator, Union

from treedrive.actions import Action
from treedrive.dsl.ast import PolicyTree
from treedrive.dsl.evaluate import compile_tree
from treedrive.dsl.namespace import FeatureView
from treedrive.sim.features import features
from treedrive.sim.world import StepResult, World

Policy = Union[PolicyTree, Callable[[FeatureView], Action]]


@dataclass(frozen=True)
class EgoRecord:
    lane: int
    target_lane: int
    x: float
    speed: float
    action: str


@dataclass(frozen=True)
class StepRecord:
    """World state right after one decision interval (or at the collision sub-step)."""

    time: float
    ego: EgoRecord
    vehicles: tuple[tuple[int, int, float, float], ...]  # (id, lane, x, speed)
    collided_with: int | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "StepRecord":
        d = json.loads(line)
        return cls(d["time"], EgoRecord(**d["ego"]),
                   tuple(tuple(v) for v in d["vehicles"]), d["collided_with"])


class TrajectoryRecorder:
    """Keeps the last ``capacity`` step records (all if ``None``) and a hash of every step."""

    def __init__(self, capacity: int | None = None):
        self.records: deque[StepRecord] = deque(maxlen=capacity)
        self.count = 0
        self._hash = hashlib.sha256()

    def record(self, world: World, action: Action, result: StepResult) -> StepRecord:
        ego = world.ego
        rec = StepRecord(
            time=result.elapsed,
            ego=EgoRecord(ego.lane, world.target_lane, ego.x, ego.speed, Action(action).name),
            vehicles=tuple((v.id, v.lane, v.x, v.speed) for v in world.others),
            collided_with=result.collided_with,
        )
        self.records.append(rec)
        self.count += 1
        self._hash.update(rec.to_json().encode())
        self._hash.update(b"\n")
        return rec

    def digest(self) -> str:
        return self._hash.hexdigest()

    def last(self, n: int) -> list[StepRecord]:
        if n <= 0:
            return []
        return list(self.records)[-n:]

    def export_lines(self) -> Iterator[str]:
        """One line per vehicle per recorded step: time, id, lane, x, speed, action (ego only)."""
        for rec in self.records:
            yield json.dumps({"time": rec.time, "id": 0, "lane": rec.ego.lane, "x": rec.ego.x,
                              "speed": rec.ego.speed, "action": rec.ego.action})
            for vid, lane, x, speed in rec.vehicles:
                yield json.dumps({"time": rec.time, "id": vid, "lane": lane, "x": x,
                                  "speed": speed, "action": None})

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.export_lines():
                fh.write(line + "\n")


@dataclass(frozen=True)
class EpisodeResult:
    survival_time: float
    decision_count: int
    latencies_ns: tuple[int, ...]
    collided: bool
    collided_with: int | None
    trajectory: tuple[StepRecord, ...]
    trajectory_hash: str


def decision_function(policy: Policy) -> Callable[[FeatureView], Action]:
    if isinstance(policy, PolicyTree):
        return compile_tree(policy)
    if callable(policy):
        return policy
    raise TypeError(f"not a policy: {policy!r}")


def run_episode(world: World, policy: Policy,
                recorder: TrajectoryRecorder | None = None) -> EpisodeResult:
    """Drive ``world`` with ``policy`` until collision or the time cap.

    Latency samples time only the policy call, not feature extraction or stepping.
    """
    decide = decision_function(policy)
    if recorder is None:
        recorder = TrajectoryRecorder()
    lane_count = world.config.lane_count
    clock = time.perf_counter_ns
    latencies: list[int] = []
    obs = world.observe()
    result = None
    while not world.done:
        fv = features(obs, lane_count)
        t0 = clock()
        action = decide(fv)
        latencies.append(clock() - t0)
        result = world.step(action)
        recorder.record(world, action, result)
        obs = result.observation
    collided = bool(result and result.collided)
    return EpisodeResult(
        survival_time=min(world.elapsed, world.config.max_episode_time),
        decision_count=world.decisions,
        latencies_ns=tuple(latencies),
        collided=collided,
        collided_with=result.collided_with if result else None,
        trajectory=tuple(recorder.records),
        trajectory_hash=recorder.digest(),
    )
