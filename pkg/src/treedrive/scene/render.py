"""Natural-language rendering of scenarios and collision traces for prompts.

All output is a pure function of the inputs: no clock, no randomness.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from string import Template
from typing import Sequence

from treedrive.actions import SPEED_LEVELS, Action
from treedrive.sim.config import ScenarioConfig
from treedrive.sim.episode import EgoRecord, StepRecord, TrajectoryRecorder
from treedrive.sim.world import SPAWN_SPACING, VEHICLE_LENGTH
from treedrive.templating import load_sections

DEFAULT_REPORT_STEPS = 10
REPORT_RADIUS = 60.0  # m; vehicles this close to the ego at any reported step are listed

DEFAULT_RULES = (
    "Keep a safe distance to the vehicle in front; at least the distance covered in two seconds.",
    "Overtake on the left where possible and return to a free lane on the right afterwards.",
    "Only change lanes when the target lane has a clear gap both ahead and behind.",
    "Never cut in closely in front of a faster vehicle.",
    "Avoid needless speed changes and lane changes.",
)

STYLES = ("conservative", "aggressive", "custom")


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[str, ...] = DEFAULT_RULES


@dataclass(frozen=True)
class DrivingTarget:
    style: str = "conservative"
    description: str = ""

    def __post_init__(self):
        if self.style not in STYLES:
            raise SceneError(f"unknown driving style {self.style!r}; expected one of {STYLES}")
        if self.style == "custom" and not self.description.strip():
            raise SceneError("a custom driving target needs a description")

    def text(self) -> str:
        if self.description:
            return self.description
        return _section(f"target.{self.style}").strip()


def _section(name: str) -> str:
    return load_sections("treedrive.scene", "templates.txt")[name]


def _fmt(value: float) -> str:
    return f"{value:.1f}"


def render_scenario(config: ScenarioConfig, rules: RuleSet, target: DrivingTarget,
                    training: bool = True) -> str:
    if training and not rules.rules:
        raise SceneError("training requires at least one driving rule")
    actions = "\n".join(_section(f"action.{a.name}") for a in
                        (Action.IDLE, Action.SLOWER, Action.FASTER, Action.LANE_LEFT,
                         Action.LANE_RIGHT))
    rule_text = "\n".join(f"{k}. {r}" for k, r in enumerate(rules.rules, start=1)) or "(none)"
    return Template(_section("scenario")).substitute(
        lane_count=config.lane_count,
        lane_width=_fmt(config.lane_width),
        last_lane=config.lane_count - 1,
        ego_lane=config.lane_count // 2,
        density=f"{config.density:.2f}",
        per_km=f"{config.density * 1000.0 / SPAWN_SPACING:g}",
        vehicle_length=_fmt(VEHICLE_LENGTH),
        max_time=f"{config.max_episode_time:g}",
        speed_levels=", ".join(f"{s:g}" for s in SPEED_LEVELS),
        actions=actions,
        rules=rule_text,
        style=target.style,
        target=target.text(),
    ) + "\n"


@dataclass(frozen=True)
class ReportStep:
    time: float
    ego: EgoRecord
    neighbors: tuple[tuple[int, int, float, float], ...]  # (id, lane, x, speed)


@dataclass(frozen=True)
class CollisionReport:
    steps: tuple[ReportStep, ...]
    collided_with: int
    narrative: str = field(compare=False)

    def to_lines(self) -> list[str]:
        """Structured form, one JSON record per step."""
        return [json.dumps({"collided_with": self.collided_with, **asdict(s)}) for s in self.steps]


def _where(offset: int) -> str:
    if offset == 0:
        return "in the same lane"
    side = "left" if offset < 0 else "right"
    n = abs(offset)
    return f"{n} lane{'s' if n > 1 else ''} to the {side}"


def render_collision_report(trace: TrajectoryRecorder | Sequence[StepRecord],
                            T: int = DEFAULT_REPORT_STEPS) -> CollisionReport:
    """Summarize the last ``T`` decision steps of a collided episode."""
    if T < 1:
        raise SceneError(f"T must be >= 1, got {T}")
    records = list(trace.records if isinstance(trace, TrajectoryRecorder) else trace)
    if not records or records[-1].collided_with is None:
        raise SceneError("collision report requested for an episode that did not collide")
    records = records[-T:]
    partner = records[-1].collided_with

    shown: set[int] = {partner}
    for rec in records:
        for vid, _lane, x, _speed in rec.vehicles:
            if abs(x - rec.ego.x) <= REPORT_RADIUS:
                shown.add(vid)

    steps = tuple(ReportStep(rec.time, rec.ego,
                             tuple(v for v in rec.vehicles if v[0] in shown))
                  for rec in records)

    lines = [Template(_section("report.header")).substitute(
        collided_with=partner, collision_time=f"{steps[-1].time:g}", step_count=len(steps))]
    step_t = Template(_section("report.step"))
    vehicle_t = Template(_section("report.vehicle"))
    for s in steps:
        ego = s.ego
        transit = f" (moving to lane {ego.target_lane})" if ego.target_lane != ego.lane else ""
        lines.append(step_t.substitute(time=f"{s.time:g}", lane=ego.lane, transit=transit,
                                       x=_fmt(ego.x), speed=_fmt(ego.speed), action=ego.action))
        for vid, lane, x, speed in sorted(s.neighbors, key=lambda v: (abs(v[2] - ego.x), v[0])):
            dx = x - ego.x
            direction = "ahead" if dx > 0 else "behind" if dx < 0 else "alongside"
            lines.append(vehicle_t.substitute(id=vid, distance=_fmt(abs(dx)), direction=direction,
                                              where=_where(lane - ego.lane), speed=_fmt(speed)))
    lines.append(Template(_section("report.footer")).substitute(collided_with=partner))
    return CollisionReport(steps, partner, "\n".join(lines) + "\n")
