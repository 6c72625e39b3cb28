"""Deterministic kinematic multi-lane highway.

The ego vehicle drives at one of five constant speed levels, changes lane
within a single 1 s decision interval, and is collision-checked at every
sub-step. Surrounding vehicles follow the Intelligent Driver Model in their
own lane and never change lanes.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable

from treedrive.actions import SPEED_LEVELS, Action
from treedrive.sim.config import ScenarioConfig

DECISION_PERIOD = 1.0  # s
VEHICLE_LENGTH = 5.0  # m
VEHICLE_WIDTH = 2.0  # m
EGO_INITIAL_SPEED = 25.0
MAX_NEIGHBORS = 7

# spawning
SPAWN_SPACING = 100.0  # m of lane per unit density per vehicle
MIN_SPAWN_GAP = 10.0  # m, bumper to bumper
SPAWN_BEHIND_FRACTION = 0.25  # share of road_length placed behind the ego
NPC_SPEED_RANGE = (18.0, 28.0)

# IDM parameters for surrounding vehicles
IDM_TIME_HEADWAY = 1.5  # s
IDM_MAX_ACCEL = 3.0  # m/s2
IDM_COMFORT_DECEL = 2.0  # m/s2
IDM_JAM_DISTANCE = 2.0  # m
IDM_DELTA = 4.0
IDM_MAX_BRAKE = 9.0  # m/s2, physical braking limit

# Penetration below this is treated as touching, not overlapping. Keeps
# exact-contact cases (gap closes to 0 at a sub-step) from flipping on rounding.
CONTACT_EPS = 1e-9


class SimulationError(RuntimeError):
    """Misuse of a world, such as stepping after the episode ended."""


@dataclass(frozen=True)
class VehicleState:
    id: int
    lane: int
    longitudinal_pos: float
    speed: float
    length: float = VEHICLE_LENGTH
    width: float = VEHICLE_WIDTH
    is_ego: bool = False


@dataclass(frozen=True)
class Observation:
    ego: VehicleState
    neighbors: tuple[VehicleState, ...]
    timestamp: float


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    collided: bool
    collided_with: int | None
    elapsed: float
    done: bool


class _Vehicle:
    __slots__ = ("id", "lane", "x", "speed", "length", "width", "is_ego", "desired_speed")

    def __init__(self, id, lane, x, speed, desired_speed=None, length=VEHICLE_LENGTH,
                 width=VEHICLE_WIDTH, is_ego=False):
        self.id = id
        self.lane = lane
        self.x = float(x)
        self.speed = float(speed)
        self.desired_speed = float(speed if desired_speed is None else desired_speed)
        self.length = length
        self.width = width
        self.is_ego = is_ego

    def state(self) -> VehicleState:
        return VehicleState(self.id, self.lane, self.x, self.speed, self.length, self.width,
                            self.is_ego)


def overlaps(a_lanes: Iterable[int], a_x: float, a_len: float,
             b_lanes: Iterable[int], b_x: float, b_len: float) -> bool:
    """Rectangle overlap of two vehicles: a shared lane and longitudinal penetration."""
    if not set(a_lanes) & set(b_lanes):
        return False
    return abs(a_x - b_x) < 0.5 * (a_len + b_len) - CONTACT_EPS


def idm_accel(speed: float, desired: float, gap: float | None, lead_speed: float) -> float:
    if desired <= 0:
        free = -IDM_MAX_ACCEL if speed > 0 else 0.0
    else:
        free = 1.0 - (speed / desired) ** IDM_DELTA
    interaction = 0.0
    if gap is not None:
        s_star = IDM_JAM_DISTANCE + max(
            0.0,
            speed * IDM_TIME_HEADWAY
            + speed * (speed - lead_speed) / (2.0 * math.sqrt(IDM_MAX_ACCEL * IDM_COMFORT_DECEL)))
        interaction = (s_star / max(gap, 1e-3)) ** 2
    return max(-IDM_MAX_BRAKE, IDM_MAX_ACCEL * (free - interaction))


class World:
    """Mutable simulator state. Single owner; distinct worlds are independent."""

    def __init__(self, config: ScenarioConfig, ego: _Vehicle, others: list[_Vehicle]):
        self.config = config
        self.ego = ego
        self.others = others
        self.speed_index = _speed_index(ego.speed)
        self.elapsed = 0.0
        self.decisions = 0
        self.collided_with: int | None = None
        self.done = False
        # lane the ego is moving into during the current interval, if any
        self.target_lane = ego.lane

    @classmethod
    def from_vehicles(cls, config: ScenarioConfig, ego_lane: int, ego_x: float,
                      ego_speed: float, others: Iterable[tuple]) -> "World":
        """Build a hand-placed scenario.

        ``others`` holds ``(lane, x, speed)`` or ``(lane, x, speed, desired_speed)``
        tuples; ids are assigned 1, 2, ... in order. Without a desired speed a
        vehicle keeps its speed on a free road.
        """
        if ego_speed not in SPEED_LEVELS:
            raise ValueError(f"ego speed must be one of {SPEED_LEVELS}, got {ego_speed}")
        ego = _Vehicle(0, ego_lane, ego_x, ego_speed, is_ego=True)
        vehicles = []
        for k, spec in enumerate(others, start=1):
            lane, x, speed, *rest = spec
            if not 0 <= lane < config.lane_count:
                raise ValueError(f"vehicle {k}: lane {lane} outside 0..{config.lane_count - 1}")
            vehicles.append(_Vehicle(k, lane, x, speed, rest[0] if rest else None))
        if not 0 <= ego_lane < config.lane_count:
            raise ValueError(f"ego lane {ego_lane} outside 0..{config.lane_count - 1}")
        return cls(config, ego, vehicles)

    # -- queries ---------------------------------------------------------

    def vehicles(self) -> list[VehicleState]:
        return [self.ego.state()] + [v.state() for v in self.others]

    def observe(self) -> Observation:
        ex = self.ego.x
        nearest = sorted(self.others, key=lambda v: (abs(v.x - ex), v.id))[:MAX_NEIGHBORS]
        return Observation(self.ego.state(), tuple(v.state() for v in nearest), self.elapsed)

    # -- dynamics ----------------------------------------------------------

    def step(self, action: Action) -> StepResult:
        if self.done:
            raise SimulationError("step() called on a finished episode")
        action = Action(action)
        cfg = self.config
        ego = self.ego

        if action is Action.FASTER:
            self.speed_index = min(self.speed_index + 1, len(SPEED_LEVELS) - 1)
        elif action is Action.SLOWER:
            self.speed_index = max(self.speed_index - 1, 0)
        ego.speed = SPEED_LEVELS[self.speed_index]

        src = ego.lane
        tgt = src
        if action is Action.LANE_LEFT:
            tgt = max(src - 1, 0)
        elif action is Action.LANE_RIGHT:
            tgt = min(src + 1, cfg.lane_count - 1)
        self.target_lane = tgt

        n = cfg.substeps_per_decision
        dt = DECISION_PERIOD / n
        x0 = ego.x
        hit = None
        for k in range(1, n + 1):
            ego_lanes = (src, tgt) if k < n else (tgt,)
            # IDM sees the ego in every lane it occupies during this sub-step
            accels = self._npc_accels((src, tgt))
            ego.x = x0 + ego.speed * (k * dt)
            for v, a in zip(self.others, accels):
                v_new = max(0.0, v.speed + a * dt)
                v.x += 0.5 * (v.speed + v_new) * dt
                v.speed = v_new
            if k == n:
                ego.lane = tgt
            hit = self._first_collision(ego_lanes)
            if hit is not None:
                break

        self.elapsed += DECISION_PERIOD
        self.decisions += 1
        collided = hit is not None
        self.collided_with = hit
        self.done = collided or self.elapsed >= cfg.max_episode_time - 1e-9
        return StepResult(self.observe(), collided, hit, self.elapsed, self.done)

    def _npc_accels(self, ego_lanes: tuple[int, ...]) -> list[float]:
        by_lane: dict[int, list[_Vehicle]] = {}
        for v in self.others:
            by_lane.setdefault(v.lane, []).append(v)
        for lane in set(ego_lanes):
            by_lane.setdefault(lane, []).append(self.ego)
        leader: dict[int, _Vehicle] = {}
        for lane_vehicles in by_lane.values():
            lane_vehicles.sort(key=lambda v: (v.x, v.id))
            for behind, ahead in zip(lane_vehicles, lane_vehicles[1:]):
                leader[behind.id] = ahead
        out = []
        for v in self.others:
            lead = leader.get(v.id)
            if lead is None:
                out.append(idm_accel(v.speed, v.desired_speed, None, 0.0))
            else:
                gap = lead.x - v.x - 0.5 * (lead.length + v.length)
                out.append(idm_accel(v.speed, v.desired_speed, gap, lead.speed))
        return out

    def _first_collision(self, ego_lanes: tuple[int, ...]) -> int | None:
        ego = self.ego
        hits = [v.id for v in self.others
                if overlaps(ego_lanes, ego.x, ego.length, (v.lane,), v.x, v.length)]
        return min(hits) if hits else None


def _speed_index(speed: float) -> int:
    return min(range(len(SPEED_LEVELS)), key=lambda i: abs(SPEED_LEVELS[i] - speed))


def spawn_count_per_lane(config: ScenarioConfig) -> int:
    """Vehicles per lane at spawn: round(density * road_length / 100), capped so
    consecutive vehicles can keep the minimum spawn gap."""
    expected = config.density * config.road_length / SPAWN_SPACING
    cap = math.floor(config.road_length / (VEHICLE_LENGTH + MIN_SPAWN_GAP))
    return min(math.floor(expected + 0.5), cap)


def new_world(config: ScenarioConfig) -> World:
    """Spawn a seeded scenario; identical configs give identical worlds.

    Each lane gets a grid of evenly spaced slots over ``[-road_length/4,
    3*road_length/4)`` with a random phase and bounded per-vehicle jitter. In the
    ego lane the grid is aligned so one slot sits at x=0 and belongs to the ego.
    """
    rng = random.Random(config.seed)
    ego_lane = config.lane_count // 2
    ego = _Vehicle(0, ego_lane, 0.0, EGO_INITIAL_SPEED, is_ego=True)
    n = spawn_count_per_lane(config)
    others: list[_Vehicle] = []
    if n > 0:
        spacing = config.road_length / n
        jitter = max(0.0, min(0.25 * spacing, 0.5 * (spacing - VEHICLE_LENGTH - MIN_SPAWN_GAP)))
        x_lo = -SPAWN_BEHIND_FRACTION * config.road_length
        next_id = 1
        for lane in range(config.lane_count):
            if lane == ego_lane:
                phase = (-x_lo) % spacing
            else:
                phase = rng.uniform(0.0, spacing)
            for k in range(n):
                x = x_lo + phase + k * spacing
                if lane == ego_lane and abs(x) < 0.5 * spacing:
                    continue  # the ego's slot
                x += rng.uniform(-jitter, jitter)
                desired = rng.uniform(*NPC_SPEED_RANGE)
                others.append(_Vehicle(next_id, lane, x, desired, desired))
                next_id += 1
    return World(config, ego, others)


def step(world: World, action: Action) -> StepResult:
    return world.step(action)


def observe(world: World) -> Observation:
    return world.observe()
