"""Seeded kinematic highway simulator with discrete ego actions."""

from treedrive.sim.config import ConfigError, ScenarioConfig, load_scenario, read_flat_config
from treedrive.sim.episode import (
    EpisodeResult,
    StepRecord,
    TrajectoryRecorder,
    decision_function,
    run_episode,
)
from treedrive.sim.features import features
from treedrive.sim.world import (
    Observation,
    SimulationError,
    StepResult,
    VehicleState,
    World,
    new_world,
    observe,
    spawn_count_per_lane,
    step,
)

__all__ = [
    "ConfigError",
    "EpisodeResult",
    "Observation",
    "ScenarioConfig",
    "SimulationError",
    "StepRecord",
    "StepResult",
    "TrajectoryRecorder",
    "VehicleState",
    "World",
    "decision_function",
    "features",
    "load_scenario",
    "new_world",
    "observe",
    "read_flat_config",
    "run_episode",
    "spawn_count_per_lane",
    "step",
]
