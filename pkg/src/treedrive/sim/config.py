"""Scenario configuration and the flat ``key = value`` config file format."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping


class ConfigError(ValueError):
    """An invalid configuration value; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ScenarioConfig:
    """A multi-lane straight highway scenario.

    Attributes
    ----------
    lane_count : int
        number of lanes, lane 0 is the leftmost (>= 2)
    lane_width : float
        lane width in m
    density : float
        traffic density scale; each lane holds about ``density * road_length / 100``
        vehicles at spawn
    road_length : float
        length in m of the spawn window around the ego vehicle
    max_episode_time : float
        episode cap in s
    seed : int
        64-bit unsigned seed for all randomness in the scenario
    substeps_per_decision : int
        integration sub-steps per 1 s decision interval
    """

    lane_count: int = 4
    lane_width: float = 4.0
    density: float = 1.0
    road_length: float = 1000.0
    max_episode_time: float = 30.0
    seed: int = 0
    substeps_per_decision: int = 10

    def __post_init__(self):
        if not isinstance(self.lane_count, int) or self.lane_count < 2:
            raise ConfigError("lane_count", f"must be an integer >= 2, got {self.lane_count!r}")
        if not self.lane_width > 0:
            raise ConfigError("lane_width", f"must be > 0, got {self.lane_width!r}")
        if not self.density > 0:
            raise ConfigError("density", f"must be > 0, got {self.density!r}")
        if not self.road_length > 0:
            raise ConfigError("road_length", f"must be > 0, got {self.road_length!r}")
        if not self.max_episode_time > 0:
            raise ConfigError("max_episode_time", f"must be > 0, got {self.max_episode_time!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.substeps_per_decision, int) or self.substeps_per_decision < 1:
            raise ConfigError("substeps_per_decision",
                              f"must be an integer >= 1, got {self.substeps_per_decision!r}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ScenarioConfig":
        """Build from string or native values; keys that are not scenario fields are ignored."""
        kwargs = {}
        for f in fields(cls):
            if f.name not in values:
                continue
            raw = values[f.name]
            conv = int if f.type in ("int", int) else float
            try:
                kwargs[f.name] = conv(raw)
            except (TypeError, ValueError):
                raise ConfigError(f.name, f"cannot read {raw!r} as {conv.__name__}") from None
        return cls(**kwargs)

    def to_mapping(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


SCENARIO_KEYS = frozenset(f.name for f in fields(ScenarioConfig))


def read_flat_config(path: str | Path) -> dict[str, str]:
    """Read a sectionless ``key = value`` file (``#`` comments allowed)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string("[_]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(path), str(exc)) from None
    return dict(parser["_"])


def load_scenario(path: str | Path) -> ScenarioConfig:
    values = read_flat_config(path)
    unknown = set(values) - SCENARIO_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown scenario key")
    return ScenarioConfig.from_mapping(values)
