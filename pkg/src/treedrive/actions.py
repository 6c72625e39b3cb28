"""The discrete action vocabulary shared by the simulator and the policy language."""

from __future__ import annotations

import enum

# Ego target speeds in m/s. FASTER/SLOWER move one level and saturate.
SPEED_LEVELS: tuple[float, ...] = (20.0, 25.0, 30.0, 35.0, 40.0)


class Action(enum.IntEnum):
    LANE_LEFT = 0
    IDLE = 1
    LANE_RIGHT = 2
    FASTER = 3
    SLOWER = 4


ACTION_NAMES: frozenset[str] = frozenset(a.name for a in Action)
