"""Feature identifiers a policy may read, with their types and units."""

from __future__ import annotations

from dataclasses import dataclass, fields

# Sentinel standing in for "no such vehicle" / "never". Finite so arithmetic stays total.
INF = 1.0e9

NUM = "num"
BOOL = "bool"

# Units are only used for style warnings. "lane" covers lane indices and counts.
METERS = "m"
MPS = "m/s"
SECONDS = "s"
LANES = "lane"


@dataclass(slots=True, frozen=True)
class FeatureView:
    """Scalar features derived from one observation; the only input a policy sees.

    Gaps are bumper-to-bumper distances in meters. Relative speeds are the other
    vehicle's speed minus the ego speed. Absent vehicles give gap ``INF`` and
    relative speed 0.
    """

    ego_speed: float
    ego_lane: int
    lane_count: int
    left_exists: bool
    right_exists: bool
    lead_gap: float = INF
    follow_gap: float = INF
    left_lead_gap: float = INF
    left_follow_gap: float = INF
    right_lead_gap: float = INF
    right_follow_gap: float = INF
    lead_rel_speed: float = 0.0
    left_lead_rel_speed: float = 0.0
    right_lead_rel_speed: float = 0.0
    ttc_lead: float = INF


# name -> (type, unit)
FEATURES: dict[str, tuple[str, str | None]] = {
    "ego_speed": (NUM, MPS),
    "ego_lane": (NUM, LANES),
    "lane_count": (NUM, LANES),
    "left_exists": (BOOL, None),
    "right_exists": (BOOL, None),
    "lead_gap": (NUM, METERS),
    "follow_gap": (NUM, METERS),
    "left_lead_gap": (NUM, METERS),
    "left_follow_gap": (NUM, METERS),
    "right_lead_gap": (NUM, METERS),
    "right_follow_gap": (NUM, METERS),
    "lead_rel_speed": (NUM, MPS),
    "left_lead_rel_speed": (NUM, MPS),
    "right_lead_rel_speed": (NUM, MPS),
    "ttc_lead": (NUM, SECONDS),
}

assert set(FEATURES) == {f.name for f in fields(FeatureView)}

FEATURE_DOCS: dict[str, str] = {
    "ego_speed": "current ego speed level",
    "ego_lane": "ego lane index, 0 is the leftmost lane",
    "lane_count": "number of lanes",
    "left_exists": "true if there is a lane to the left of the ego",
    "right_exists": "true if there is a lane to the right of the ego",
    "lead_gap": "gap to the nearest vehicle ahead in the ego lane",
    "follow_gap": "gap to the nearest vehicle behind in the ego lane",
    "left_lead_gap": "gap to the nearest vehicle ahead in the left lane",
    "left_follow_gap": "gap to the nearest vehicle behind in the left lane",
    "right_lead_gap": "gap to the nearest vehicle ahead in the right lane",
    "right_follow_gap": "gap to the nearest vehicle behind in the right lane",
    "lead_rel_speed": "speed of the vehicle ahead minus ego speed",
    "left_lead_rel_speed": "speed of the vehicle ahead in the left lane minus ego speed",
    "right_lead_rel_speed": "speed of the vehicle ahead in the right lane minus ego speed",
    "ttc_lead": "time until the gap ahead closes at the current speeds",
}

# name -> (min arity, max arity or None); all take and return numbers
FUNCTIONS: dict[str, tuple[int, int | None]] = {
    "min": (2, None),
    "max": (2, None),
    "abs": (1, 1),
}


def safe_div(a: float, b: float) -> float:
    """Division that maps a zero divisor to the signed sentinel instead of raising."""
    if b == 0:
        return INF if a >= 0 else -INF
    return a / b
