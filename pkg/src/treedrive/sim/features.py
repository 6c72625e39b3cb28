from __future__ import annotations

from treedrive.dsl.namespace import INF, FeatureView
from treedrive.sim.world import Observation, VehicleState


def _bumper_gap(a: VehicleState, b: VehicleState) -> float:
    return max(0.0, abs(b.longitudinal_pos - a.longitudinal_pos) - 0.5 * (a.length + b.length))


def features(obs: Observation, lane_count: int) -> FeatureView:
    """Reduce an observation to the scalar features a policy reads.

    Only the (at most seven) observed neighbors are considered, so a vehicle
    that is present on the road but not observed counts as absent.
    """
    ego = obs.ego
    lane = ego.lane
    # (lane offset, ahead?) -> nearest vehicle
    nearest: dict[tuple[int, bool], VehicleState] = {}
    for v in obs.neighbors:
        offset = v.lane - lane
        if offset not in (-1, 0, 1):
            continue
        key = (offset, v.longitudinal_pos >= ego.longitudinal_pos)
        best = nearest.get(key)
        if best is None or (abs(v.longitudinal_pos - ego.longitudinal_pos), v.id) < (
                abs(best.longitudinal_pos - ego.longitudinal_pos), best.id):
            nearest[key] = v

    def gap(offset: int, ahead: bool) -> float:
        v = nearest.get((offset, ahead))
        return INF if v is None else _bumper_gap(ego, v)

    def rel(offset: int) -> float:
        v = nearest.get((offset, True))
        return 0.0 if v is None else v.speed - ego.speed

    lead = nearest.get((0, True))
    ttc = INF
    if lead is not None:
        closing = ego.speed - lead.speed
        if closing > 0:
            # touching vehicles still get a positive ttc
            ttc = max(_bumper_gap(ego, lead), 1e-6) / closing

    left_exists = lane > 0
    right_exists = lane < lane_count - 1
    return FeatureView(
        ego_speed=ego.speed,
        ego_lane=lane,
        lane_count=lane_count,
        left_exists=left_exists,
        right_exists=right_exists,
        lead_gap=gap(0, True),
        follow_gap=gap(0, False),
        left_lead_gap=gap(-1, True) if left_exists else INF,
        left_follow_gap=gap(-1, False) if left_exists else INF,
        right_lead_gap=gap(1, True) if right_exists else INF,
        right_follow_gap=gap(1, False) if right_exists else INF,
        lead_rel_speed=rel(0),
        left_lead_rel_speed=rel(-1) if left_exists else 0.0,
        right_lead_rel_speed=rel(1) if right_exists else 0.0,
        ttc_lead=ttc,
    )
