import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treedrive.dsl import INF
from treedrive.sim import ScenarioConfig, World, features, new_world
from treedrive.sim.world import VEHICLE_LENGTH

CFG = ScenarioConfig(lane_count=3, density=1e-6)


def fv_for(ego_lane, ego_speed, others, cfg=CFG):
    w = World.from_vehicles(cfg, ego_lane, 0.0, ego_speed, others)
    return features(w.observe(), cfg.lane_count)


def test_empty_road_uses_sentinels():
    fv = fv_for(1, 25.0, [])
    for name in ("lead_gap", "follow_gap", "left_lead_gap", "left_follow_gap",
                 "right_lead_gap", "right_follow_gap", "ttc_lead"):
        assert getattr(fv, name) == INF
    assert fv.lead_rel_speed == fv.left_lead_rel_speed == fv.right_lead_rel_speed == 0.0


def test_ttc_example():
    # lead 30 m ahead bumper to bumper, lead 20, ego 30 -> 30 / 10
    fv = fv_for(1, 30.0, [(1, 30.0 + VEHICLE_LENGTH, 20.0)])
    assert fv.lead_gap == pytest.approx(30.0)
    assert fv.ttc_lead == pytest.approx(3.0)
    assert fv.lead_rel_speed == pytest.approx(-10.0)


def test_ttc_sentinel_when_opening():
    fv = fv_for(1, 20.0, [(1, 40.0, 25.0)])
    assert fv.ttc_lead == INF


def test_neighbor_lanes_and_nearest_choice():
    others = [(0, 50.0, 22.0), (0, 30.0, 21.0), (0, -20.0, 24.0),
              (2, 70.0, 26.0), (2, -40.0, 23.0), (1, -15.0, 25.0)]
    fv = fv_for(1, 25.0, others)
    assert fv.left_lead_gap == pytest.approx(30.0 - VEHICLE_LENGTH)
    assert fv.left_lead_rel_speed == pytest.approx(-4.0)
    assert fv.left_follow_gap == pytest.approx(20.0 - VEHICLE_LENGTH)
    assert fv.right_lead_gap == pytest.approx(70.0 - VEHICLE_LENGTH)
    assert fv.right_follow_gap == pytest.approx(40.0 - VEHICLE_LENGTH)
    assert fv.follow_gap == pytest.approx(15.0 - VEHICLE_LENGTH)
    assert fv.lead_gap == INF


def test_edge_lanes_hide_missing_neighbors():
    fv = fv_for(0, 25.0, [(1, 30.0, 20.0)])
    assert not fv.left_exists and fv.right_exists
    assert fv.left_lead_gap == INF and fv.left_lead_rel_speed == 0.0
    fv = fv_for(2, 25.0, [])
    assert fv.left_exists and not fv.right_exists


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), lanes=st.integers(2, 6), density=st.floats(0.2, 3.0))
def test_feature_invariants(seed, lanes, density):
    cfg = ScenarioConfig(lane_count=lanes, density=density, seed=seed)
    fv = features(new_world(cfg).observe(), lanes)
    for name in ("lead_gap", "follow_gap", "left_lead_gap", "left_follow_gap",
                 "right_lead_gap", "right_follow_gap"):
        assert getattr(fv, name) >= 0
    assert fv.ttc_lead > 0
    assert fv.left_exists == (fv.ego_lane > 0)
    assert fv.right_exists == (fv.ego_lane < lanes - 1)
