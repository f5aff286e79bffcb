import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavloc.core import (PersonState, Scenario, ScenarioError, advance,
                         distance, load_scenario, validate_scenario, vec2,
                         vec3)


def test_default_scenario_is_valid():
    sc = Scenario()
    assert sc.area_length == 1120.0
    assert sc.area_width == 640.0
    assert sc.comm_range > sc.altitude


@pytest.mark.parametrize("kw", [
    {"area_length": -1.0},
    {"comm_range": 90.0},       # below altitude: no ground coverage
    {"uav_count": 0},
    {"slot_duration": 0.0},
    {"eta": 0.0},
    {"e_th": -3.0},
])
def test_bad_scenarios_rejected(kw):
    with pytest.raises((ScenarioError, ValueError)):
        Scenario(**kw)


def test_validate_scenario_rejects_unknown_keys():
    with pytest.raises(ScenarioError, match="unknown"):
        validate_scenario({"area_length": 500.0, "typo_key": 1})


def test_validate_scenario_fills_defaults():
    sc = validate_scenario({"altitude": 80.0})
    assert sc.altitude == 80.0
    assert sc.comm_range == Scenario().comm_range


def test_load_scenario_roundtrip(tmp_path):
    path = tmp_path / "sc.json"
    path.write_text(json.dumps({"seed": 5, "uav_count": 2}))
    sc = load_scenario(path)
    assert sc.seed == 5 and sc.uav_count == 2
    with pytest.raises(ScenarioError):
        path.write_text("{not json")
        load_scenario(path)


def test_distance_oracle():
    # sqrt(3^2 + 4^2 + 100^2)
    assert distance(vec3(3, 4, 100), vec3(0, 0, 0)) == pytest.approx(
        100.12492197250393, abs=1e-12)
    assert distance(vec3(0, 0, 100), vec3(0, 0, 0)) == 100.0
    q = vec3(7.0, -2.0, 50.0)
    assert distance(q, q) == 0.0


@given(st.lists(st.floats(-500, 500), min_size=6, max_size=6))
def test_distance_symmetry(coords):
    a = vec3(*coords[:3])
    b = vec3(*coords[3:])
    assert distance(a, b) == distance(b, a)


def test_advance_straight_line():
    s = PersonState(position=vec2(10.0, 20.0), velocity=vec2(1.0, -2.0))
    out = advance(s, 2.0)
    assert np.allclose(out.position, [12.0, 16.0])
    assert np.allclose(out.velocity, [1.0, -2.0])


def test_advance_is_additive_away_from_walls():
    s = PersonState(position=vec2(50.0, 50.0), velocity=vec2(1.5, 0.5))
    one = advance(advance(s, 3.0), 4.0)
    two = advance(s, 7.0)
    assert np.allclose(one.position, two.position)


def test_advance_reflects_at_boundary():
    s = PersonState(position=vec2(1.0, 1.0), velocity=vec2(-2.0, 0.0))
    out = advance(s, 1.0, bounds=vec2(10.0, 10.0))
    assert np.allclose(out.position, [1.0, 1.0])
    assert np.allclose(out.velocity, [2.0, 0.0])


@given(st.floats(0, 10), st.floats(0, 10), st.floats(-1, 1), st.floats(-1, 1),
       st.floats(0.01, 5))
def test_advance_stays_in_bounds(x, y, vx, vy, dt):
    # displacement < box size, so at most one wall crossing per axis
    s = PersonState(position=vec2(x, y), velocity=vec2(vx, vy))
    out = advance(s, dt, bounds=vec2(10.0, 10.0))
    assert 0.0 <= out.position[0] <= 10.0
    assert 0.0 <= out.position[1] <= 10.0
    # reflection preserves speed
    assert np.hypot(*out.velocity) == pytest.approx(np.hypot(vx, vy), rel=1e-9)
