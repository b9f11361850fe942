from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from highwaysim.fleet import (SEDAN, TRUCK, VehicleProfile, from_global_x, front_gap, make_obstacle, make_vehicle,
                              to_global_x)
from highwaysim.highway import Highway, HighwayConfig
from highwaysim.mobility_models import CONSIDERATE


def test_sedan_defaults():
    v = make_vehicle("sedan", 1)
    assert (v.length, v.width) == (4.5, 1.8)
    assert v.model == SEDAN.model and v.lane_change == SEDAN.lane_change
    assert v.velocity == 0.0 and v.acceleration == 0.0 and v.lane is None
    assert v.radio.address == 1


def test_truck_defaults():
    v = make_vehicle(TRUCK, 2)
    assert v.length == 15.0
    assert v.model.desired_velocity < SEDAN.model.desired_velocity


def test_custom_profile_passes_through():
    careful = replace(SEDAN.model, time_headway=2.0)
    profile = VehicleProfile("careful", careful, CONSIDERATE, 4.2, 1.7)
    v = make_vehicle(profile, 3)
    assert v.model is careful and v.kind == "careful" and v.length == 4.2


def test_duplicate_and_invalid_ids():
    with pytest.raises(ValueError):
        make_vehicle("sedan", 4, used_ids={4})
    with pytest.raises(ValueError):
        make_vehicle("sedan", 0)
    with pytest.raises(ValueError):
        make_vehicle("bus", 5)


def test_vehicle_validation():
    v = make_vehicle("sedan", 1)
    with pytest.raises(ValueError):
        type(v)(vehicle_id=2, velocity=-1.0)
    with pytest.raises(ValueError):
        type(v)(vehicle_id=2, direction=2)
    with pytest.raises(ValueError):
        type(v)(vehicle_id=2, length=0.0)


def test_broken_car_obstacle():
    ob = make_obstacle(1, (500.0, 0.0, 0.0), lane=0, direction=1)
    assert ob.is_obstacle and ob.lane == 0 and ob.direction == 1 and ob.x == 500.0
    assert ob.model is None and ob.lane_change is None


def test_airborne_node_without_lane():
    node = make_obstacle(9, (200.0, 0.0, 30.0))
    assert node.lane is None and node.z == 30.0


def test_obstacle_lane_needs_direction():
    with pytest.raises(ValueError):
        make_obstacle(1, (0.0, 0.0, 0.0), lane=0)


def test_obstacle_is_immobile():
    ob = make_obstacle(1, (500.0, 0.0, 0.0), lane=0, direction=1)
    with pytest.raises(ValueError):
        ob.velocity = 3.0
    with pytest.raises(ValueError):
        ob.acceleration = -1.0
    with pytest.raises(ValueError):
        ob.model = SEDAN.model
    ob.velocity = 0.0


def test_obstacle_stays_still_on_highway():
    hw = Highway(HighwayConfig(auto_injection=True, min_gap=10.0))
    hw.add_vehicle(make_obstacle(100, (300.0, 0.0, 0.0), lane=0, direction=1))
    hw.run(60.0)
    ob = hw.find_vehicle(100)
    assert (ob.x, ob.velocity, ob.acceleration) == (300.0, 0.0, 0.0)


def _at(vid, x, length=4.5, direction=1):
    v = make_vehicle("sedan", vid)
    v.x, v.length, v.direction = x, length, direction
    return v


def test_front_gap_examples():
    assert front_gap(_at(1, 0.0), _at(2, 10.0)) == 5.5
    assert front_gap(_at(1, 0.0), _at(2, 4.5)) == 0.0
    assert front_gap(_at(1, 10.0), _at(2, 0.0)) == -14.5


def test_front_gap_mixed_directions():
    with pytest.raises(ValueError):
        front_gap(_at(1, 0.0), _at(2, 10.0, direction=-1))


@given(st.floats(0, 1000), st.floats(0, 1000), st.floats(1, 20))
def test_gap_invariant_under_mirroring(xb, xf, length):
    L = 1000.0
    east = front_gap(_at(1, xb, length), _at(2, xf))
    back_w, front_w = _at(1, xb, length, -1), _at(2, xf, 4.5, -1)
    # mirror through the global frame and back
    back_w.x = from_global_x(L - xb, -1, L)
    front_w.x = from_global_x(L - xf, -1, L)
    assert front_gap(back_w, front_w) == pytest.approx(east, abs=1e-9)


def test_global_frame_conversion():
    v = _at(1, 100.0, direction=-1)
    assert to_global_x(v, 1000.0) == 900.0
    assert from_global_x(900.0, -1, 1000.0) == 100.0
    assert to_global_x(_at(2, 100.0), 1000.0) == 100.0
