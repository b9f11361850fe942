import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from highwaysim.fleet import SEDAN, TRUCK, make_vehicle
from highwaysim.mobility_models import (CONSIDERATE, INCONSIDERATE, LEFT, RIGHT, IdmParams, LocalKinematics,
                                        MobilParams, check_lane_change, equilibrium_gap, idm_accel,
                                        idm_acceleration, idm_desired_gap, mobil_incentive_ok, mobil_safety_ok)

CAR = IdmParams()

# Frozen from an independent scalar evaluation of the IDM/MOBIL formulas.
ACCEL_V20_S100 = 0.980096790123457
EQ_GAP_V20 = 35.722003561692


def test_desired_gap_examples():
    assert idm_desired_gap(CAR, 0.0, 0.0) == CAR.min_gap
    assert idm_desired_gap(CAR, 30.0, 0.0) == pytest.approx(47.0, abs=1e-12)
    assert idm_desired_gap(CAR, 10.0, -10.0) == CAR.min_gap


def test_acceleration_examples():
    assert idm_acceleration(CAR, LocalKinematics(30.0)) == 0.0
    assert idm_acceleration(CAR, LocalKinematics(0.0)) == CAR.max_acceleration
    a = idm_acceleration(CAR, LocalKinematics(20.0, 100.0, 0.0))
    assert a == pytest.approx(ACCEL_V20_S100, abs=1e-12)
    assert a == pytest.approx(1.4 * (1 - (2 / 3) ** 4 - 0.32 ** 2), abs=1e-12)


def test_degenerate_gap_is_finite_braking():
    a = idm_accel(CAR, 10.0, -3.0, 0.0)
    assert math.isfinite(a) and a < -1000
    assert a == idm_accel(CAR, 10.0, 0.01, 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        IdmParams(time_headway=0.0)
    with pytest.raises(ValueError):
        IdmParams(accel_exponent=0.5)
    with pytest.raises(ValueError):
        MobilParams(max_safe_deceleration=0.0)
    with pytest.raises(ValueError):
        MobilParams(politeness=-0.1)


def test_driver_classes():
    assert CONSIDERATE.politeness == 0.5
    assert INCONSIDERATE.politeness == 0.0
    assert (CONSIDERATE.max_safe_deceleration, CONSIDERATE.changing_threshold, CONSIDERATE.right_bias) == (4.0, 0.1, 0.2)


def test_truck_is_slower_than_sedan():
    t, s = TRUCK.model, SEDAN.model
    assert t.desired_velocity < s.desired_velocity
    assert t.max_acceleration < s.max_acceleration


def test_safety_boundary():
    p = MobilParams()
    assert mobil_safety_ok(p, -2.0)
    assert mobil_safety_ok(p, -4.0)
    assert not mobil_safety_ok(p, -7.3)


def test_incentive_examples():
    p = MobilParams(politeness=0.5, changing_threshold=0.1, right_bias=0.0)
    assert mobil_incentive_ok(p, 1.0, 0.0, 0.0, LEFT)
    assert not mobil_incentive_ok(p, 0.0, 0.0, 0.0, LEFT)
    # equality at the boundary is not enough
    assert not mobil_incentive_ok(p, 0.6, 0.8, 0.2, LEFT)


def test_right_bias_favours_moving_right():
    p = MobilParams(right_bias=0.2)
    assert mobil_incentive_ok(p, 0.05, 0.0, 0.0, RIGHT)
    assert not mobil_incentive_ok(p, 0.05, 0.0, 0.0, LEFT)


def _car(vid, x, v, profile=SEDAN):
    vehicle = make_vehicle(profile, vid)
    vehicle.x, vehicle.velocity = x, v
    return vehicle


def test_four_vehicle_configuration():
    subject = _car(1, 0.0, 25.0)
    truck = _car(2, subject.length + 15.0, 20.0, TRUCK)
    target_front = _car(3, subject.length + 80.0, 25.0)
    target_back = _car(4, -40.0 - 4.5, 25.0)
    assert check_lane_change(subject, truck, target_front, target_back, LEFT)


def test_stuck_behind_truck_with_empty_target():
    subject = _car(1, 0.0, 25.0)
    truck = _car(2, 20.0, 20.0, TRUCK)
    assert check_lane_change(subject, truck, None, None, LEFT)


def test_zero_gap_follower_blocks():
    subject = _car(1, 0.0, 25.0)
    truck = _car(2, 20.0, 20.0, TRUCK)
    back = _car(3, -4.5, 25.0)
    assert not check_lane_change(subject, truck, None, back, LEFT)


def test_overlap_state_never_changes():
    subject = _car(1, 0.0, 25.0)
    truck = _car(2, 2.0, 20.0, TRUCK)
    assert not check_lane_change(subject, truck, None, None, LEFT)


def test_without_lane_change_params():
    subject = _car(1, 0.0, 25.0)
    subject.lane_change = None
    assert not check_lane_change(subject, _car(2, 20.0, 5.0), None, None, LEFT)


def test_equilibrium_gap_matches_bisection():
    assert equilibrium_gap(CAR, 20.0) == pytest.approx(EQ_GAP_V20, rel=1e-9)


params_st = st.builds(IdmParams,
                      desired_velocity=st.floats(5, 50), time_headway=st.floats(0.5, 3),
                      max_acceleration=st.floats(0.3, 3), comfortable_deceleration=st.floats(0.5, 4),
                      min_gap=st.floats(0.5, 5), accel_exponent=st.floats(1, 8))


@settings(max_examples=200)
@given(params_st, st.floats(0, 60), st.floats(0, 60), st.floats(0.02, 500), st.floats(-20, 20))
def test_monotone_in_velocity(p, v1, v2, gap, dv):
    lo, hi = sorted((v1, v2))
    assert idm_accel(p, hi, gap, dv) <= idm_accel(p, lo, gap, dv) + 1e-9


@settings(max_examples=200)
@given(params_st, st.floats(0, 60), st.floats(0.02, 500), st.floats(0.02, 500), st.floats(-20, 20))
def test_monotone_in_gap(p, v, g1, g2, dv):
    lo, hi = sorted((g1, g2))
    assert idm_accel(p, v, lo, dv) <= idm_accel(p, v, hi, dv) + 1e-9


@settings(max_examples=200)
@given(params_st, st.floats(0, 60), st.one_of(st.none(), st.floats(0.02, 1000)), st.floats(-20, 20))
def test_bounded_by_max_acceleration(p, v, gap, dv):
    a = idm_accel(p, v, gap, dv)
    assert a <= p.max_acceleration
    if a == p.max_acceleration:
        # v = 0, or a speed whose free-road term is below half an ulp of 1 and rounds away
        assert gap is None and (v / p.desired_velocity) ** p.accel_exponent <= 2.0 ** -53


@settings(max_examples=100)
@given(params_st)
def test_free_road_equilibrium(p):
    assert idm_accel(p, p.desired_velocity, None, 0.0) == 0.0


@settings(max_examples=100)
@given(params_st, st.floats(0.5, 0.95))
def test_equilibrium_consistency(p, frac):
    v = frac * p.desired_velocity
    gap = equilibrium_gap(p, v)
    lo, hi = 1e-6, 1e6
    for _ in range(200):
        mid = (lo + hi) / 2
        if idm_accel(p, v, mid, 0.0) < 0:
            lo = mid
        else:
            hi = mid
    assert gap == pytest.approx(lo, rel=1e-9)


@settings(max_examples=100)
@given(st.floats(0, 35), st.floats(0, 35), st.floats(0, 35), st.floats(0, 35),
       st.floats(6, 60), st.floats(6, 120), st.floats(6, 80), st.floats(0, 1))
def test_check_lane_change_pure_and_safety_dominant(v, vf, vtf, vtb, g_f, g_tf, g_tb, p):
    mobil = MobilParams(politeness=p)
    subject = _car(1, 0.0, v)
    subject.lane_change = mobil
    front = _car(2, 4.5 + g_f, vf)
    tfront = _car(3, 4.5 + g_tf, vtf)
    tback = _car(4, -g_tb - 4.5, vtb)
    before = [(c.x, c.velocity, c.acceleration) for c in (subject, front, tfront, tback)]
    first = check_lane_change(subject, front, tfront, tback, LEFT)
    assert first == check_lane_change(subject, front, tfront, tback, LEFT)
    assert before == [(c.x, c.velocity, c.acceleration) for c in (subject, front, tfront, tback)]
    after = idm_accel(tback.model, vtb, g_tb, vtb - v)
    if not mobil_safety_ok(mobil, after):
        assert not first
        reckless = replace(mobil, politeness=0.0, changing_threshold=0.0, right_bias=0.0)
        subject.lane_change = reckless
        assert not check_lane_change(subject, front, tfront, tback, LEFT)
