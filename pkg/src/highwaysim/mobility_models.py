"""Car-following (IDM) and lane-change (MOBIL) decision functions.

Everything here is stateless. The highway loop and the lane-change pass call
these with the local neighbourhood of one vehicle; nothing is mutated.

Default numbers in this module are the commonly published IDM/MOBIL defaults.
They are defaults for experimentation, not measured ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

LEFT = "left"
RIGHT = "right"
ChangeDirection = Literal["left", "right"]

# Gap floor used when a front vehicle overlaps the subject (collision state).
DEGENERATE_GAP = 0.01


@dataclass(frozen=True)
class IdmParams:
    """Intelligent Driver Model parameters for one driver/vehicle.

    Attributes:
        desired_velocity: free-road target speed v0 [m/s].
        time_headway: safety time headway T [s].
        max_acceleration: acceleration in free traffic a [m/s^2].
        comfortable_deceleration: comfortable braking deceleration b [m/s^2].
        min_gap: jam distance s0 to the front vehicle [m].
        accel_exponent: free-road exponent delta.
    """

    desired_velocity: float = 30.0
    time_headway: float = 1.5
    max_acceleration: float = 1.4
    comfortable_deceleration: float = 2.0
    min_gap: float = 2.0
    accel_exponent: float = 4.0

    def __post_init__(self):
        for name in ("desired_velocity", "time_headway", "max_acceleration",
                     "comfortable_deceleration", "min_gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"IdmParams.{name} must be > 0, got {getattr(self, name)!r}")
        if not self.accel_exponent >= 1:
            raise ValueError(f"IdmParams.accel_exponent must be >= 1, got {self.accel_exponent!r}")


@dataclass(frozen=True)
class MobilParams:
    """MOBIL lane-change parameters.

    Attributes:
        politeness: weight p on the followers' disadvantage (0 = inconsiderate).
        max_safe_deceleration: b_safe, the largest braking a lane change may
            impose on the new follower [m/s^2], given as a positive number.
        changing_threshold: incentive hysteresis [m/s^2].
        right_bias: asymmetry favouring the right lane [m/s^2]; 0 is symmetric.
    """

    politeness: float = 0.5
    max_safe_deceleration: float = 4.0
    changing_threshold: float = 0.1
    right_bias: float = 0.2

    def __post_init__(self):
        if not self.max_safe_deceleration > 0:
            raise ValueError("MobilParams.max_safe_deceleration must be > 0")
        if self.changing_threshold < 0 or self.right_bias < 0 or self.politeness < 0:
            raise ValueError("MobilParams.changing_threshold, right_bias and politeness must be >= 0")


CONSIDERATE = MobilParams(politeness=0.5)
INCONSIDERATE = MobilParams(politeness=0.0)


@dataclass(frozen=True)
class LocalKinematics:
    """What a driver sees: own speed plus the gap and closing rate to its leader.

    ``gap_to_front`` is ``None`` when nobody is ahead; ``approach_rate`` is then
    ignored.
    """

    velocity: float
    gap_to_front: Optional[float] = None
    approach_rate: float = 0.0


def idm_desired_gap(params: IdmParams, velocity: float, approach_rate: float) -> float:
    """Dynamic desired distance s*(v, dv); never below ``params.min_gap``."""
    dynamic = velocity * params.time_headway + velocity * approach_rate / (
        2.0 * math.sqrt(params.max_acceleration * params.comfortable_deceleration))
    if dynamic < 0.0:
        dynamic = 0.0
    return params.min_gap + dynamic


def idm_accel(params: IdmParams, velocity: float, gap: Optional[float], approach_rate: float) -> float:
    """Scalar IDM acceleration.

    ``gap`` is the bumper-to-bumper distance to the leader or ``None`` for a free
    road. Non-positive gaps are clamped to ``DEGENERATE_GAP`` so the result stays
    finite (very strong braking).
    """
    free = 1.0 - (velocity / params.desired_velocity) ** params.accel_exponent
    if gap is None:
        return params.max_acceleration * free
    s = gap if gap > DEGENERATE_GAP else DEGENERATE_GAP
    s_star = idm_desired_gap(params, velocity, approach_rate)
    return params.max_acceleration * (free - (s_star / s) ** 2)


def idm_acceleration(params: IdmParams, kin: LocalKinematics) -> float:
    return idm_accel(params, kin.velocity, kin.gap_to_front, kin.approach_rate)


def equilibrium_gap(params: IdmParams, velocity: float) -> float:
    """Steady-state gap at which a follower at ``velocity`` has zero acceleration."""
    if not 0 <= velocity < params.desired_velocity:
        raise ValueError("equilibrium gap exists only for 0 <= v < desired_velocity")
    free = 1.0 - (velocity / params.desired_velocity) ** params.accel_exponent
    return idm_desired_gap(params, velocity, 0.0) / math.sqrt(free)


def mobil_safety_ok(params: MobilParams, new_follower_accel_after_change: float) -> bool:
    return new_follower_accel_after_change >= -params.max_safe_deceleration


def mobil_incentive_ok(params: MobilParams, subject_gain: float, new_follower_loss: float,
                       old_follower_loss: float, change_direction: ChangeDirection) -> bool:
    """MOBIL incentive test with strict comparison.

    Losses are ``a_before - a_after`` for each follower, so a positive loss means
    that follower has to brake harder (or accelerate less) after the change.
    Lane 0 is the rightmost lane; a move to a higher index is a move to the left
    and has to overcome the right-lane bias.
    """
    if change_direction == LEFT:
        bias = params.right_bias
    elif change_direction == RIGHT:
        bias = -params.right_bias
    else:
        raise ValueError(f"change_direction must be 'left' or 'right', got {change_direction!r}")
    threshold = params.politeness * (new_follower_loss + old_follower_loss) + params.changing_threshold + bias
    return subject_gain > threshold


def _gap(back, front) -> float:
    # Both vehicles share a travel frame: x grows along their direction of travel.
    return front.x - (back.x + back.length)


def _accel_behind(follower, leader) -> float:
    if leader is None:
        return idm_accel(follower.model, follower.velocity, None, 0.0)
    return idm_accel(follower.model, follower.velocity, _gap(follower, leader),
                     follower.velocity - leader.velocity)


def check_lane_change(subject, current_front, target_front, target_back,
                      change_direction: ChangeDirection, current_back=None) -> bool:
    """Decide whether ``subject`` may move into the adjacent lane.

    Args:
        subject: the vehicle considering the change. Needs ``model`` and
            ``lane_change`` parameter sets; without either the answer is False.
        current_front: leader in the current lane, or None.
        target_front: prospective leader in the target lane, or None.
        target_back: prospective follower in the target lane, or None.
        change_direction: ``"left"`` (higher lane index) or ``"right"``.
        current_back: follower in the current lane, or None. Its loss enters
            the politeness term; omitting it treats that loss as zero.

    Returns:
        True when the physical gap, safety, and incentive criteria all hold.
    """
    idm = subject.model
    mobil = subject.lane_change
    if idm is None or mobil is None:
        return False
    # never propose a change out of an overlapping state
    if current_front is not None and _gap(subject, current_front) < 0:
        return False
    if current_back is not None and _gap(current_back, subject) < 0:
        return False
    if target_front is not None and _gap(subject, target_front) < idm.min_gap:
        return False
    if target_back is not None and _gap(target_back, subject) < idm.min_gap:
        return False

    new_follower_loss = 0.0
    if target_back is not None and target_back.model is not None:
        back_after = _accel_behind(target_back, subject)
        if not mobil_safety_ok(mobil, back_after):
            return False
        new_follower_loss = _accel_behind(target_back, target_front) - back_after

    old_follower_loss = 0.0
    if current_back is not None and current_back.model is not None:
        old_follower_loss = _accel_behind(current_back, subject) - _accel_behind(current_back, current_front)

    gain = _accel_behind(subject, target_front) - _accel_behind(subject, current_front)
    return mobil_incentive_ok(mobil, gain, new_follower_loss, old_follower_loss, change_direction)
