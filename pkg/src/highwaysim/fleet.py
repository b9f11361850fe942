"""Vehicles, obstacles and the stock vehicle/driver profiles.

Longitudinal positions are kept in each direction's own travel frame: ``x`` is
the rear of the vehicle and grows along the direction of travel for eastbound
(+1) and westbound (-1) traffic alike. Conversion to the global frame happens
only at the output boundary (:func:`to_global_x`).

Profile numbers are the usual published IDM defaults, not measured values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple, Union

from .mobility_models import CONSIDERATE, IdmParams, MobilParams
from .radio import DEFAULT_RANGE, RadioParams

DIRECTIONS = (1, -1)


@dataclass(frozen=True)
class VehicleProfile:
    kind: str
    model: Optional[IdmParams]
    lane_change: Optional[MobilParams]
    length: float
    width: float
    transmit_range: float = DEFAULT_RANGE


SEDAN = VehicleProfile(
    kind="sedan",
    model=IdmParams(desired_velocity=30.0, time_headway=1.5, max_acceleration=1.4,
                    comfortable_deceleration=2.0, min_gap=2.0),
    lane_change=CONSIDERATE,
    length=4.5,
    width=1.8,
)

TRUCK = VehicleProfile(
    kind="truck",
    model=IdmParams(desired_velocity=22.0, time_headway=1.7, max_acceleration=0.7,
                    comfortable_deceleration=2.0, min_gap=2.0),
    lane_change=CONSIDERATE,
    length=15.0,
    width=2.5,
)

PROFILES = {"sedan": SEDAN, "truck": TRUCK}


@dataclass(slots=True, eq=False)
class Vehicle:
    """A mobile radio node.

    ``model`` absent means the vehicle is externally controlled (its
    acceleration is whatever the user sets); ``lane_change`` absent means it
    never changes lanes. ``lane``/``direction`` are None while off the road.
    """

    vehicle_id: int
    kind: str = "custom"
    width: float = 1.8
    length: float = 4.5
    lane: Optional[int] = None
    direction: Optional[int] = None
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    velocity: float = 0.0
    acceleration: float = 0.0
    model: Optional[IdmParams] = None
    lane_change: Optional[MobilParams] = None
    radio: Optional[RadioParams] = None

    def __post_init__(self):
        if not isinstance(self.vehicle_id, int) or self.vehicle_id <= 0:
            raise ValueError(f"vehicle_id must be a positive integer, got {self.vehicle_id!r}")
        if self.width <= 0 or self.length <= 0:
            raise ValueError("width and length must be > 0")
        if self.velocity < 0:
            raise ValueError("velocity must be >= 0")
        if self.direction is not None and self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be +1 or -1, got {self.direction!r}")
        if self.radio is None:
            self.radio = RadioParams(address=self.vehicle_id)

    @property
    def position(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @property
    def front(self) -> float:
        return self.x + self.length

    @property
    def is_obstacle(self) -> bool:
        return False

    def _state(self):
        return (self.lane, self.direction, self.x, self.y, self.z, self.velocity,
                self.acceleration, self.model, self.lane_change, self.radio, self.kind)

    def _restore(self, state) -> None:
        (self.lane, self.direction, self.x, self.y, self.z, self.velocity,
         self.acceleration, self.model, self.lane_change, self.radio, self.kind) = state


_FROZEN_ZERO = ("velocity", "acceleration")
_FROZEN_NONE = ("model", "lane_change")


@dataclass(slots=True, eq=False)
class Obstacle(Vehicle):
    """An immobile node: a broken car, a lane closure or a roadside unit."""

    kind: str = "obstacle"

    def __setattr__(self, name, value):
        if name in _FROZEN_ZERO and value != 0:
            raise ValueError(f"an Obstacle cannot have nonzero {name}")
        if name in _FROZEN_NONE and value is not None:
            raise ValueError(f"an Obstacle cannot carry a {name} parameter set")
        object.__setattr__(self, name, value)

    @property
    def is_obstacle(self) -> bool:
        return True


def make_vehicle(profile: Union[str, VehicleProfile], vehicle_id: int, *,
                 used_ids: Optional[Iterable[int]] = None) -> Vehicle:
    """Create an off-road vehicle carrying a profile's parameter sets.

    Args:
        profile: ``"sedan"``, ``"truck"`` or a custom :class:`VehicleProfile`.
        vehicle_id: positive id, unique within the simulation.
        used_ids: ids already taken; a clash raises ``ValueError``.
    """
    if isinstance(profile, str):
        try:
            profile = PROFILES[profile]
        except KeyError:
            raise ValueError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}") from None
    if used_ids is not None and vehicle_id in used_ids:
        raise ValueError(f"vehicle id {vehicle_id} already in use")
    return Vehicle(
        vehicle_id=vehicle_id,
        kind=profile.kind,
        width=profile.width,
        length=profile.length,
        model=profile.model,
        lane_change=profile.lane_change,
        radio=RadioParams(address=vehicle_id, transmit_range=profile.transmit_range),
    )


def make_obstacle(vehicle_id: int, position: Tuple[float, float, float], lane: Optional[int] = None,
                  direction: Optional[int] = None, *, length: float = 4.5, width: float = 1.8,
                  transmit_range: float = DEFAULT_RANGE, kind: str = "obstacle") -> Obstacle:
    """Create an obstacle.

    With ``lane`` and ``direction`` it is meant for the roadway and ``position[0]``
    is its rear in the travel frame of that direction. Without them it is an
    off-road node (roadside unit, gantry, buried sensor); the highway refuses to
    register such a node if it sits on the roadway footprint.
    """
    if (lane is None) != (direction is None):
        raise ValueError("an on-road obstacle needs both lane and direction")
    x, y, z = position
    return Obstacle(vehicle_id=vehicle_id, kind=kind, width=width, length=length, lane=lane,
                    direction=direction, x=x, y=y, z=z,
                    radio=RadioParams(address=vehicle_id, transmit_range=transmit_range))


def front_gap(back: Vehicle, front: Vehicle) -> float:
    """Bumper-to-bumper distance from ``back`` to ``front``; negative means overlap."""
    if back.direction != front.direction:
        raise ValueError("front_gap needs two vehicles travelling in the same direction")
    return front.x - (back.x + back.length)


def to_global_x(vehicle: Vehicle, highway_length: float) -> float:
    """Rear position in the global (eastbound) frame."""
    if vehicle.direction == -1:
        return highway_length - vehicle.x
    return vehicle.x


def from_global_x(global_x: float, direction: int, highway_length: float) -> float:
    if direction == -1:
        return highway_length - global_x
    return global_x
