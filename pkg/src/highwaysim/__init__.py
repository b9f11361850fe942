"""Microscopic highway traffic simulation (IDM car following, MOBIL lane changes) with a simple VANET channel."""

from .fleet import SEDAN, TRUCK, Obstacle, Vehicle, VehicleProfile, front_gap, make_obstacle, make_vehicle
from .highway import ConfigError, Highway, HighwayConfig, HookSet, StepError, VehicleIdCounter
from .mobility_models import (CONSIDERATE, INCONSIDERATE, IdmParams, LocalKinematics, MobilParams,
                              check_lane_change, idm_acceleration)
from .radio import Channel, ChannelModel, Message, RadioParams

__version__ = "0.1.0"

__all__ = [
    "CONSIDERATE", "Channel", "ChannelModel", "ConfigError", "Highway", "HighwayConfig", "HookSet",
    "INCONSIDERATE", "IdmParams", "LocalKinematics", "Message", "MobilParams", "Obstacle", "RadioParams",
    "SEDAN", "StepError", "TRUCK", "Vehicle", "VehicleIdCounter", "VehicleProfile", "check_lane_change",
    "front_gap", "idm_acceleration", "make_obstacle", "make_vehicle",
]
