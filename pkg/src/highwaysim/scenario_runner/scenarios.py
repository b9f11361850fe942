"""Built-in scenarios, written purely against the public hook API."""

from __future__ import annotations

import importlib.util
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple

from ..fleet import SEDAN, VehicleProfile, make_obstacle, make_vehicle
from ..highway import HookSet
from ..mobility_models import idm_accel
from .config import Example5Params, ScenarioConfig

logger = logging.getLogger(__name__)

POLICE_LENGTH = 4.8


class BrokenCarController:
    """A broken car calls for help; a police car answers and parks beside it.

    The broken car (id 1) is an obstacle that broadcasts ``HELP <x> <lane>
    <direction>`` every ``broadcast_period`` seconds. The police car (id 2)
    enters at the start of the highway, unicasts ``ACK`` for every request it
    hears, and after the first one brakes towards a stop point level with the
    obstacle in its own lane. Once slow enough within ``stop_tolerance`` of that
    point it stays put.
    """

    def __init__(self, params: Optional[Example5Params] = None, direction: int = 1):
        self.params = params or Example5Params()
        self.direction = direction
        self.obstacle_id: Optional[int] = None
        self.police_id: Optional[int] = None
        self.target_x: Optional[float] = None
        self.stopped = False
        self.arrival_time: Optional[float] = None
        self.first_request_time: Optional[float] = None
        self.broadcast_times: List[float] = []
        self.requests_received = 0
        self.replies_sent = 0
        self.replies_heard = 0
        self._broadcast_every: Optional[int] = None

    def police_profile(self) -> VehicleProfile:
        p = self.params
        model = replace(SEDAN.model, desired_velocity=p.police_desired_velocity,
                        max_acceleration=p.police_max_acceleration)
        return VehicleProfile("police", model, None, POLICE_LENGTH, 1.9, p.police_range)

    def init_vehicle(self, highway, ids) -> bool:
        self._highway = highway
        p = self.params
        obstacle = make_obstacle(ids.take(), (p.obstacle_x, 0.0, 0.0), p.obstacle_lane, self.direction,
                                 transmit_range=p.obstacle_range, kind="broken")
        highway.add_vehicle(obstacle)
        self.obstacle_id = obstacle.vehicle_id

        police = make_vehicle(self.police_profile(), ids.take())
        police.lane = p.police_lane
        police.direction = self.direction
        police.x = -police.length
        police.velocity = p.police_initial_velocity
        highway.add_vehicle(police)
        self.police_id = police.vehicle_id
        self._broadcast_every = max(1, round(p.broadcast_period / highway.config.delta_t))
        return True

    def control_vehicle(self, highway, vehicle, dt) -> bool:
        vid = vehicle.vehicle_id
        if vid == self.obstacle_id:
            if highway.step_count % self._broadcast_every == 0:
                msg = f"HELP {vehicle.x:.3f} {vehicle.lane} {vehicle.direction}".encode()
                highway.channel.broadcast(vehicle, msg)
                self.broadcast_times.append(highway.time)
            return False
        if vid != self.police_id:
            return False
        if self.stopped:
            vehicle.velocity = 0.0
            vehicle.acceleration = 0.0
            return True
        if self.target_x is None:
            return False
        self._approach(highway, vehicle, dt)
        return True

    def _leader(self, highway, vehicle):
        ahead = highway.find_vehicles_in_segment(vehicle.lane, vehicle.direction, vehicle.x, math.inf)
        for other in ahead:
            if other is not vehicle:
                return other
        return None

    def _approach(self, highway, vehicle, dt) -> None:
        model = vehicle.model
        v = vehicle.velocity
        # a standing virtual leader placed so the IDM rest position puts our rear at target_x
        a = idm_accel(model, v, self.target_x + model.min_gap - vehicle.x, v)
        leader = self._leader(highway, vehicle)
        if leader is not None:
            a = min(a, idm_accel(model, v, leader.x - (vehicle.x + vehicle.length), v - leader.velocity))
        v_new = v + a * dt
        if v_new < 0.0:
            a = -v / dt
            v_new = 0.0
        vehicle.acceleration = a
        vehicle.velocity = v_new
        vehicle.x = vehicle.x + v_new * dt
        if v_new < 0.1 and abs(vehicle.x - self.target_x) <= self.params.stop_tolerance:
            vehicle.velocity = 0.0
            vehicle.acceleration = 0.0
            self.stopped = True
            self.arrival_time = highway.time + dt
            logger.info("police stopped at x=%.2f lane %s, t=%.1f s", vehicle.x, vehicle.lane, self.arrival_time)

    def receive_data(self, vehicle, payload: bytes, sender: int) -> None:
        if vehicle.vehicle_id == self.police_id and payload.startswith(b"HELP"):
            self.requests_received += 1
            if self.target_x is None:
                self.target_x = float(payload.split()[1])
                self.first_request_time = self._highway.time
            self._highway.channel.unicast(vehicle, sender, b"ACK")
            self.replies_sent += 1
        elif vehicle.vehicle_id == self.obstacle_id and payload == b"ACK":
            self.replies_heard += 1

    def summary(self, highway) -> List[Tuple[str, object]]:
        police = highway.find_vehicle(self.police_id)
        out = [
            ("police_arrival_time", self.arrival_time),
            ("police_first_request_time", self.first_request_time),
            ("broadcasts", len(self.broadcast_times)),
            ("requests_received", self.requests_received),
            ("replies_sent", self.replies_sent),
            ("replies_heard", self.replies_heard),
        ]
        if police is not None:
            out += [("police_final_x", police.x), ("police_final_lane", police.lane),
                    ("police_final_velocity", police.velocity)]
        return out


def load_hook_script(path: str):
    """Import a user hook file.

    The file either defines ``make_hooks(config)`` returning a hook object, or
    defines any of ``init_vehicle``, ``control_vehicle``, ``receive_data`` at
    module level.
    """
    file = Path(path)
    spec = importlib.util.spec_from_file_location(f"highwaysim_user_hooks_{file.stem}", file)
    if spec is None or spec.loader is None:
        raise ImportError(f"cannot load hook script {path}")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def build_controller(cfg: ScenarioConfig):
    """Return (controller object or None, HookSet) for a scenario."""
    if cfg.scenario == "example5":
        controller = BrokenCarController(cfg.example5)
        return controller, HookSet.from_object(controller)
    if cfg.scenario == "custom":
        module = load_hook_script(cfg.hooks)
        if hasattr(module, "make_hooks"):
            controller = module.make_hooks(cfg)
            return controller, HookSet.from_object(controller)
        return module, HookSet.from_object(module)
    return None, HookSet()
