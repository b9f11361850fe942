"""The highway: lanes, the step loop, injection/removal, queries and user hooks.

One :class:`Highway` owns every on-road entity and advances them in lockstep.
Within a lane vehicles are updated rear to front, so each driver reacts to
its leader's state from the start of the step and the result equals a
simultaneous update of the whole lane.
"""

from __future__ import annotations

import logging
import random
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass
from operator import attrgetter
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from .fleet import SEDAN, TRUCK, Vehicle, make_vehicle
from .mobility_models import LEFT, RIGHT, check_lane_change, idm_accel
from .radio import Channel, ChannelModel, distance

logger = logging.getLogger(__name__)

MAX_LENGTH = 10_000.0
MAX_LANES = 5

_x = attrgetter("x")


class ConfigError(ValueError):
    """Raised with every violated bound listed in the message."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class StepError(RuntimeError):
    """A hook failed mid-step. The highway has been rolled back to the step start."""

    def __init__(self, step: int, time: float, phase: str, vehicle_id: Optional[int], cause: BaseException):
        self.step = step
        self.time = time
        self.phase = phase
        self.vehicle_id = vehicle_id
        where = f" (vehicle {vehicle_id})" if vehicle_id is not None else ""
        super().__init__(f"step {step} at t={time:.3f}s aborted in {phase}{where}: {cause!r}")


@dataclass
class HighwayConfig:
    length: float = 1000.0
    lanes_per_direction: int = 1
    lane_width: float = 3.7
    median_gap: float = 2.0
    bidirectional: bool = False
    delta_t: float = 0.1
    lane_change_period_steps: int = 10
    auto_injection: bool = True
    min_gap: float = 50.0
    injection_mix: float = 0.8
    seed: int = 0
    prefer_right_lane: bool = True
    channel_latency_steps: int = 0
    channel_loss: float = 0.0

    def violations(self) -> List[str]:
        out = []
        if not 0 < self.length <= MAX_LENGTH:
            out.append(f"length={self.length} outside (0, {MAX_LENGTH:g}]")
        if not (isinstance(self.lanes_per_direction, int) and 1 <= self.lanes_per_direction <= MAX_LANES):
            out.append(f"lanes_per_direction={self.lanes_per_direction} outside [1, {MAX_LANES}]")
        if not self.lane_width > 0:
            out.append(f"lane_width={self.lane_width} must be > 0")
        if self.median_gap < 0:
            out.append(f"median_gap={self.median_gap} must be >= 0")
        if not self.delta_t > 0:
            out.append(f"delta_t={self.delta_t} must be > 0")
        if not (isinstance(self.lane_change_period_steps, int) and self.lane_change_period_steps >= 1):
            out.append(f"lane_change_period_steps={self.lane_change_period_steps} must be an integer >= 1")
        if self.min_gap < 0:
            out.append(f"min_gap={self.min_gap} must be >= 0")
        if not 0.0 <= self.injection_mix <= 1.0:
            out.append(f"injection_mix={self.injection_mix} outside [0, 1]")
        if not (isinstance(self.channel_latency_steps, int) and self.channel_latency_steps >= 0):
            out.append(f"channel_latency_steps={self.channel_latency_steps} must be an integer >= 0")
        if not 0.0 <= self.channel_loss <= 1.0:
            out.append(f"channel_loss={self.channel_loss} outside [0, 1]")
        return out

    def validate(self) -> "HighwayConfig":
        problems = self.violations()
        if problems:
            raise ConfigError(problems)
        return self

    @property
    def directions(self) -> Tuple[int, ...]:
        return (1, -1) if self.bidirectional else (1,)


@dataclass
class HookSet:
    """User event handlers.

    ``init_vehicle(highway, ids) -> bool`` runs once at construction; ``ids`` is
    a :class:`VehicleIdCounter` starting at 1. Return True to have the lanes
    re-sorted afterwards.

    ``control_vehicle(highway, vehicle, dt) -> bool`` runs for every vehicle
    every step. Return True when the handler moved the vehicle itself, which
    skips the model update for that vehicle this step.

    ``receive_data(vehicle, payload, sender_address)`` runs on each delivery.
    """

    init_vehicle: Optional[Callable] = None
    control_vehicle: Optional[Callable] = None
    receive_data: Optional[Callable] = None

    @classmethod
    def from_object(cls, obj) -> "HookSet":
        return cls(getattr(obj, "init_vehicle", None), getattr(obj, "control_vehicle", None),
                   getattr(obj, "receive_data", None))


class VehicleIdCounter:
    """Shared id counter handed to ``init_vehicle``; use :meth:`take` for every new vehicle."""

    def __init__(self, start: int = 1):
        self.value = start

    def take(self) -> int:
        vid = self.value
        self.value += 1
        return vid

    def __repr__(self):
        return f"VehicleIdCounter({self.value})"


class Highway:
    """Straight multi-lane highway that manages the mobility of its vehicles.

    Args:
        config: physical layout, timing and injection policy.
        hooks: user event handlers; a plain object with the handler methods works too.
        channel: radio channel; by default one is built from the config's channel fields.
    """

    def __init__(self, config: Optional[HighwayConfig] = None, hooks=None, channel: Optional[Channel] = None):
        self.config = (config or HighwayConfig()).validate()
        if hooks is None:
            hooks = HookSet()
        elif not isinstance(hooks, HookSet):
            hooks = HookSet.from_object(hooks)
        self.hooks = hooks
        cfg = self.config
        self.lane_keys: List[Tuple[int, int]] = [(d, i) for d in cfg.directions
                                                 for i in range(cfg.lanes_per_direction)]
        self.lanes: Dict[Tuple[int, int], List[Vehicle]] = {key: [] for key in self.lane_keys}
        self.offroad: List[Vehicle] = []
        self._index: Dict[int, Vehicle] = {}
        self._used_ids: set = set()
        self.rng = random.Random(cfg.seed)
        self.channel = channel or Channel(ChannelModel(cfg.channel_latency_steps, cfg.channel_loss, cfg.seed))
        self.channel.bind(self)
        self.injectors: List[Callable] = []
        self.observers: List[Callable] = []
        self.step_count = 0
        self.time = 0.0
        self.added_count = 0
        self.injected_count = 0
        self.exited_count = 0
        self.exit_log: List[Tuple[float, int, str]] = []
        self.lane_change_log: List[Tuple[float, int, int, int]] = []
        self.order_inversions = 0
        self.ids = VehicleIdCounter(1)
        self._phase = "init"

        if self.hooks.init_vehicle is not None:
            if self.hooks.init_vehicle(self, self.ids):
                self.sort_lanes()

    # -- geometry ---------------------------------------------------------
    def lane_y(self, direction: int, lane: int) -> float:
        """Lateral centre of a lane; lane 0 is the outer (rightmost) lane."""
        cfg = self.config
        offset = cfg.median_gap / 2.0 + (cfg.lanes_per_direction - lane - 0.5) * cfg.lane_width
        return -offset if direction == 1 else offset

    def road_half_width(self) -> float:
        cfg = self.config
        return cfg.median_gap / 2.0 + cfg.lanes_per_direction * cfg.lane_width

    def global_position(self, node: Vehicle) -> Tuple[float, float, float]:
        x = self.config.length - node.x if node.direction == -1 else node.x
        return (x, node.y, node.z)

    # -- membership -------------------------------------------------------
    def _check_new_id(self, vehicle: Vehicle) -> None:
        if vehicle.vehicle_id in self._used_ids:
            raise ValueError(f"duplicate vehicle id {vehicle.vehicle_id}")

    def _register(self, vehicle: Vehicle) -> None:
        self._index[vehicle.vehicle_id] = vehicle
        self._used_ids.add(vehicle.vehicle_id)
        if self.ids.value <= vehicle.vehicle_id:
            self.ids.value = vehicle.vehicle_id + 1

    def add_vehicle(self, vehicle: Vehicle) -> None:
        """Place a vehicle into its lane at its current ``x`` (sorted insertion)."""
        self._check_new_id(vehicle)
        if vehicle.direction not in self.config.directions:
            raise ValueError(f"direction {vehicle.direction!r} not available on this highway "
                             f"(allowed: {self.config.directions})")
        if vehicle.lane is None or not 0 <= vehicle.lane < self.config.lanes_per_direction:
            raise ValueError(f"lane {vehicle.lane!r} outside [0, {self.config.lanes_per_direction - 1}]")
        vehicle.y = self.lane_y(vehicle.direction, vehicle.lane)
        insort(self.lanes[(vehicle.direction, vehicle.lane)], vehicle, key=_x)
        self._register(vehicle)
        self.added_count += 1

    def add_offroad(self, node: Vehicle) -> None:
        """Register a node that lives off the roadway (roadside unit, helicopter).

        Off-road nodes take part in radio traffic and range queries and get the
        ``control_vehicle`` callback every step, but the highway never moves them.
        """
        self._check_new_id(node)
        on_footprint = (node.z == 0 and 0 <= node.x <= self.config.length
                        and abs(node.y) <= self.road_half_width())
        if on_footprint:
            raise ValueError(f"node {node.vehicle_id} sits on the roadway; give it a lane and direction "
                             "and use add_vehicle, or move it off the road")
        node.lane = None
        node.direction = None
        self.offroad.append(node)
        self._register(node)

    def remove_vehicle(self, vehicle_id: int) -> Optional[Vehicle]:
        vehicle = self._index.pop(vehicle_id, None)
        if vehicle is None:
            return None
        if vehicle.lane is not None and vehicle.direction is not None:
            self.lanes[(vehicle.direction, vehicle.lane)].remove(vehicle)
        else:
            self.offroad.remove(vehicle)
        return vehicle

    def sort_lanes(self) -> None:
        for lane in self.lanes.values():
            lane.sort(key=_x)

    # -- queries ----------------------------------------------------------
    def on_road(self) -> Iterator[Vehicle]:
        """Every on-road entity in round-robin lane order, rear to front within a lane."""
        for key in self.lane_keys:
            yield from self.lanes[key]

    def all_entities(self) -> Iterator[Vehicle]:
        yield from self.on_road()
        yield from self.offroad

    def vehicle_count(self) -> int:
        return sum(len(lane) for lane in self.lanes.values())

    def find_vehicle(self, vehicle_id: int) -> Optional[Vehicle]:
        return self._index.get(vehicle_id)

    def find_vehicles_in_range(self, subject: Vehicle, range_m: float) -> List[Vehicle]:
        """All managed entities (both directions, obstacles and off-road nodes) within ``range_m``."""
        if range_m < 0:
            raise ValueError("range must be >= 0")
        origin = self.global_position(subject)
        return [node for node in self.all_entities()
                if node is not subject and distance(origin, self.global_position(node)) <= range_m]

    def find_vehicles_in_segment(self, lane: int, direction: int, x1: float, x2: float) -> List[Vehicle]:
        """Entities in one lane whose rear lies in ``[x1, x2)``, rear to front."""
        if x1 > x2:
            raise ValueError(f"segment start {x1} is beyond its end {x2}")
        try:
            vehicles = self.lanes[(direction, lane)]
        except KeyError:
            raise ValueError(f"no lane {lane} in direction {direction}") from None
        lo = bisect_left(vehicles, x1, key=_x)
        hi = bisect_left(vehicles, x2, key=_x)
        return vehicles[lo:hi]

    def neighbors(self, direction: int, lane: int, x: float) -> Tuple[Optional[Vehicle], Optional[Vehicle]]:
        """(front, back) around longitudinal position ``x`` in a lane the subject is not in."""
        vehicles = self.lanes[(direction, lane)]
        i = bisect_right(vehicles, x, key=_x)
        front = vehicles[i] if i < len(vehicles) else None
        back = vehicles[i - 1] if i > 0 else None
        return front, back

    # -- the step loop ----------------------------------------------------
    def step(self) -> None:
        """Advance the simulation by one ``delta_t``.

        Order: periodic lane changes, per-vehicle control hook and mobility
        update, clock advance, removal of exited vehicles, injection, radio
        delivery, observers. If a hook raises, all state is restored to the
        beginning of the step and :class:`StepError` is raised.
        """
        checkpoint = self._checkpoint()
        vehicle_id = None
        try:
            cfg = self.config
            dt = cfg.delta_t
            self.channel.now = self.time
            self.channel.step_index = self.step_count
            if self.step_count % cfg.lane_change_period_steps == 0:
                self._phase = "lane change"
                self.apply_lane_changes()

            self._phase = "mobility"
            control = self.hooks.control_vehicle
            for key in self.lane_keys:
                vehicles = list(self.lanes[key])
                last = len(vehicles) - 1
                for i, vehicle in enumerate(vehicles):
                    vehicle_id = vehicle.vehicle_id
                    if control is not None and control(self, vehicle, dt):
                        continue
                    self._integrate(vehicle, vehicles[i + 1] if i < last else None, dt)
            if control is not None:
                for node in list(self.offroad):
                    vehicle_id = node.vehicle_id
                    control(self, node, dt)
            vehicle_id = None
            self._restore_order()

            self.step_count += 1
            self.time = self.step_count * dt
            self.channel.now = self.time

            self._phase = "removal"
            self.remove_exited()
            self._phase = "injection"
            if cfg.auto_injection:
                self.try_inject()
            for injector in self.injectors:
                injector(self)
            self._phase = "delivery"
            self.channel.deliver_pending(self)
        except Exception as exc:
            phase = self._phase
            self._rollback(checkpoint)
            raise StepError(checkpoint[0], checkpoint[1], phase, vehicle_id, exc) from exc
        self._phase = "idle"
        for observer in self.observers:
            observer(self)

    def run(self, duration: float) -> int:
        steps = int(round(duration / self.config.delta_t))
        for _ in range(steps):
            self.step()
        return steps

    def _integrate(self, vehicle: Vehicle, front: Optional[Vehicle], dt: float) -> None:
        # semi-implicit Euler, no reversing
        if vehicle.is_obstacle:
            return
        v = vehicle.velocity
        model = vehicle.model
        if model is None:
            a = vehicle.acceleration
        elif front is None:
            a = idm_accel(model, v, None, 0.0)
        else:
            a = idm_accel(model, v, front.x - (vehicle.x + vehicle.length), v - front.velocity)
        v_new = v + a * dt
        if v_new < 0.0:
            a = -v / dt
            v_new = 0.0
        vehicle.acceleration = a
        vehicle.velocity = v_new
        vehicle.x = vehicle.x + v_new * dt

    def _restore_order(self) -> None:
        for lane in self.lanes.values():
            for i in range(len(lane) - 1):
                if lane[i].x > lane[i + 1].x:
                    self.order_inversions += 1
                    logger.warning("lane order inversion at t=%.2f; re-sorting", self.time)
                    lane.sort(key=_x)
                    break

    def apply_lane_changes(self) -> int:
        """Give every lane-changing vehicle one chance to move to an adjacent lane.

        Lanes are visited in round-robin order and vehicles rear to front. Each
        decision sees the lane contents left by earlier decisions in the same
        pass, and a vehicle changes at most once per pass.
        """
        n = self.config.lanes_per_direction
        if n < 2:
            return 0
        changed = set()
        for key in self.lane_keys:
            direction, lane_idx = key
            for vehicle in list(self.lanes[key]):
                if vehicle.lane_change is None or vehicle.model is None or vehicle.vehicle_id in changed:
                    continue
                current = self.lanes[key]
                i = current.index(vehicle)
                current_front = current[i + 1] if i + 1 < len(current) else None
                current_back = current[i - 1] if i > 0 else None
                accepted = []
                for target, side in ((lane_idx - 1, RIGHT), (lane_idx + 1, LEFT)):
                    if not 0 <= target < n:
                        continue
                    target_front, target_back = self.neighbors(direction, target, vehicle.x)
                    if check_lane_change(vehicle, current_front, target_front, target_back, side, current_back):
                        accepted.append(target)
                if not accepted:
                    continue
                target = accepted[0] if self.config.prefer_right_lane else accepted[-1]
                current.pop(i)
                vehicle.lane = target
                vehicle.y = self.lane_y(direction, target)
                insort(self.lanes[(direction, target)], vehicle, key=_x)
                changed.add(vehicle.vehicle_id)
                self.lane_change_log.append((self.time, vehicle.vehicle_id, lane_idx, target))
        return len(changed)

    def remove_exited(self) -> List[Vehicle]:
        """Drop vehicles whose rear is past the end of the highway."""
        length = self.config.length
        gone = []
        for lane in self.lanes.values():
            if not lane or lane[-1].x <= length:
                continue
            keep = []
            for vehicle in lane:
                if vehicle.x > length and not vehicle.is_obstacle:
                    gone.append(vehicle)
                else:
                    keep.append(vehicle)
            lane[:] = keep
        for vehicle in gone:
            del self._index[vehicle.vehicle_id]
            vehicle.lane = None
            self.exited_count += 1
            self.exit_log.append((self.time, vehicle.vehicle_id, vehicle.kind))
        return gone

    def next_vehicle_id(self) -> int:
        while self.ids.value in self._used_ids:
            self.ids.value += 1
        return self.ids.take()

    def try_inject(self) -> List[Vehicle]:
        """Offer every lane one new vehicle at the entrance, round-robin from the rightmost eastbound lane."""
        cfg = self.config
        added = []
        for key in self.lane_keys:
            lane = self.lanes[key]
            rear = lane[0] if lane else None
            if rear is not None and rear.x < cfg.min_gap:
                continue
            profile = SEDAN if self.rng.random() < cfg.injection_mix else TRUCK
            vehicle = make_vehicle(profile, self.next_vehicle_id())
            desired = profile.model.desired_velocity
            vehicle.velocity = desired if rear is None else min(desired, rear.velocity)
            vehicle.direction, vehicle.lane = key
            vehicle.x = -vehicle.length
            self.add_vehicle(vehicle)
            self.injected_count += 1
            added.append(vehicle)
        return added

    # -- diagnostics ------------------------------------------------------
    def negative_gaps(self) -> List[Tuple[int, int, float]]:
        """(back id, front id, gap) for every overlapping consecutive pair."""
        out = []
        for lane in self.lanes.values():
            for back, front in zip(lane, lane[1:]):
                gap = front.x - (back.x + back.length)
                if gap < 0:
                    out.append((back.vehicle_id, front.vehicle_id, gap))
        return out

    # -- rollback ---------------------------------------------------------
    def _checkpoint(self):
        entities = [(node, node._state()) for node in self._index.values()]
        return (self.step_count, self.time,
                {key: list(lane) for key, lane in self.lanes.items()}, list(self.offroad),
                dict(self._index), set(self._used_ids), entities, self.rng.getstate(),
                (self.added_count, self.injected_count, self.exited_count, self.order_inversions, self.ids.value),
                len(self.exit_log), len(self.lane_change_log), self.channel._checkpoint(),
                [(inj, inj._checkpoint()) for inj in self.injectors if hasattr(inj, "_checkpoint")])

    def _rollback(self, cp) -> None:
        (self.step_count, self.time, lanes, offroad, index, used, entities, rng_state,
         counters, exit_len, lc_len, channel_state, injector_states) = cp
        for key, lane in lanes.items():
            self.lanes[key][:] = lane
        self.offroad[:] = offroad
        self._index = index
        self._used_ids = used
        for node, state in entities:
            node._restore(state)
        self.rng.setstate(rng_state)
        (self.added_count, self.injected_count, self.exited_count, self.order_inversions, self.ids.value) = counters
        del self.exit_log[exit_len:]
        del self.lane_change_log[lc_len:]
        self.channel._rollback(channel_state)
        for injector, state in injector_states:
            injector._rollback(state)
        self._phase = "idle"
