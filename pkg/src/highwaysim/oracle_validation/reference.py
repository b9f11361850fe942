"""Naive multi-lane reference simulator.

This is the second implementation the highway is validated against. It shares
no code path with :mod:`highwaysim.highway` or :mod:`highwaysim.mobility_models`:
neighbours come from brute-force scans over every car, IDM uses the reordered
arithmetic of :func:`_formulas.reversed_order`, MOBIL is written out inline,
and vehicles enter through a constant-inflow generator rather than the
highway's min-gap rule. Only the vehicle profiles (plain data) are shared.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Tuple

from ..fleet import SEDAN, TRUCK, VehicleProfile
from ..scenario_runner.recording import Detector, DetectorRecord
from . import _formulas


class _Car:
    __slots__ = ("vid", "kind", "lane", "x", "v", "a", "idm", "mobil", "length")

    def __init__(self, vid, profile: VehicleProfile, lane, x, v):
        self.vid = vid
        self.kind = profile.kind
        self.lane = lane
        self.x = x
        self.v = v
        self.a = 0.0
        self.idm = profile.model
        self.mobil = profile.lane_change
        self.length = profile.length


class ReferenceHighway:
    """One-direction, multi-lane highway fed by a constant inflow per lane.

    Args:
        length: road length [m].
        lanes: number of lanes.
        inflow: vehicles per hour per lane offered at the entrance.
        delta_t: step [s].
        entry_gap: a lane accepts a new car only once its rearmost car is this far in [m].
        mix: probability that a new car is a sedan (else a truck).
        seed: seed for the sedan/truck draws.
        lane_change_period: steps between lane-change passes.
        detectors: crossing detectors (direction is ignored).
        perturbed: use the reordered IDM arithmetic (default) or the simulator's order.
    """

    def __init__(self, length: float = 1000.0, lanes: int = 2, inflow: float = 1200.0, delta_t: float = 0.1,
                 entry_gap: float = 10.0, mix: float = 0.8, seed: int = 0, lane_change_period: int = 10,
                 detectors=(Detector("A", 0.0), Detector("B", 500.0)), perturbed: bool = True,
                 profiles: Tuple[VehicleProfile, VehicleProfile] = (SEDAN, TRUCK)):
        self.length = length
        self.lanes = lanes
        self.rate = inflow / 3600.0
        self.dt = delta_t
        self.entry_gap = entry_gap
        self.mix = mix
        self.rng = random.Random(seed)
        self.period = lane_change_period
        self.detectors = list(detectors)
        self.accel = _formulas.reversed_order if perturbed else _formulas.same_order
        self.sedan, self.truck = profiles
        self.cars: List[_Car] = []
        self.due = [0.0] * lanes
        self.k = 0
        self.t = 0.0
        self.next_id = 1
        self.records: List[DetectorRecord] = []
        self.trajectories: Dict[int, List[Tuple[float, float, float, float]]] = {}
        self.lane_changes: List[Tuple[float, int, int, int]] = []
        self._prev: Dict[int, Tuple[float, float, float]] = {}

    # neighbourhood by brute force
    def _ahead(self, lane, x, skip=None) -> Optional[_Car]:
        best = None
        for c in self.cars:
            if c is not skip and c.lane == lane and c.x > x and (best is None or c.x < best.x):
                best = c
        return best

    def _behind(self, lane, x, skip=None, inclusive=False) -> Optional[_Car]:
        best = None
        for c in self.cars:
            if c is skip or c.lane != lane:
                continue
            if (c.x <= x if inclusive else c.x < x) and (best is None or c.x >= best.x):
                best = c
        return best

    def _rearmost(self, lane) -> Optional[_Car]:
        best = None
        for c in self.cars:
            if c.lane == lane and (best is None or c.x < best.x):
                best = c
        return best

    def _acc(self, car: _Car, leader: Optional[_Car]) -> float:
        if leader is None:
            return self.accel(car.idm, car.v, None, 0.0)
        return self.accel(car.idm, car.v, leader.x - car.x - car.length, car.v - leader.v)

    def _wants(self, car, cur_front, cur_back, new_front, new_back, to_left) -> bool:
        m = car.mobil
        s0 = car.idm.min_gap
        if cur_front is not None and cur_front.x - car.x - car.length < 0:
            return False
        if cur_back is not None and car.x - cur_back.x - cur_back.length < 0:
            return False
        if new_front is not None and new_front.x - car.x - car.length < s0:
            return False
        if new_back is not None and car.x - new_back.x - new_back.length < s0:
            return False
        new_loss = 0.0
        if new_back is not None:
            after = self._acc(new_back, car)
            if after < -m.max_safe_deceleration:
                return False
            new_loss = self._acc(new_back, new_front) - after
        old_loss = 0.0
        if cur_back is not None:
            old_loss = self._acc(cur_back, car) - self._acc(cur_back, cur_front)
        gain = self._acc(car, new_front) - self._acc(car, cur_front)
        bias = m.right_bias if to_left else -m.right_bias
        return gain > m.politeness * (new_loss + old_loss) + m.changing_threshold + bias

    def _lane_changes(self) -> None:
        moved = set()
        for lane in range(self.lanes):
            for car in sorted((c for c in self.cars if c.lane == lane), key=lambda c: c.x):
                if car.vid in moved or car.mobil is None:
                    continue
                cur_front = self._ahead(lane, car.x, skip=car)
                cur_back = self._behind(lane, car.x, skip=car)
                options = []
                for target, to_left in ((lane - 1, False), (lane + 1, True)):
                    if 0 <= target < self.lanes:
                        nf = self._ahead(target, car.x)
                        nb = self._behind(target, car.x, inclusive=True)
                        if self._wants(car, cur_front, cur_back, nf, nb, to_left):
                            options.append(target)
                if options:
                    self.lane_changes.append((self.t, car.vid, lane, options[0]))
                    car.lane = options[0]
                    moved.add(car.vid)

    def _inject(self) -> None:
        for lane in range(self.lanes):
            self.due[lane] += self.rate * self.dt
            if self.due[lane] < 1.0:
                continue
            rear = self._rearmost(lane)
            if rear is not None and rear.x < self.entry_gap:
                continue
            profile = self.sedan if self.rng.random() < self.mix else self.truck
            v0 = profile.model.desired_velocity
            v = v0 if rear is None else min(v0, rear.v)
            car = _Car(self.next_id, profile, lane, -profile.length, v)
            self.next_id += 1
            self.cars.append(car)
            self.due[lane] -= 1.0

    def _observe(self) -> None:
        now = self.t
        current = {}
        for car in self.cars:
            front = car.x + car.length
            current[car.vid] = (now, front, car.v)
            self.trajectories.setdefault(car.vid, []).append((now, car.x, car.v, car.a))
            before = self._prev.get(car.vid)
            if before is None:
                continue
            t0, f0, v0 = before
            for det in self.detectors:
                if f0 <= det.x < front:
                    frac = (det.x - f0) / (front - f0)
                    self.records.append(DetectorRecord(det.detector_id, t0 + frac * (now - t0), car.vid, car.kind,
                                                       v0 + frac * (car.v - v0), car.a, car.lane, 1))
        self._prev = current

    def step(self) -> None:
        if self.k % self.period == 0 and self.lanes > 1:
            self._lane_changes()
        accels = [self._acc(car, self._ahead(car.lane, car.x, skip=car)) for car in self.cars]
        for car, a in zip(self.cars, accels):
            v = car.v + a * self.dt
            if v < 0.0:
                a = -car.v / self.dt
                v = 0.0
            car.a = a
            car.v = v
            car.x = car.x + v * self.dt
        self.k += 1
        self.t = self.k * self.dt
        self.cars = [c for c in self.cars if c.x <= self.length]
        self._inject()
        self._observe()

    def run(self, duration: float) -> "ReferenceHighway":
        for _ in range(int(round(duration / self.dt))):
            self.step()
        return self
