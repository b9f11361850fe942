"""Rebuild a run's inflow from entrance detector records.

Replaying the vehicles another simulator saw at the entrance removes the
difference between injection models, so two simulators can be compared on
the same traffic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Deque, Dict, Iterable, List, Optional, Sequence, Tuple

from ..fleet import PROFILES, Vehicle, make_vehicle
from ..scenario_runner.recording import DetectorRecord

TIME_EPS = 1e-9


@dataclass(frozen=True)
class Entry:
    time: float
    kind: str
    velocity: float
    lane: int
    direction: int = 1
    vehicle_id: Optional[int] = None


def _default_factory(kind: str, vehicle_id: int) -> Vehicle:
    return make_vehicle(PROFILES[kind], vehicle_id)


@dataclass
class ReplaySchedule:
    """Time-ordered list of entrance arrivals that feeds a highway as an injector.

    Each arrival enters at the first step whose time is at or after its
    recorded time. Arrivals wait per lane in FIFO order while the lane's
    rearmost vehicle is closer than ``min_entry_gap`` to the start. When two
    arrivals for one lane fall into the same step, the later one is stacked
    directly behind the first at the standstill gap so ordering is preserved.
    """

    entries: List[Entry]
    factory: Callable[[str, int], Vehicle] = _default_factory
    min_entry_gap: float = 0.0
    created: List[Tuple[float, int]] = field(default_factory=list)
    _cursor: int = 0
    _waiting: Dict[Tuple[int, int], Deque[Entry]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def attach(self, highway) -> "ReplaySchedule":
        highway.injectors.append(self)
        return self

    @property
    def done(self) -> bool:
        return self._cursor >= len(self.entries) and not any(self._waiting.values())

    def __call__(self, highway) -> None:
        now = highway.time
        while self._cursor < len(self.entries) and self.entries[self._cursor].time <= now + TIME_EPS:
            entry = self.entries[self._cursor]
            self._waiting.setdefault((entry.direction, entry.lane), deque()).append(entry)
            self._cursor += 1
        for key in highway.lane_keys:
            queue = self._waiting.get(key)
            if not queue:
                continue
            placed_now = False
            lane = highway.lanes[key]
            while queue:
                rear = lane[0] if lane else None
                if rear is not None and rear.x < self.min_entry_gap and not placed_now:
                    break
                entry = queue.popleft()
                vid = entry.vehicle_id if entry.vehicle_id is not None else highway.next_vehicle_id()
                vehicle = self.factory(entry.kind, vid)
                vehicle.direction, vehicle.lane = key
                if placed_now:
                    vehicle.x = rear.x - vehicle.model.min_gap - vehicle.length
                else:
                    vehicle.x = -vehicle.length
                vehicle.velocity = entry.velocity if rear is None else min(entry.velocity, rear.velocity)
                highway.add_vehicle(vehicle)
                highway.injected_count += 1
                self.created.append((now, vid))
                placed_now = True

    def _checkpoint(self):
        return self._cursor, {k: list(q) for k, q in self._waiting.items()}, len(self.created)

    def _rollback(self, state) -> None:
        self._cursor, waiting, n = state
        self._waiting = {k: deque(q) for k, q in waiting.items()}
        del self.created[n:]


def replay_injection(records: Iterable[DetectorRecord], factory: Optional[Callable[[str, int], Vehicle]] = None,
                     min_entry_gap: float = 0.0, keep_ids: bool = True) -> ReplaySchedule:
    """Turn entrance detector records into an injection schedule.

    Args:
        records: crossings of the entrance detector, in time order.
        factory: builds a vehicle from (kind, id); defaults to the stock profiles.
        min_entry_gap: lane must be this clear at the entrance [m] before the next arrival.
        keep_ids: reuse the recorded vehicle ids so runs can be matched vehicle by vehicle.

    Raises:
        ValueError: if the record times decrease.
    """
    entries = []
    last = float("-inf")
    for rec in records:
        if rec.time < last:
            raise ValueError(f"detector records not in time order: {rec.time} after {last}")
        last = rec.time
        entries.append(Entry(rec.time, rec.kind, rec.velocity, rec.lane, rec.direction,
                             rec.vehicle_id if keep_ids else None))
    return ReplaySchedule(entries, factory or _default_factory, min_entry_gap)


def inflow_schedule(rate: float, duration: float, lanes: Sequence[int] = (0,), velocity: float = 30.0,
                    kind: str = "sedan", direction: int = 1, start_id: int = 1) -> List[Entry]:
    """Constant-headway arrivals at ``rate`` vehicles/h per lane.

    Lanes are offset from each other by a fraction of the headway so that the
    entrance does not see simultaneous arrivals.
    """
    if rate <= 0:
        return []
    headway = 3600.0 / rate
    n = len(lanes)
    out = []
    for i, lane in enumerate(lanes):
        t = headway * i / n
        while t < duration:
            out.append((t, lane))
            t += headway
    out.sort()
    return [Entry(t, kind, velocity, lane, direction, start_id + k) for k, (t, lane) in enumerate(out)]
