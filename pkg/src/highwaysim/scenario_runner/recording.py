"""Trace, detector and trajectory recorders attached as highway observers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, IO, Iterable, List, NamedTuple, Sequence, Tuple

from ..fleet import to_global_x


class TraceRecord(NamedTuple):
    time: float
    vehicle_id: int
    kind: str
    direction: int
    lane: int
    x: float  # global frame
    y: float
    z: float
    velocity: float
    acceleration: float

    def format(self) -> str:
        return (f"{self.time:.4f} {self.vehicle_id} {self.kind} {self.direction} {self.lane} "
                f"{self.x:.6f} {self.y:.4f} {self.z:.4f} {self.velocity:.6f} {self.acceleration:.6f}")

    @classmethod
    def parse(cls, line: str) -> "TraceRecord":
        f = line.split()
        return cls(float(f[0]), int(f[1]), f[2], int(f[3]), int(f[4]), float(f[5]), float(f[6]),
                   float(f[7]), float(f[8]), float(f[9]))


def _steps_per_sample(sample_period: float, delta_t: float) -> int:
    k = round(sample_period / delta_t)
    if k < 1 or abs(k * delta_t - sample_period) > 1e-9 * max(1.0, sample_period):
        raise ValueError(f"sample period {sample_period} is not a whole multiple of delta_t {delta_t}")
    return k


def snapshot(highway) -> List[TraceRecord]:
    length = highway.config.length
    t = highway.time
    return [TraceRecord(t, v.vehicle_id, v.kind, v.direction, v.lane, to_global_x(v, length),
                        v.y, v.z, v.velocity, v.acceleration) for v in highway.on_road()]


class TraceWriter:
    """Writes one block of trace lines per sample; blocks are separated by a blank line."""

    def __init__(self, sink: IO[str], sample_period: float, delta_t: float):
        self.sink = sink
        self.every = _steps_per_sample(sample_period, delta_t)
        self.samples = 0

    def write_sample(self, highway) -> None:
        if self.samples:
            self.sink.write("\n")
        self.sink.write("".join(rec.format() + "\n" for rec in snapshot(highway)))
        self.samples += 1

    def __call__(self, highway) -> None:
        if highway.step_count % self.every == 0:
            self.write_sample(highway)


def emit_trace(highway, sink: IO[str], sample_period: float) -> TraceWriter:
    """Attach a trace writer to ``highway`` and write the current state as the first sample."""
    writer = TraceWriter(sink, sample_period, highway.config.delta_t)
    writer.write_sample(highway)
    highway.observers.append(writer)
    return writer


def read_trace(lines: Iterable[str]) -> List[List[TraceRecord]]:
    """Parse trace text back into samples."""
    samples: List[List[TraceRecord]] = []
    current: List[TraceRecord] = []
    for line in lines:
        if not line.strip():
            if current:
                samples.append(current)
            current = []
            continue
        current.append(TraceRecord.parse(line))
    if current:
        samples.append(current)
    return samples


@dataclass(frozen=True)
class Detector:
    detector_id: str
    x: float
    direction: int = 1


class DetectorRecord(NamedTuple):
    detector_id: str
    time: float
    vehicle_id: int
    kind: str
    velocity: float
    acceleration: float
    lane: int
    direction: int

    def format(self) -> str:
        return (f"{self.detector_id} {self.time:.6f} {self.vehicle_id} {self.kind} "
                f"{self.velocity:.6f} {self.acceleration:.6f} {self.lane} {self.direction}")

    @classmethod
    def parse(cls, line: str) -> "DetectorRecord":
        f = line.split()
        return cls(f[0], float(f[1]), int(f[2]), f[3], float(f[4]), float(f[5]), int(f[6]), int(f[7]))


def read_detectors(lines: Iterable[str]) -> List[DetectorRecord]:
    return [DetectorRecord.parse(line) for line in lines if line.strip()]


class DetectorBank:
    """Records front-bumper crossings of fixed detector positions.

    A crossing happens in a step where the front moves from at or before the
    detector to strictly beyond it. Time and speed are interpolated linearly
    inside the step; the acceleration is the one applied during that step.
    """

    def __init__(self, detectors: Sequence[Detector]):
        self.detectors = list(detectors)
        self.records: List[DetectorRecord] = []
        self._prev: Dict[int, Tuple[float, float, float]] = {}

    def prime(self, highway) -> None:
        self._prev = {v.vehicle_id: (highway.time, v.x + v.length, v.velocity) for v in highway.on_road()}

    def __call__(self, highway) -> None:
        record_detector_crossings(highway, self)


def record_detector_crossings(highway, bank: DetectorBank) -> List[DetectorRecord]:
    now = highway.time
    prev = bank._prev
    current: Dict[int, Tuple[float, float, float]] = {}
    new_records = []
    for vehicle in highway.on_road():
        state = (now, vehicle.x + vehicle.length, vehicle.velocity)
        current[vehicle.vehicle_id] = state
        before = prev.get(vehicle.vehicle_id)
        if before is None:
            continue
        t0, f0, v0 = before
        f1 = state[1]
        for det in bank.detectors:
            if det.direction == vehicle.direction and f0 <= det.x < f1:
                frac = (det.x - f0) / (f1 - f0)
                new_records.append(DetectorRecord(
                    det.detector_id, t0 + frac * (now - t0), vehicle.vehicle_id, vehicle.kind,
                    v0 + frac * (vehicle.velocity - v0), vehicle.acceleration, vehicle.lane, vehicle.direction))
    new_records.sort(key=lambda r: (r.detector_id, r.time, r.vehicle_id))
    bank.records.extend(new_records)
    bank._prev = current
    return new_records


class TrajectoryRecorder:
    """Keeps (time, x, v, a) per vehicle in the travel frame after every step."""

    def __init__(self):
        self.trajectories: Dict[int, List[Tuple[float, float, float, float]]] = {}

    def sample(self, highway) -> None:
        t = highway.time
        for v in highway.on_road():
            self.trajectories.setdefault(v.vehicle_id, []).append((t, v.x, v.velocity, v.acceleration))

    __call__ = sample


def attach_recorders(highway, detectors: Sequence[Detector] = (), trajectories: bool = False):
    """Prime and attach a detector bank (and optionally a trajectory recorder)."""
    bank = DetectorBank(detectors)
    bank.prime(highway)
    highway.observers.append(bank)
    recorder = None
    if trajectories:
        recorder = TrajectoryRecorder()
        recorder.sample(highway)
        highway.observers.append(recorder)
    return bank, recorder
