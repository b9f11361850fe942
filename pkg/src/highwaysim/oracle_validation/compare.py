"""Vehicle-by-vehicle comparison of two runs, plus the detector-replay experiment."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from ..highway import Highway, HighwayConfig
from ..scenario_runner.recording import (Detector, DetectorRecord, attach_recorders,
                                         read_detectors, read_trace)
from .reference import ReferenceHighway
from .replay import replay_injection

Trajectories = Dict[int, List[Tuple[float, float, float, float]]]


@dataclass
class RunRecord:
    """What a comparison needs from one run."""

    trajectories: Trajectories = field(default_factory=dict)
    detector_records: List[DetectorRecord] = field(default_factory=list)

    @classmethod
    def from_files(cls, trace_path, detector_path=None, length: Optional[float] = None) -> "RunRecord":
        """Load a run from ``trace.txt`` (and optionally ``detectors.txt``).

        Westbound positions are mapped back to the travel frame when ``length`` is given.
        """
        traj: Trajectories = {}
        with open(trace_path, encoding="utf-8") as fh:
            for sample in read_trace(fh):
                for r in sample:
                    x = length - r.x if (r.direction == -1 and length is not None) else r.x
                    traj.setdefault(r.vehicle_id, []).append((r.time, x, r.velocity, r.acceleration))
        records = []
        if detector_path is not None and Path(detector_path).exists():
            with open(detector_path, encoding="utf-8") as fh:
                records = read_detectors(fh)
        return cls(traj, records)


@dataclass
class ComparisonReport:
    """Deltas between two runs on matched vehicles.

    Detector deltas compare crossings of one detector: the position delta is
    the distance one vehicle covers in the crossing-time difference, at the
    mean of the two crossing speeds.
    """

    detector_id: str
    detector_pairs: int = 0
    detector_max_dx: float = 0.0
    detector_mean_dx: float = 0.0
    detector_max_dv: float = 0.0
    detector_mean_dv: float = 0.0
    per_vehicle: List[Tuple[int, float, float]] = field(default_factory=list)  # (id, dx, dv) at the detector
    trajectory_samples: int = 0
    trajectory_max_dx: float = 0.0
    trajectory_mean_dx: float = 0.0
    trajectory_max_dv: float = 0.0
    trajectory_mean_dv: float = 0.0
    unmatched: List[int] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return bool(self.unmatched)

    def format(self) -> str:
        lines = [
            f"detector = {self.detector_id}",
            f"detector_pairs = {self.detector_pairs}",
            f"detector_max_dx_m = {self.detector_max_dx:.9g}",
            f"detector_mean_dx_m = {self.detector_mean_dx:.9g}",
            f"detector_max_dv_mps = {self.detector_max_dv:.9g}",
            f"detector_mean_dv_mps = {self.detector_mean_dv:.9g}",
            f"trajectory_samples = {self.trajectory_samples}",
            f"trajectory_max_dx_m = {self.trajectory_max_dx:.9g}",
            f"trajectory_mean_dx_m = {self.trajectory_mean_dx:.9g}",
            f"trajectory_max_dv_mps = {self.trajectory_max_dv:.9g}",
            f"trajectory_mean_dv_mps = {self.trajectory_mean_dv:.9g}",
            f"unmatched = {' '.join(map(str, self.unmatched)) or 'none'}",
        ]
        lines += [f"vehicle {vid} dx_m = {dx:.9g} dv_mps = {dv:.9g}" for vid, dx, dv in self.per_vehicle]
        return "\n".join(lines) + "\n"


def _time_key(t: float) -> int:
    return round(t * 1e6)


def compare(main: RunRecord, other: RunRecord, detector_id: str = "B") -> ComparisonReport:
    """Compare two runs vehicle by vehicle.

    Vehicles present in only one run (at the detector or in the trajectories)
    are listed in ``unmatched`` and left out of every statistic.
    """
    report = ComparisonReport(detector_id)
    a = {r.vehicle_id: r for r in main.detector_records if r.detector_id == detector_id}
    b = {r.vehicle_id: r for r in other.detector_records if r.detector_id == detector_id}
    unmatched = set(a) ^ set(b)
    for vid in sorted(set(a) & set(b)):
        ra, rb = a[vid], b[vid]
        dx = abs(ra.time - rb.time) * (ra.velocity + rb.velocity) / 2.0
        dv = abs(ra.velocity - rb.velocity)
        report.per_vehicle.append((vid, dx, dv))
    if report.per_vehicle:
        report.detector_pairs = len(report.per_vehicle)
        report.detector_max_dx = max(d[1] for d in report.per_vehicle)
        report.detector_max_dv = max(d[2] for d in report.per_vehicle)
        report.detector_mean_dx = sum(d[1] for d in report.per_vehicle) / report.detector_pairs
        report.detector_mean_dv = sum(d[2] for d in report.per_vehicle) / report.detector_pairs

    unmatched |= set(main.trajectories) ^ set(other.trajectories)
    sum_dx = sum_dv = 0.0
    n = 0
    for vid in sorted(set(main.trajectories) & set(other.trajectories)):
        if vid in unmatched:
            continue
        theirs = {_time_key(t): (x, v) for t, x, v, _ in other.trajectories[vid]}
        for t, x, v, _ in main.trajectories[vid]:
            match = theirs.get(_time_key(t))
            if match is None:
                continue
            dx = abs(x - match[0])
            dv = abs(v - match[1])
            sum_dx += dx
            sum_dv += dv
            n += 1
            report.trajectory_max_dx = max(report.trajectory_max_dx, dx)
            report.trajectory_max_dv = max(report.trajectory_max_dv, dv)
    if n:
        report.trajectory_samples = n
        report.trajectory_mean_dx = sum_dx / n
        report.trajectory_mean_dv = sum_dv / n
    report.unmatched = sorted(unmatched)
    return report


@dataclass
class ReplayExperiment:
    reference: ReferenceHighway
    highway: Highway
    reference_run: RunRecord
    replay_run: RunRecord
    report: ComparisonReport


def replay_experiment(duration: float = 300.0, lanes: int = 2, inflow: float = 1200.0, seed: int = 0,
                      length: float = 1000.0, delta_t: float = 0.1, perturbed: bool = True,
                      detectors: Sequence[Detector] = (Detector("A", 0.0), Detector("B", 500.0))) -> ReplayExperiment:
    """Run the reference highway, replay its entrance records into the simulator, compare at B.

    The reference highway generates the traffic with its own inflow model and
    records every vehicle at detector A. Those records are replayed into a
    :class:`Highway` with auto-injection off, which is then compared with the
    reference vehicle by vehicle.
    """
    ref = ReferenceHighway(length=length, lanes=lanes, inflow=inflow, delta_t=delta_t, seed=seed,
                           detectors=detectors, perturbed=perturbed).run(duration)
    entrance = detectors[0].detector_id
    schedule = replay_injection([r for r in ref.records if r.detector_id == entrance])
    highway = Highway(HighwayConfig(length=length, lanes_per_direction=lanes, delta_t=delta_t,
                                    auto_injection=False, seed=seed))
    schedule.attach(highway)
    bank, recorder = attach_recorders(highway, detectors, trajectories=True)
    highway.run(duration)
    ref_run = RunRecord(ref.trajectories, ref.records)
    sim_run = RunRecord(recorder.trajectories, bank.records)
    report = compare(sim_run, ref_run, detectors[-1].detector_id)
    return ReplayExperiment(ref, highway, ref_run, sim_run, report)
