"""Density measurement over a road segment."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from ..scenario_runner.recording import TraceRecord

OBSTACLE_KINDS = ("obstacle", "broken")


@dataclass
class DensitySeries:
    segment: Tuple[float, float]
    direction: int
    points: List[Tuple[float, float]] = field(default_factory=list)  # (t, veh/km)

    def mean(self) -> float:
        if not self.points:
            return 0.0
        return sum(d for _, d in self.points) / len(self.points)

    def to_csv(self) -> str:
        return "time,veh_per_km\n" + "".join(f"{t:.4f},{d:.6f}\n" for t, d in self.points)


def measure_density(samples: Iterable[Sequence[TraceRecord]], segment: Tuple[float, float], direction: int = 1,
                    window: Optional[Tuple[float, float]] = None, length: Optional[float] = None,
                    exclude_kinds: Sequence[str] = OBSTACLE_KINDS) -> DensitySeries:
    """Vehicles per km with their rear in ``[x1, x2)`` of one direction's travel frame.

    Args:
        samples: trace samples, each a list of records sharing one time stamp.
        segment: (x1, x2) in the travel frame [m].
        direction: which carriageway to count.
        window: optional (t_start, t_end), inclusive, restricting the samples used.
        length: highway length; needed to convert westbound global x back to the travel frame.
        exclude_kinds: vehicle kinds left out of the count (immobile nodes by default).
    """
    x1, x2 = segment
    if x2 <= x1:
        raise ValueError("segment must have x2 > x1")
    if direction == -1 and length is None:
        raise ValueError("westbound density needs the highway length")
    km = (x2 - x1) / 1000.0
    out = DensitySeries((x1, x2), direction)
    for sample in samples:
        if not sample:
            continue
        t = sample[0].time
        if window is not None and not window[0] - 1e-9 <= t <= window[1] + 1e-9:
            continue
        count = 0
        for rec in sample:
            if rec.direction != direction or rec.kind in exclude_kinds:
                continue
            x = rec.x if direction == 1 else length - rec.x
            if x1 <= x < x2:
                count += 1
        out.points.append((t, count / km))
    return out
