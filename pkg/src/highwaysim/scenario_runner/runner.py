"""Run a configured scenario and write its artifacts."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Tuple

from ..highway import Highway
from .config import ScenarioConfig
from .recording import DetectorBank, attach_recorders, emit_trace
from .scenarios import build_controller

logger = logging.getLogger(__name__)

TRACE_FILE = "trace.txt"
DETECTOR_FILE = "detectors.txt"
CHANNEL_FILE = "channel.log"
SUMMARY_FILE = "summary.txt"


@dataclass
class RunResult:
    config: ScenarioConfig
    highway: Highway
    controller: Any
    detectors: DetectorBank
    summary: List[Tuple[str, Any]] = field(default_factory=list)
    out_dir: Optional[Path] = None

    def summary_dict(self) -> dict:
        return dict(self.summary)


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return "none" if value is None else str(value)


def format_summary(items) -> str:
    return "".join(f"{key} = {_format_value(value)}\n" for key, value in items)


class _DensityMeter:
    def __init__(self, length_km: float):
        self.length_km = length_km
        self.total = 0.0
        self.samples = 0

    def __call__(self, highway) -> None:
        self.total += sum(1 for v in highway.on_road() if not v.is_obstacle) / self.length_km
        self.samples += 1

    @property
    def mean(self) -> float:
        return self.total / self.samples if self.samples else 0.0


def run(cfg: ScenarioConfig, out_dir) -> RunResult:
    """Build the highway for ``cfg``, step it for the configured duration, write the outputs.

    Writes ``trace.txt``, ``detectors.txt``, ``channel.log`` and ``summary.txt``
    into ``out_dir`` (created if missing).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    controller, hooks = build_controller(cfg)
    highway = Highway(cfg.highway, hooks)
    density = _DensityMeter(cfg.highway.length / 1000.0)

    with open(out / TRACE_FILE, "w", encoding="utf-8", newline="\n") as trace:
        emit_trace(highway, trace, cfg.trace_sample_period)
        bank, _ = attach_recorders(highway, cfg.detectors)
        highway.observers.append(density)
        steps = cfg.steps
        logger.info("running %s for %d steps (%.1f s simulated)", cfg.scenario, steps, cfg.duration)
        for _ in range(steps):
            highway.step()

    (out / DETECTOR_FILE).write_text("".join(r.format() + "\n" for r in bank.records), encoding="utf-8")
    (out / CHANNEL_FILE).write_text(highway.channel.export(), encoding="utf-8")

    counts = highway.channel.counts()
    summary: List[Tuple[str, Any]] = [
        ("scenario", cfg.scenario),
        ("seed", cfg.seed),
        ("duration", cfg.duration),
        ("steps", highway.step_count),
        ("vehicles_added", highway.added_count),
        ("vehicles_injected", highway.injected_count),
        ("vehicles_exited", highway.exited_count),
        ("vehicles_on_road", highway.vehicle_count()),
        ("mean_density_veh_per_km", density.mean),
        ("lane_changes", len(highway.lane_change_log)),
        ("order_inversions", highway.order_inversions),
        ("messages_sent", counts["SEND"]),
        ("messages_delivered", counts["DELIVER"]),
        ("messages_dropped", counts["DROP"]),
        ("detector_records", len(bank.records)),
    ]
    if controller is not None and hasattr(controller, "summary"):
        summary.extend(controller.summary(highway))
    (out / SUMMARY_FILE).write_text(format_summary(summary), encoding="utf-8")
    return RunResult(cfg, highway, controller, bank, summary, out)
