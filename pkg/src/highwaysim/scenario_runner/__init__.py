"""Scenario configuration, recording and the command-line runner."""

from .config import EXAMPLE5_PRESET, Example5Params, ScenarioConfig, load_config
from .recording import (Detector, DetectorBank, DetectorRecord, TraceRecord, TraceWriter,
                        TrajectoryRecorder, attach_recorders, emit_trace, read_detectors, read_trace,
                        record_detector_crossings)
from .runner import RunResult, run
from .scenarios import BrokenCarController

__all__ = [
    "BrokenCarController", "Detector", "DetectorBank", "DetectorRecord", "EXAMPLE5_PRESET",
    "Example5Params", "RunResult", "ScenarioConfig", "TraceRecord", "TraceWriter",
    "TrajectoryRecorder", "attach_recorders", "emit_trace", "load_config", "read_detectors",
    "read_trace", "record_detector_crossings", "run",
]
