"""Independent reference implementations and measurement tools for validating the simulator."""

from .compare import ComparisonReport, ReplayExperiment, RunRecord, compare, replay_experiment
from .measure import DensitySeries, measure_density
from .platoon import OracleTrajectory, oracle_platoon
from .reference import ReferenceHighway
from .replay import Entry, ReplaySchedule, inflow_schedule, replay_injection

__all__ = [
    "ComparisonReport", "DensitySeries", "Entry", "OracleTrajectory", "ReferenceHighway", "ReplayExperiment",
    "ReplaySchedule", "RunRecord", "compare", "inflow_schedule", "measure_density", "oracle_platoon",
    "replay_experiment", "replay_injection",
]
