"""Scenario configuration: ``key = value`` text with ``#`` comments."""

from __future__ import annotations

import dataclasses
import logging
import string
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

from ..highway import ConfigError, HighwayConfig
from .recording import Detector

logger = logging.getLogger(__name__)

SCENARIOS = ("freeflow", "example5", "custom")


@dataclass
class Example5Params:
    """Knobs of the broken-car / police-car scenario (artifact defaults)."""

    obstacle_x: float = 500.0
    obstacle_lane: int = 0
    broadcast_period: float = 5.0
    obstacle_range: float = 400.0
    police_lane: int = 1
    police_initial_velocity: float = 30.0
    police_desired_velocity: float = 45.0
    police_max_acceleration: float = 2.5
    police_range: float = 500.0
    stop_tolerance: float = 5.0


EXAMPLE5_PRESET: Dict[str, Any] = {
    "length": 1000.0,
    "lanes_per_direction": 2,
    "bidirectional": True,
    "lane_width": 5.0,
    "median_gap": 5.0,
    "injection_mix": 0.8,
    "min_gap": 10.0,
    "auto_injection": True,
    "duration": 180.0,
}

PRESETS: Dict[str, Dict[str, Any]] = {"freeflow": {}, "example5": EXAMPLE5_PRESET, "custom": {}}


@dataclass
class ScenarioConfig:
    highway: HighwayConfig = field(default_factory=HighwayConfig)
    scenario: str = "freeflow"
    duration: float = 60.0
    trace_sample_period: float = 1.0
    detectors: List[Detector] = field(default_factory=list)
    hooks: Optional[str] = None
    example5: Example5Params = field(default_factory=Example5Params)
    defaults_applied: List[str] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.highway.seed

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.highway.delta_t))


_HIGHWAY_KEYS = {f.name: f.default for f in dataclasses.fields(HighwayConfig)}
_EXAMPLE5_KEYS = {f.name: f.default for f in dataclasses.fields(Example5Params)}
_RUN_KEYS = {"scenario": "freeflow", "duration": 60.0, "trace_sample_period": 1.0,
             "detectors": None, "hooks": None}
KNOWN_KEYS = {**_HIGHWAY_KEYS, **_EXAMPLE5_KEYS, **_RUN_KEYS}


def _parse_bool(key: str, raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError([f"{key}: expected a boolean, got {raw!r}"])


def parse_detectors(raw: str) -> List[Detector]:
    """``"0:1, 500:1"`` -> detectors A at x=0 and B at x=500, eastbound."""
    out = []
    for i, item in enumerate(p.strip() for p in raw.split(",") if p.strip()):
        x, _, direction = item.partition(":")
        name = string.ascii_uppercase[i] if i < 26 else f"D{i}"
        out.append(Detector(name, float(x), int(direction) if direction else 1))
    return out


def _convert(key: str, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    default = KNOWN_KEYS[key]
    try:
        if key == "detectors":
            return parse_detectors(raw)
        if key in ("scenario", "hooks"):
            return raw.strip()
        if isinstance(default, bool):
            return _parse_bool(key, raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError([f"{key}: cannot parse {raw!r} ({exc})"]) from None
    return raw


def parse_lines(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError([f"line {lineno}: expected 'key = value', got {line!r}"])
        if key not in KNOWN_KEYS:
            raise ConfigError([f"line {lineno}: unknown key {key!r}"])
        values[key] = value.strip()
    return values


def load_config(text: str, overrides: Optional[Mapping[str, Any]] = None) -> ScenarioConfig:
    """Parse and validate a scenario config.

    Precedence, lowest first: built-in defaults, the scenario preset, the file,
    then ``overrides`` (CLI flags). Every value not given explicitly is logged
    as an applied default.
    """
    given: Dict[str, Any] = dict(parse_lines(text))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in KNOWN_KEYS:
            raise ConfigError([f"unknown key {key!r}"])
        given[key] = value

    scenario = _convert("scenario", given.get("scenario", "freeflow"))
    if scenario not in SCENARIOS:
        raise ConfigError([f"scenario={scenario!r} not one of {', '.join(SCENARIOS)}"])
    preset = PRESETS[scenario]

    values: Dict[str, Any] = {}
    applied: List[str] = []
    for key, default in KNOWN_KEYS.items():
        if key in given:
            values[key] = _convert(key, given[key])
        else:
            values[key] = preset.get(key, default)
            source = f"{scenario} preset" if key in preset else "default"
            applied.append(f"{key} = {values[key]!r} ({source})")
    values["scenario"] = scenario

    highway = HighwayConfig(**{k: values[k] for k in _HIGHWAY_KEYS})
    problems = highway.violations()
    if values["detectors"] is None:
        length = highway.length
        values["detectors"] = [Detector("A", 0.0, 1), Detector("B", min(500.0, length), 1)]
    cfg = ScenarioConfig(
        highway=highway,
        scenario=scenario,
        duration=values["duration"],
        trace_sample_period=values["trace_sample_period"],
        detectors=values["detectors"],
        hooks=values["hooks"],
        example5=Example5Params(**{k: values[k] for k in _EXAMPLE5_KEYS}),
        defaults_applied=applied,
    )
    problems.extend(scenario_violations(cfg))
    if problems:
        raise ConfigError(problems)
    for line in applied:
        logger.info("config default applied: %s", line)
    return cfg


def scenario_violations(cfg: ScenarioConfig) -> List[str]:
    out = []
    hw = cfg.highway
    if not cfg.duration > 0:
        out.append(f"duration={cfg.duration} must be > 0")
    if hw.delta_t > 0:
        k = round(cfg.trace_sample_period / hw.delta_t)
        if k < 1 or abs(k * hw.delta_t - cfg.trace_sample_period) > 1e-9:
            out.append(f"trace_sample_period={cfg.trace_sample_period} must be a positive multiple "
                       f"of delta_t={hw.delta_t}")
    for det in cfg.detectors:
        if not 0 <= det.x <= hw.length:
            out.append(f"detector {det.detector_id} at x={det.x} outside [0, {hw.length}]")
        if det.direction not in hw.directions:
            out.append(f"detector {det.detector_id} direction {det.direction} not in {hw.directions}")
    if cfg.scenario == "custom" and not cfg.hooks:
        out.append("scenario=custom needs hooks = <path to a Python file defining the handlers>")
    if cfg.scenario == "example5":
        p = cfg.example5
        if hw.lanes_per_direction < 2:
            out.append("example5 needs lanes_per_direction >= 2")
        if not 0 <= p.obstacle_x <= hw.length:
            out.append(f"obstacle_x={p.obstacle_x} outside [0, {hw.length}]")
        if not p.broadcast_period > 0:
            out.append(f"broadcast_period={p.broadcast_period} must be > 0")
        for name in ("obstacle_lane", "police_lane"):
            lane = getattr(p, name)
            if not 0 <= lane < hw.lanes_per_direction:
                out.append(f"{name}={lane} outside [0, {hw.lanes_per_direction - 1}]")
    return out
