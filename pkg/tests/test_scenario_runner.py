import io
import logging
import pytest

from highwaysim.fleet import VehicleProfile, make_obstacle
from highwaysim.highway import ConfigError, Highway, HighwayConfig
from highwaysim.mobility_models import IdmParams
from highwaysim.scenario_runner import (Detector, DetectorBank, DetectorRecord, TraceRecord, emit_trace,
                                        load_config, read_detectors, read_trace, run)
from highwaysim.scenario_runner.cli import main
from helpers import place


def test_empty_config_defaults(caplog):
    with caplog.at_level(logging.INFO):
        cfg = load_config("")
    hw = cfg.highway
    assert (hw.length, hw.lanes_per_direction, hw.bidirectional, hw.delta_t, cfg.seed) == (1000.0, 1, False, 0.1, 0)
    assert "config default applied: length" in caplog.text
    assert [d.x for d in cfg.detectors] == [0.0, 500.0]


def test_lane_bound_named():
    with pytest.raises(ConfigError) as err:
        load_config("lanes_per_direction = 6")
    assert "lanes_per_direction" in str(err.value) and "[1, 5]" in str(err.value)


def test_unknown_key_and_bad_value():
    with pytest.raises(ConfigError, match="unknown key"):
        load_config("colour = red")
    with pytest.raises(ConfigError, match="length"):
        load_config("length = long")
    with pytest.raises(ConfigError, match="duration"):
        load_config("duration = 0")
    with pytest.raises(ConfigError, match="detector"):
        load_config("detectors = 0:1, 2000:1")


def test_example5_preset():
    cfg = load_config("scenario = example5")
    hw = cfg.highway
    assert (hw.length, hw.lanes_per_direction, hw.bidirectional) == (1000.0, 2, True)
    assert (hw.lane_width, hw.median_gap, hw.injection_mix, hw.min_gap) == (5.0, 5.0, 0.8, 10.0)


def test_precedence_file_then_overrides():
    cfg = load_config("scenario = example5\nmin_gap = 20  # wider\nseed = 3", {"seed": 9, "duration": None})
    assert cfg.highway.min_gap == 20.0 and cfg.seed == 9 and cfg.duration == 180.0


def _cruiser(v0):
    return VehicleProfile("sedan", IdmParams(desired_velocity=v0), None, 4.5, 1.8)


def test_trace_layout():
    hw = Highway(HighwayConfig(auto_injection=False, length=5000.0))
    place(hw, "sedan", 1, 0.0, v=10.0)
    place(hw, "sedan", 2, 100.0, v=10.0)
    sink = io.StringIO()
    emit_trace(hw, sink, 1.0)
    hw.run(2.0)
    lines = sink.getvalue().splitlines()
    assert len([l for l in lines if l]) == 6 and lines.count("") == 2
    samples = read_trace(lines)
    assert [s[0].time for s in samples] == [0.0, 1.0, 2.0]
    assert samples[0][0].format() == lines[0]
    assert lines[0] == "0.0000 1 sedan 1 0 0.000000 -2.8500 0.0000 10.000000 0.000000"


def test_trace_westbound_global_x_and_obstacle():
    hw = Highway(HighwayConfig(auto_injection=False, bidirectional=True))
    place(hw, _cruiser(10.0), 1, 100.0, v=10.0, direction=-1)
    hw.add_vehicle(make_obstacle(2, (300.0, 0.0, 0.0), lane=0, direction=1))
    sink = io.StringIO()
    emit_trace(hw, sink, 0.5)
    hw.run(1.0)
    samples = read_trace(sink.getvalue().splitlines())
    west = [r for s in samples for r in s if r.vehicle_id == 1]
    # hand-converted: global x = 1000 - travel x
    assert [r.x for r in west] == pytest.approx([900.0, 895.0, 890.0])
    obst = [r for s in samples for r in s if r.vehicle_id == 2]
    assert len(obst) == len(samples) and all(r.velocity == 0.0 and r.acceleration == 0.0 for r in obst)


def test_trace_sample_period_must_divide():
    hw = Highway(HighwayConfig(auto_injection=False))
    with pytest.raises(ValueError):
        emit_trace(hw, io.StringIO(), 0.15)


def test_detector_interpolation():
    hw = Highway(HighwayConfig(auto_injection=False))
    car = place(hw, _cruiser(20.0), 1, 499.0 - 4.5, v=20.0)
    bank = DetectorBank([Detector("B", 500.0)])
    bank.prime(hw)
    hw.observers.append(bank)
    hw.step()
    (rec,) = bank.records
    # front goes 499 -> 501 in 0.1 s at constant speed
    assert rec.time == pytest.approx((500.0 - 499.0) / 20.0, abs=1e-12)
    assert rec.velocity == 20.0 and rec.vehicle_id == car.vehicle_id
    hw.run(10.0)
    assert len(bank.records) == 1


def test_detector_no_records_for_stopped_or_beyond():
    hw = Highway(HighwayConfig(auto_injection=False))
    place(hw, "sedan", 1, 480.0, v=0.0)
    hw.add_vehicle(make_obstacle(2, (490.0, 0.0, 0.0), lane=0, direction=1))
    place(hw, "sedan", 3, 600.0, v=30.0)
    bank = DetectorBank([Detector("B", 500.0)])
    bank.prime(hw)
    hw.observers.append(bank)
    hw.run(5.0)
    assert bank.records == []


def test_detector_record_roundtrip():
    rec = DetectorRecord("B", 12.345678, 7, "truck", 20.5, -0.25, 1, -1)
    assert read_detectors([rec.format()]) == [rec]
    tr = TraceRecord(1.0, 3, "sedan", 1, 0, 12.5, -2.85, 0.0, 30.0, 0.0)
    assert TraceRecord.parse(tr.format()) == tr


def test_freeflow_run(tmp_path):
    cfg = load_config("duration = 60\nmin_gap = 30")
    result = run(cfg, tmp_path)
    for name in ("trace.txt", "detectors.txt", "channel.log", "summary.txt"):
        assert (tmp_path / name).exists()
    samples = read_trace((tmp_path / "trace.txt").read_text().splitlines())
    last = {}
    for sample in samples:
        for r in sample:
            assert r.x >= last.get(r.vehicle_id, -1e9)
            last[r.vehicle_id] = r.x
    summary = (tmp_path / "summary.txt").read_text()
    assert "vehicles_injected = " in summary and "mean_density_veh_per_km" in summary
    hw = result.highway
    assert hw.added_count == hw.vehicle_count() + hw.exited_count


def test_one_step_run(tmp_path):
    result = run(load_config("duration = 0.1"), tmp_path)
    assert result.highway.step_count == 1


def test_example5_behaviour(tmp_path):
    result = run(load_config("scenario = example5"), tmp_path)
    s = result.summary_dict()
    ctrl = result.controller
    assert s["police_final_velocity"] == 0.0 and s["police_final_lane"] == 1
    assert abs(s["police_final_x"] - 500.0) <= 5.0
    # obstacle range 400 m: the police car (entering at 30 m/s, accelerating) is within
    # 400 m of x=500 well before t=5 s, so the t=5 s beacon is the first one it hears
    assert s["police_first_request_time"] == pytest.approx(5.1)
    assert s["police_first_request_time"] < s["police_arrival_time"]
    assert ctrl.replies_sent == ctrl.requests_received == ctrl.replies_heard
    assert s["order_inversions"] == 0


def test_custom_hook_script(tmp_path):
    script = tmp_path / "hooks.py"
    script.write_text(
        "from highwaysim.fleet import make_vehicle\n"
        "def init_vehicle(highway, ids):\n"
        "    v = make_vehicle('truck', ids.take())\n"
        "    v.lane, v.direction, v.x = 0, 1, 200.0\n"
        "    highway.add_vehicle(v)\n"
        "    return True\n"
    )
    cfg = load_config(f"scenario = custom\nhooks = {script}\nauto_injection = false\nduration = 1")
    result = run(cfg, tmp_path / "out")
    assert result.highway.find_vehicle(1).kind == "truck"


def test_cli_run_and_tools(tmp_path, capsys):
    conf = tmp_path / "c.txt"
    conf.write_text("min_gap = 30\n")
    assert main(["run", str(conf), "--seed", "4", "--duration", "30", "--out-dir", str(tmp_path / "a")]) == 0
    assert "seed = 4" in (tmp_path / "a" / "summary.txt").read_text()
    assert main(["compare", str(tmp_path / "a"), str(tmp_path / "a")]) == 0
    report = (tmp_path / "a" / "report.txt").read_text()
    assert "detector_max_dx_m = 0" in report
    assert main(["density", str(tmp_path / "a" / "trace.txt"), "--window", "10", "30"]) == 0
    assert (tmp_path / "a" / "density.csv").read_text().startswith("time,veh_per_km\n")
    assert main(["run", "--out-dir", str(tmp_path / "b"), "--duration", "-1"]) == 2
    assert main(["run", str(tmp_path / "missing.txt")]) == 1
