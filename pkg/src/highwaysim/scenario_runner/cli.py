"""``highwaysim`` command line."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..highway import ConfigError, StepError
from .config import SCENARIOS, load_config
from .runner import DETECTOR_FILE, SUMMARY_FILE, TRACE_FILE, run

logger = logging.getLogger("highwaysim")

REPORT_FILE = "report.txt"
DENSITY_FILE = "density.csv"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="highwaysim", description="IDM/MOBIL highway simulator with a VANET channel.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log applied defaults and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write trace, detector, channel and summary files")
    p_run.add_argument("config", nargs="?", help="key = value config file (omit for all defaults)")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--duration", type=float, help="simulated seconds")
    p_run.add_argument("--out-dir", default="out", help="output directory (default: out)")
    p_run.add_argument("--scenario", choices=SCENARIOS)

    p_cmp = sub.add_parser("compare", help="compare two run directories vehicle by vehicle")
    p_cmp.add_argument("main", help="run directory of the simulator")
    p_cmp.add_argument("other", help="run directory to compare against")
    p_cmp.add_argument("--detector", default="B")
    p_cmp.add_argument("--length", type=float, default=None, help="highway length, for westbound traces")
    p_cmp.add_argument("--out", default=None, help=f"report path (default: <main>/{REPORT_FILE})")

    p_den = sub.add_parser("density", help="density time series of a segment from a trace")
    p_den.add_argument("trace", help="trace.txt path")
    p_den.add_argument("--segment", nargs=2, type=float, default=(0.0, 500.0), metavar=("X1", "X2"))
    p_den.add_argument("--direction", type=int, choices=(1, -1), default=1)
    p_den.add_argument("--window", nargs=2, type=float, default=None, metavar=("T1", "T2"))
    p_den.add_argument("--length", type=float, default=None, help="highway length, for westbound segments")
    p_den.add_argument("--out", default=None, help=f"csv path (default: next to the trace, {DENSITY_FILE})")
    return parser


def _cmd_run(args) -> int:
    text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    overrides = {"seed": args.seed, "duration": args.duration, "scenario": args.scenario}
    cfg = load_config(text, overrides)
    result = run(cfg, args.out_dir)
    print(f"wrote {TRACE_FILE}, {DETECTOR_FILE}, channel.log, {SUMMARY_FILE} to {result.out_dir}")
    return 0


def _cmd_compare(args) -> int:
    from ..oracle_validation.compare import RunRecord, compare

    main_dir, other_dir = Path(args.main), Path(args.other)
    a = RunRecord.from_files(main_dir / TRACE_FILE, main_dir / DETECTOR_FILE, args.length)
    b = RunRecord.from_files(other_dir / TRACE_FILE, other_dir / DETECTOR_FILE, args.length)
    report = compare(a, b, args.detector)
    out = Path(args.out) if args.out else main_dir / REPORT_FILE
    out.write_text(report.format(), encoding="utf-8")
    print(f"detector {args.detector}: max dx {report.detector_max_dx:.3e} m, max dv {report.detector_max_dv:.3e} m/s; "
          f"wrote {out}")
    return 0


def _cmd_density(args) -> int:
    from ..oracle_validation.measure import measure_density
    from .recording import read_trace

    trace = Path(args.trace)
    with open(trace, encoding="utf-8") as fh:
        samples = read_trace(fh)
    series = measure_density(samples, tuple(args.segment), args.direction,
                             tuple(args.window) if args.window else None, args.length)
    out = Path(args.out) if args.out else trace.with_name(DENSITY_FILE)
    out.write_text(series.to_csv(), encoding="utf-8")
    print(f"mean density {series.mean():.3f} veh/km over {len(series.points)} samples; wrote {out}")
    return 0


COMMANDS = {"run": _cmd_run, "compare": _cmd_compare, "density": _cmd_density}


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"highwaysim: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except (OSError, StepError, ValueError) as exc:
        print(f"highwaysim: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
