"""Command line entry point: run a scenario and write its trace.

Exit codes: 0 on success, 2 for malformed input files or arguments,
3 for a fault raised inside the control loop, 4 for output I/O errors.
Every fault prints one ``error[<Category>]: <message>`` line to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import ControlError, ParseError, RuntimeFault
from .params import bundled, load_robot
from .scenario import format_summary, load_scenario, run_scenario, summary, write_trace

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FAULT = 3
EXIT_IO = 4


def resolve(name: str, suffix: str) -> Path:
    """A path as given, or a bundled data file by name (with or without suffix)."""
    p = Path(name)
    if p.exists():
        return p
    for candidate in (name, name + suffix):
        b = bundled(candidate)
        if b.is_file():
            return b
    raise ParseError(f"{name}: no such file or bundled {suffix[1:]} file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quadctl",
        description="Run a scripted command scenario through the closed-loop quadruped controller.",
    )
    ap.add_argument("--robot", required=True, help="robot parameter file, or a bundled name such as go2")
    ap.add_argument("--scenario", required=True, help="scenario file, or a bundled name such as slow_tour")
    ap.add_argument("--out", required=True, help="CSV trace output path")
    ap.add_argument("--duration", type=float, help="override the scenario duration [s]")
    ap.add_argument("--rate", type=float, help="control rate [Hz], overriding the robot's sample time")
    ap.add_argument("--timing", action="store_true", help="record per-tick compute time in the trace")
    ap.add_argument("--summary-json", help="write the run summary as JSON to this path")
    ap.add_argument("--report", action="store_true", help="render PNG figures next to the trace")
    ap.add_argument("--quiet", action="store_true", help="do not print the summary")
    return ap


def _fail(category: str, message: str, code: int) -> int:
    print(f"error[{category}]: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = load_robot(resolve(args.robot, ".robot"))
        scenario = load_scenario(resolve(args.scenario, ".scn"))
        if args.rate is not None:
            if not args.rate > 0:
                raise ParseError("--rate must be positive")
            params = dataclasses.replace(params, sample_time=1.0 / args.rate)
        if args.duration is not None and not args.duration > 0:
            raise ParseError("--duration must be positive")
    except ParseError as exc:
        return _fail("ParseError", str(exc), EXIT_INPUT)
    except ValueError as exc:
        return _fail("ParseError", str(exc), EXIT_INPUT)

    try:
        result = run_scenario(params, scenario, args.duration, timing=args.timing)
    except RuntimeFault as exc:
        return _fail(f"RuntimeFault/{type(exc.cause).__name__}", f"tick {exc.tick}: {exc.cause}", EXIT_FAULT)
    except ControlError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_FAULT)

    s = summary(result, scenario)
    try:
        write_trace(result, args.out)
        if args.summary_json:
            Path(args.summary_json).write_text(json.dumps(s, indent=2) + "\n")
        figures = []
        if args.report:
            from .plots import render_report

            figures = render_report(result.trace, args.out)
    except OSError as exc:
        return _fail("IOError", f"{exc.filename}: {exc.strerror}", EXIT_IO)

    if not args.quiet:
        print(format_summary(s))
        for f in figures:
            print(f"figure: {f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
