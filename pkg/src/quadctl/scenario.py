"""Scripted command scenarios, trace output and run summaries.

Scenario files hold ``duration = <s>`` and any number of
``segment <t_start> <v_fw> <v_lw> <yaw_rate> <z> <roll> <pitch>`` lines;
``z`` may be ``hold`` to keep the initial body height. Each segment's
commands stay active until the next one starts.
"""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .feet import CommandSet
from .model import RobotParams
from .params import parse_numbers
from .sim import COL, TRACE_HEADER, RunResult, simulate

POSE_NAMES = ("x", "y", "z", "roll", "pitch", "yaw")


@dataclass
class Segment:
    t_start: float
    v_fw: float = 0.0
    v_lw: float = 0.0
    yaw_rate: float = 0.0
    z: float | None = None
    roll: float = 0.0
    pitch: float = 0.0


@dataclass
class Scenario:
    duration: float
    segments: list = field(default_factory=list)
    name: str = "scenario"

    def __post_init__(self):
        starts = [s.t_start for s in self.segments]
        if starts and starts[0] != 0.0:
            raise ParseError(f"{self.name}: first segment must start at t = 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ParseError(f"{self.name}: segment start times must be strictly increasing")
        if not self.duration > 0:
            raise ParseError(f"{self.name}: duration must be positive")
        self._starts = starts

    def segment_index(self, t: float) -> int:
        return max(0, bisect.bisect_right(self._starts, t + 1e-9) - 1)

    def commands(self, t: float, z0: float) -> CommandSet:
        if not self.segments:
            return CommandSet(height=z0)
        s = self.segments[self.segment_index(t)]
        return CommandSet(s.v_fw, s.v_lw, s.yaw_rate, z0 if s.z is None else s.z, s.roll, s.pitch)


def parse_scenario(text: str, name: str = "<scenario>") -> Scenario:
    duration = None
    segments = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{name}:{lineno}"
        if line.startswith("duration"):
            key, sep, rest = line.partition("=")
            if not sep or key.strip() != "duration":
                raise ParseError(f"{where}: expected 'duration = <seconds>'")
            vals = parse_numbers(rest, where)
            if len(vals) != 1:
                raise ParseError(f"{where}: duration takes one value")
            duration = vals[0]
        elif line.split()[0] == "segment":
            toks = line.split()[1:]
            if len(toks) != 7:
                raise ParseError(f"{where}: segment needs 7 values, got {len(toks)}")
            hold = toks[4] == "hold"
            if hold:
                toks[4] = "0"
            v = parse_numbers(" ".join(toks), where)
            segments.append(Segment(v[0], v[1], v[2], v[3], None if hold else v[4], v[5], v[6]))
        else:
            raise ParseError(f"{where}: unrecognised line")
    if duration is None:
        raise ParseError(f"{name}: missing 'duration'")
    return Scenario(duration, segments, name)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_scenario(text, Path(path).stem)


def run_scenario(params: RobotParams, scenario: Scenario, duration: float | None = None,
                 timing: bool = False) -> RunResult:
    return simulate(params, scenario.commands, duration or scenario.duration, timing=timing)


# ---------------------------------------------------------------------------
# trace


def write_trace(result: RunResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        ints = {COL[c] for c in ("sigma1", "sigma2", "sigma3", "sigma4", "n_feet", "rank", "compute_ns", "iterations")}
        for row in result.trace:
            w.writerow(str(int(v)) if k in ints else repr(float(v)) for k, v in enumerate(row))


def read_trace(path) -> np.ndarray:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != TRACE_HEADER:
            raise ParseError(f"{path}: unexpected trace header")
        try:
            return np.array([[float(v) for v in row] for row in r])
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# summaries


def _stats(e: np.ndarray) -> dict:
    a = np.abs(e)
    return {n: {"max": float(a[:, k].max()), "mean": float(a[:, k].mean())} for k, n in enumerate(POSE_NAMES)}


def summary(result: RunResult, scenario: Scenario | None = None) -> dict:
    e = result.errors()
    out = {
        "ticks": int(len(result.trace)),
        "errors": _stats(e),
        "feet_counts": sorted({int(n) for n in result.column("n_feet")}),
        "period_clamped_ticks": int(sum(d.clamped for d in result.diagnostics)),
        "wall_time_s": result.wall_time,
        "timing": timing_report(result.trace),
    }
    if scenario is not None and scenario.segments:
        # row k holds the state after the tick that started at t - Ts
        t = result.column("t") - 0.5 * result.trace[0, COL["t"]]
        idx = np.array([scenario.segment_index(x) for x in t])
        out["segments"] = [
            {"t_start": s.t_start, "errors": _stats(e[idx == k])}
            for k, s in enumerate(scenario.segments)
            if np.any(idx == k)
        ]
    return out


def timing_report(trace: np.ndarray, bins: int = 10) -> dict:
    """Per feet-count timing percentiles, histograms and iteration counts."""
    n = trace[:, COL["n_feet"]].astype(int)
    ns = trace[:, COL["compute_ns"]]
    it = trace[:, COL["iterations"]].astype(int)
    report = {}
    for k in sorted(set(n.tolist())):
        sel = n == k
        counts = sorted(set(it[sel].tolist()))
        samples = ns[sel]
        hist, edges = np.histogram(samples, bins=bins)
        report[str(k)] = {
            "ticks": int(sel.sum()),
            "iterations": counts,
            "iterations_constant": len(counts) == 1,
            "p50_ns": float(np.percentile(samples, 50)),
            "p99_ns": float(np.percentile(samples, 99)),
            "max_ns": float(samples.max()),
            "histogram": {"counts": hist.tolist(), "edges": edges.tolist()},
        }
    return report


def format_summary(s: dict) -> str:
    lines = [f"ticks: {s['ticks']}  feet counts: {s['feet_counts']}  wall: {s['wall_time_s']:.2f} s"]
    for n in POSE_NAMES:
        unit = "m" if n in ("x", "y", "z") else "rad"
        st = s["errors"][n]
        lines.append(f"  {n:>5}: max {st['max']:.4g} {unit}  mean {st['mean']:.4g} {unit}")
    for k, v in s["timing"].items():
        lines.append(
            f"  N={k}: {v['ticks']} ticks, iterations {v['iterations']}, "
            f"p50 {v['p50_ns'] / 1e3:.1f} us, p99 {v['p99_ns'] / 1e3:.1f} us"
        )
    return "\n".join(lines)

