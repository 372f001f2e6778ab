"""Quadruped locomotion control with wheel-driven foothold planning and
rank-aware constrained body dynamics."""

from .errors import (
    ControlError,
    DegenerateWrench,
    EmptyPolygon,
    GimbalSingularity,
    LegSingularity,
    NonFinite,
    ParseError,
    RankDeficient,
    RuntimeFault,
    Singular,
)
from .model import BodyState, RobotParams
from .params import bundled, load_robot, parse_robot
from .scenario import Scenario, load_scenario, parse_scenario, run_scenario, summary, write_trace
from .sim import Controller, RunResult, simulate, standing_state

__version__ = "0.1.0"

__all__ = [
    "BodyState",
    "ControlError",
    "Controller",
    "DegenerateWrench",
    "EmptyPolygon",
    "GimbalSingularity",
    "LegSingularity",
    "NonFinite",
    "ParseError",
    "RankDeficient",
    "RobotParams",
    "RunResult",
    "RuntimeFault",
    "Scenario",
    "Singular",
    "bundled",
    "load_robot",
    "load_scenario",
    "parse_robot",
    "parse_scenario",
    "run_scenario",
    "simulate",
    "standing_state",
    "summary",
    "write_trace",
]
