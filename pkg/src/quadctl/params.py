"""Robot parameter files: one ``key = value(s)`` entry per line.

Keys are the :class:`RobotParams` field names. Values are whitespace or
comma separated numbers; matrices are given row-major. ``#`` starts a
comment.
"""

from __future__ import annotations

import dataclasses
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError
from .model import RobotParams

SHAPES = {
    "inertia": 9,
    "hip_offsets": 12,
    "abduction_offsets": 4,
    "wheel_anchors": 12,
    "workspaces": 16,
    "nominal_joints": 12,
}


def _fields():
    return {f.name: f for f in dataclasses.fields(RobotParams)}


def parse_numbers(text: str, where: str) -> list[float]:
    out = []
    for tok in text.replace(",", " ").split():
        try:
            out.append(float(tok))
        except ValueError:
            raise ParseError(f"{where}: not a number: {tok!r}") from None
    if not all(np.isfinite(out)):
        raise ParseError(f"{where}: non-finite value")
    return out


def parse_robot(text: str, name: str = "<robot>") -> RobotParams:
    fields = _fields()
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{name}:{lineno}"
        if "=" not in line:
            raise ParseError(f"{where}: expected 'key = value'")
        key, _, rest = line.partition("=")
        key = key.strip()
        if key not in fields:
            raise ParseError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ParseError(f"{where}: duplicate key {key!r}")
        nums = parse_numbers(rest, where)
        want = SHAPES.get(key, 1)
        if len(nums) != want:
            raise ParseError(f"{where}: {key} needs {want} value(s), got {len(nums)}")
        values[key] = nums if key in SHAPES else nums[0]
    missing = [
        k for k, f in fields.items()
        if k not in values and f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
    ]
    if missing:
        raise ParseError(f"{name}: missing keys: {', '.join(missing)}")
    try:
        return RobotParams(**values)
    except ValueError as exc:
        raise ParseError(f"{name}: {exc}") from None


def load_robot(path) -> RobotParams:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_robot(text, str(path))


def format_robot(params: RobotParams) -> str:
    lines = []
    for f in dataclasses.fields(RobotParams):
        v = getattr(params, f.name)
        if isinstance(v, np.ndarray):
            lines.append(f"{f.name} = " + " ".join(repr(float(x)) for x in v.ravel()))
        else:
            lines.append(f"{f.name} = {float(v)!r}")
    return "\n".join(lines) + "\n"


def bundled(name: str) -> Path:
    """Path of a data file shipped with the package."""
    return Path(str(resources.files("quadctl") / "data" / name))
