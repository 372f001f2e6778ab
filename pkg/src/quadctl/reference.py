"""Body reference: integrate velocity commands, then move the centre of
mass reference so that its zero-moment point stays in the support polygon."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .feet import CommandSet
from .linalg import rot_z
from .model import (
    RobotParams,
    body_jacobian,
    body_rotation,
    closest_point_in_polygon,
    gravity_wrench,
    inertial_wrench,
    zmp,
    zmp_offset,
)


@dataclass
class BodyRefs:
    q0: np.ndarray  # (x, y, z, roll, pitch, yaw) with the clamped position
    dq0: np.ndarray
    desired: np.ndarray  # integrated position before clamping
    zmp_desired: np.ndarray
    zmp_safe: np.ndarray
    flight: bool = False


def integrate_references(cmds: CommandSet, Ts: float, yaw: float, og: np.ndarray):
    """One Euler step of the yaw and position accumulators."""
    yaw = yaw + cmds.yaw_rate * Ts
    v = rot_z(yaw) @ np.array([cmds.v_fw, cmds.v_lw, 0.0])
    og = og + v * Ts
    og[2] = cmds.height
    return yaw, og, v


def safe_body_reference(params: RobotParams, og, angles, dog, yaw_rate: float, polygon) -> BodyRefs:
    roll, pitch, yaw = angles
    rates = np.array([0.0, 0.0, yaw_rate])
    R = body_rotation(roll, pitch, yaw)
    dq = np.concatenate([np.asarray(dog, dtype=float), rates])
    V = body_jacobian(angles) @ dq
    F, M = inertial_wrench(params, V, np.zeros(6))
    Fg = gravity_wrench(params, R)[:3]
    og = np.asarray(og, dtype=float)
    oz = zmp(og, R, F, M, Fg)
    q0 = np.concatenate([og, angles])
    if len(polygon) == 0:
        return BodyRefs(q0, dq, og.copy(), oz, oz.copy(), flight=True)
    oz_safe = closest_point_in_polygon(oz, polygon)
    if np.array_equal(oz_safe, oz):
        og_safe = og.copy()
    else:
        og_safe = oz_safe + zmp_offset(og[2], R, F, M, Fg)
    q0[:3] = og_safe
    return BodyRefs(q0, dq, og.copy(), oz, oz_safe)


class BodyReference:
    """Owns the integrated yaw and position references."""

    def __init__(self, params: RobotParams, pose):
        self.params = params
        self.yaw = float(pose[5])
        self.og = np.array(pose[:3], dtype=float)

    def step(self, cmds: CommandSet, polygon) -> BodyRefs:
        self.yaw, self.og, v = integrate_references(cmds, self.params.sample_time, self.yaw, self.og)
        angles = np.array([cmds.roll, cmds.pitch, self.yaw])
        return safe_body_reference(self.params, self.og, angles, v, cmds.yaw_rate, polygon)
