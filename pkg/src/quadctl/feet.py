"""Feet manager: imaginary wheels, gait period, schedule, swing
trajectories and the foot PD law."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import rot_x, rot_y, rot_z
from .model import RobotParams

FL, FR, RL, RR = 0, 1, 2, 3

# lifting order per motion, zero-based leg indices
SCHEDULES = {
    "forward": (FL, RR, FR, RL),
    "backward": (FL, RL, FR, RR),
    "left": (FL, RR, RL, FR),
    "right": (FL, FR, RL, RR),
    "ccw": (FL, RL, RR, FR),
    "cw": (FL, FR, RR, RL),
}
SCHEDULE_ROWS = tuple(SCHEDULES.values())
CLOCK_TOL = 1e-9


@dataclass
class CommandSet:
    """High-level inputs. Velocities in the shadow frame."""

    v_fw: float = 0.0
    v_lw: float = 0.0
    yaw_rate: float = 0.0
    height: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0

    def is_still(self) -> bool:
        return self.v_fw == 0.0 and self.v_lw == 0.0 and self.yaw_rate == 0.0


@dataclass
class WheelState:
    positions: np.ndarray  # (4, 3) world, z = 0
    velocities: np.ndarray  # (4, 3) world
    shadow: np.ndarray  # (4, 3) wheel anchors in the shadow frame


@dataclass
class GaitState:
    period: float
    duty: float
    swing_time: float
    schedule: tuple = SCHEDULES["forward"]
    liftoff: np.ndarray = field(default_factory=lambda: np.zeros(4))
    t: float = 0.0
    idle: bool = True
    anchor: np.ndarray = field(default_factory=lambda: np.zeros(3))
    clamped: bool = False
    # lift-off time of each foot whose swing already began this period
    started: np.ndarray = field(default_factory=lambda: np.full(4, np.nan))

    @classmethod
    def initial(cls, params: RobotParams, pose) -> "GaitState":
        T = params.period_max
        g = cls(T, params.duty_max, (1.0 - params.duty_max) * T)
        g.anchor = np.array([pose[0], pose[1], pose[5]], dtype=float)
        g.liftoff = liftoff_times(g.schedule, T, g.swing_time)
        return g

    def swinging(self, leg: int) -> bool:
        """True while ``leg`` is inside its swing window of an active gait."""
        if self.idle:
            return False
        t0 = self.liftoff[leg]
        return t0 <= self.t <= t0 + self.swing_time


@dataclass
class FootRefs:
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray


# ---------------------------------------------------------------------------
# wheels and footholds


def shadow_anchors(params: RobotParams, roll: float, pitch: float) -> np.ndarray:
    """Wheel anchors projected on the shadow plane for the current tilt."""
    R = rot_y(pitch) @ rot_x(roll)
    kw = params.wheel_anchors @ R.T
    kw[:, 2] = 0.0
    return kw


def wheel_commands(cmds: CommandSet, x: float, y: float, yaw: float, kw: np.ndarray) -> WheelState:
    Rz = rot_z(yaw)
    pos = np.empty((4, 3))
    vel = np.empty((4, 3))
    base = np.array([x, y, 0.0])
    for i in range(4):
        pos[i] = base + Rz @ kw[i]
        local = np.array(
            [cmds.v_fw - cmds.yaw_rate * kw[i, 1], cmds.v_lw + cmds.yaw_rate * kw[i, 0], 0.0]
        )
        vel[i] = Rz @ local
    return WheelState(pos, vel, np.array(kw, dtype=float))


def footholds(wheels: WheelState, t: float, T: float) -> tuple[np.ndarray, np.ndarray]:
    start = wheels.positions - t * wheels.velocities
    end = wheels.positions + (T - t) * wheels.velocities
    return start, end


# ---------------------------------------------------------------------------
# period


def ray_exit(p: np.ndarray, v: np.ndarray, box) -> float:
    """Largest ``tau >= 0`` keeping ``p + tau v`` in the box
    ``(x_min, x_max, y_min, y_max)``. ``p`` is assumed inside."""
    tau = math.inf
    for k, (lo, hi) in enumerate(((box[0], box[1]), (box[2], box[3]))):
        if v[k] > 0.0:
            tau = min(tau, (hi - p[k]) / v[k])
        elif v[k] < 0.0:
            tau = min(tau, (lo - p[k]) / v[k])
    return max(0.0, tau)


def period_from(T: float, params: RobotParams) -> tuple[float, float, float, bool]:
    """Clamp a candidate period and derive duty factor and swing time."""
    clamped = False
    T = min(T, params.period_max)
    if T < params.period_min:
        T = params.period_min
        clamped = True
    if T >= params.period_mid:
        beta = params.duty_max
        Tsw = (1.0 - beta) * T
    else:
        Tsw = params.swing_time_min
        beta = 1.0 - Tsw / T
    return T, beta, Tsw, clamped


def compute_period(wheels: WheelState, t: float, params: RobotParams, anchor) -> tuple[float, float, float, bool]:
    """Longest period keeping every predicted foothold in its workspace.

    Workspaces are expressed in the shadow frame captured at the start of
    the period (``anchor = (x, y, yaw)``).
    """
    c, s = math.cos(anchor[2]), math.sin(anchor[2])
    T = params.period_max
    for i in range(4):
        v = wheels.velocities[i]
        if v[0] == 0.0 and v[1] == 0.0:
            continue
        dx = wheels.positions[i, 0] - anchor[0]
        dy = wheels.positions[i, 1] - anchor[1]
        p = np.array([c * dx + s * dy, -s * dx + c * dy])
        vl = np.array([c * v[0] + s * v[1], -s * v[0] + c * v[1]])
        box = params.workspaces[i]
        p[0] = min(max(p[0], box[0]), box[1])
        p[1] = min(max(p[1], box[2]), box[3])
        T = min(T, t + ray_exit(p, vl, box))
    return period_from(T, params)


def clock_tick(gait: GaitState, Ts: float) -> bool:
    """Advance the phase clock; returns True on period rollover."""
    t = gait.t + Ts
    if t >= gait.period - CLOCK_TOL:
        gait.t = 0.0
        return True
    gait.t = t
    return False


# ---------------------------------------------------------------------------
# schedule


def liftoff_times(schedule, T: float, Tsw: float) -> np.ndarray:
    out = np.zeros(4)
    for k, t0 in enumerate((0.0, T / 2 - Tsw, T / 2, T - Tsw)):
        out[schedule[k]] = t0
    return out


def freeze_liftoffs(gait: GaitState, Ts: float) -> None:
    """Pin the lift-off time of every foot once its swing has begun, so a
    period change later in the cycle neither shifts a swing in progress nor
    starts a second swing for a foot that already landed. A window that a
    shrinking period moved into the past starts at the current tick."""
    if gait.idle:
        return
    for i in range(4):
        if not math.isnan(gait.started[i]):
            gait.liftoff[i] = gait.started[i]
        elif gait.liftoff[i] <= gait.t + CLOCK_TOL:
            if gait.t - gait.liftoff[i] >= Ts - CLOCK_TOL:
                gait.liftoff[i] = gait.t
            gait.started[i] = gait.liftoff[i]


def predominant_motion(cmds: CommandSet, wheels: WheelState) -> str | None:
    if cmds.is_still():
        return None
    front = 0.5 * (wheels.velocities[FL] + wheels.velocities[FR])
    rear = 0.5 * (wheels.velocities[RL] + wheels.velocities[RR])
    if float(front @ rear) <= 0.0:
        return "ccw" if cmds.yaw_rate > 0 else "cw"
    alpha = math.atan2(cmds.v_lw, cmds.v_fw)
    kw = wheels.shadow
    a1, a2, a3, a4 = (math.atan2(kw[i, 1], kw[i, 0]) for i in range(4))
    if a2 <= alpha < a1:
        return "forward"
    if a1 <= alpha < a3:
        return "left"
    if a4 <= alpha < a2:
        return "right"
    return "backward"


def select_gait_schedule(cmds: CommandSet, wheels: WheelState, rollover: bool, current: tuple) -> tuple:
    if not rollover:
        return current
    motion = predominant_motion(cmds, wheels)
    return current if motion is None else SCHEDULES[motion]


# ---------------------------------------------------------------------------
# swing trajectories


def phase(t: float, t0: float, Tsw: float) -> tuple[float, float, float]:
    """Phase angle and its first two time derivatives."""
    s = (t - t0) / Tsw
    if s < 0.0:
        return 0.0, 0.0, 0.0
    if s > 1.0:
        return 2 * math.pi, 0.0, 0.0
    eta = 2 * math.pi * (3 * s * s - 2 * s ** 3)
    deta = 2 * math.pi * (6 * s - 6 * s * s) / Tsw
    ddeta = 2 * math.pi * (6 - 12 * s) / Tsw ** 2
    return eta, deta, ddeta


def foot_trajectory(gait: GaitState, start: np.ndarray, wheel_vel: np.ndarray, h: float) -> FootRefs:
    pos = np.empty((4, 3))
    vel = np.zeros((4, 3))
    acc = np.zeros((4, 3))
    T = gait.period
    for i in range(4):
        step = wheel_vel[i] * T
        if gait.idle:
            pos[i] = start[i]
            continue
        eta, deta, ddeta = phase(gait.t, gait.liftoff[i], gait.swing_time)
        se, ce = math.sin(eta), math.cos(eta)
        pos[i] = start[i] + (eta - se) / (2 * math.pi) * step
        pos[i, 2] += (1 - ce) / 2 * h
        d1 = (1 - ce) / (2 * math.pi) * step
        d1[2] += se / 2 * h
        d2 = se / (2 * math.pi) * step
        d2[2] += ce / 2 * h
        vel[i] = deta * d1
        acc[i] = ddeta * d1 + deta * deta * d2
    return FootRefs(pos, vel, acc)


def boundary_refs(gait: GaitState, start: np.ndarray, wheel_vel: np.ndarray, h: float) -> np.ndarray:
    """Reference velocity and acceleration of every foot at its exact
    lift-off and touch-down instants, shape (4, 2, 2, 3)."""
    out = np.zeros((4, 2, 2, 3))
    probe = GaitState(gait.period, gait.duty, gait.swing_time, gait.schedule, gait.liftoff, idle=False)
    for i in range(4):
        for k, t in enumerate((gait.liftoff[i], gait.liftoff[i] + gait.swing_time)):
            probe.t = t
            refs = foot_trajectory(probe, start, wheel_vel, h)
            out[i, k, 0] = refs.velocity[i]
            out[i, k, 1] = refs.acceleration[i]
    return out


def feet_control(refs: FootRefs, of: np.ndarray, dof: np.ndarray, kp: float, kd: float) -> np.ndarray:
    return refs.acceleration + kp * (refs.position - of) + kd * (refs.velocity - dof)


# ---------------------------------------------------------------------------


class FeetManager:
    """Stateful wrapper running the feet pipeline once per tick."""

    def __init__(self, params: RobotParams, pose):
        self.params = params
        self.gait = GaitState.initial(params, pose)

    def step(self, cmds: CommandSet, pose, of: np.ndarray, dof: np.ndarray, rollover: bool):
        p = self.params
        g = self.gait
        kw = shadow_anchors(p, pose[3], pose[4])
        wheels = wheel_commands(cmds, pose[0], pose[1], pose[5], kw)
        if g.idle and not cmds.is_still() and g.t > 0.0:
            # restart the cycle at once instead of waiting for the idle period
            g.t = 0.0
            rollover = True
        if rollover:
            g.anchor = np.array([pose[0], pose[1], pose[5]], dtype=float)
            g.idle = cmds.is_still()
            g.schedule = select_gait_schedule(cmds, wheels, True, g.schedule)
            g.started[:] = np.nan
        T, beta, Tsw, clamped = compute_period(wheels, g.t, p, g.anchor)
        g.period, g.duty, g.swing_time, g.clamped = T, beta, Tsw, clamped
        g.liftoff = liftoff_times(g.schedule, T, Tsw)
        freeze_liftoffs(g, p.sample_time)
        start, end = footholds(wheels, g.t, T)
        refs = foot_trajectory(g, start, wheels.velocities, p.step_height)
        ddof = feet_control(refs, of, dof, p.foot_kp, p.foot_kd)
        return wheels, refs, ddof, (start, end)
