"""Closed loop: controller blocks and the joint-level plant stepped in lockstep."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .body import (
    body_control,
    pose_rates,
    refresh_decomposition,
    step_internal_model,
)
from .errors import ControlError, RuntimeFault
from .feet import CommandSet, FeetManager, boundary_refs, clock_tick, footholds
from .linalg import Workspace, rot_z
from .model import (
    BodyState,
    RobotParams,
    contact_matrix,
    foot_points,
    leg_forward_kinematics,
    leg_jacobian_inverse,
    polygon_contains,
    support_polygon,
    zmp,
    body_jacobian,
    body_rotation,
    gravity_wrench,
    inertial_wrench,
)
from .plant import Plant, detect_contacts
from .reference import BodyReference

TRACE_HEADER = (
    ["t"]
    + [f"{c}" for c in ("x", "y", "z", "roll", "pitch", "yaw")]
    + [f"{c}_ref" for c in ("x", "y", "z", "roll", "pitch", "yaw")]
    + ["v_fw", "v_lw", "yaw_rate", "v_fw_ref", "v_lw_ref", "yaw_rate_ref"]
    + [f"sigma{i}" for i in range(1, 5)]
    + ["n_feet", "rank", "period", "duty", "clock"]
    + [f"foot{i}_{c}" for i in range(1, 5) for c in ("x", "y", "z")]
    + ["zmp_x", "zmp_y", "compute_ns", "iterations"]
)
COL = {name: k for k, name in enumerate(TRACE_HEADER)}


def standing_state(params: RobotParams, x: float = 0.0, y: float = 0.0, yaw: float = 0.0) -> BodyState:
    """Nominal stance with the body height chosen so every foot touches
    the ground."""
    joints = params.nominal_joints.copy()
    heights = [leg_forward_kinematics(params, i, joints[i])[0][2] for i in range(4)]
    target = float(np.mean(heights))
    # nudge each leg vertically onto the common height
    for i in range(4):
        for _ in range(3):
            ge, J = leg_forward_kinematics(params, i, joints[i])
            if ge[2] == target:
                break
            joints[i] += leg_jacobian_inverse(J) @ np.array([0.0, 0.0, target - ge[2]])
    z = params.foot_radius - target
    return BodyState(np.array([x, y, z, 0.0, 0.0, yaw]), joints)


def ground_settle(of: np.ndarray, stance, limit: float) -> np.ndarray:
    """Vertical displacements returning stance feet to the ground plane,
    at most ``limit`` per tick."""
    out = np.zeros((4, 3))
    for i in range(4):
        if stance[i]:
            out[i, 2] = -min(max(float(of[i, 2]), -limit), limit)
    return out


@dataclass
class TickDiagnostics:
    zmp_roundtrip: float = 0.0
    zmp_inside: bool = True
    flight: bool = False
    residual: float = 0.0
    lam_norm: float = 0.0
    boundary: float = 0.0
    clamped: bool = False
    rank: int = 0
    grounded: int = 0
    iterations: int = 0


class Controller:
    """Feet manager, body reference and body manager run in loop order."""

    def __init__(self, params: RobotParams, state: BodyState, sigma):
        self.params = params
        self.state = state.copy()
        self.feet = FeetManager(params, state.q0)
        self.reference = BodyReference(params, state.q0)
        self.ws = Workspace(12)
        self.rollover = True
        self.last_refs = None
        self.last_wheels = None
        self.last_polygon = np.zeros((0, 2))
        self.check_boundaries = True

    def step(self, cmds: CommandSet, joints: np.ndarray, sigma) -> tuple[np.ndarray, TickDiagnostics]:
        p = self.params
        st = self.state
        st.joints = np.array(joints, dtype=float)
        diag = TickDiagnostics()
        fk = foot_points(p, st)
        polygon = support_polygon(sigma, fk.of)
        self.last_polygon = polygon
        wheels, frefs, ddof, (start, _) = self.feet.step(cmds, st.q0, fk.of, fk.dof, self.rollover)
        gait = self.feet.gait
        held = [bool(sigma[i]) and not gait.swinging(i) for i in range(4)]
        for i in range(4):
            if held[i]:
                st.dgf[i] = -contact_matrix(fk.gf[i]) @ st.twist
        if self.check_boundaries and not gait.idle:
            b = boundary_refs(gait, start, wheels.velocities, p.step_height)
            diag.boundary = float(np.max(np.abs(b)))
        settle = ground_settle(fk.of, [not gait.swinging(i) for i in range(4)], p.contact_threshold)
        refs = self.reference.step(cmds, polygon)
        diag.flight = refs.flight
        if not refs.flight:
            diag.zmp_inside = polygon_contains(refs.zmp_safe, polygon)
            diag.zmp_roundtrip = self.zmp_roundtrip(refs)
        cache = refresh_decomposition(p, st, sigma, fk.gf, self.ws)
        uV = body_control(p, refs.q0, refs.dq0, st, cache)
        nxt, rates, _ = step_internal_model(p, st, cache, uV, ddof, held, p.sample_time, settle)
        res = 0.0
        for i in range(4):
            if held[i]:
                r = contact_matrix(cache.gf[i]) @ nxt.twist + nxt.dgf[i]
                res = max(res, float(np.max(np.abs(r))))
        diag.residual = res
        diag.rank = cache.rank
        diag.grounded = int(np.sum(sigma))
        diag.iterations = cache.ldq.iterations
        diag.lam_norm = float(np.max(np.abs(cache.Lam))) if cache.rank == 6 else 0.0
        diag.clamped = gait.clamped
        self.state = nxt
        self.last_refs = refs
        self.last_wheels = wheels
        self.last_feet_refs = frefs
        return rates, diag

    def zmp_roundtrip(self, refs) -> float:
        p = self.params
        angles = refs.q0[3:]
        R = body_rotation(*angles)
        V = body_jacobian(angles) @ refs.dq0
        F, M = inertial_wrench(p, V, np.zeros(6))
        oz = zmp(refs.q0[:3], R, F, M, gravity_wrench(p, R)[:3])
        return float(np.max(np.abs(oz[:2] - refs.zmp_safe[:2])))

    def end_tick(self) -> None:
        self.rollover = clock_tick(self.feet.gait, self.params.sample_time)


@dataclass
class RunResult:
    trace: np.ndarray
    diagnostics: list = field(default_factory=list)
    wall_time: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return self.trace[:, COL[name]]

    def errors(self) -> np.ndarray:
        """Reference minus actual pose per tick, yaw wrapped."""
        e = self.trace[:, COL["x_ref"] : COL["x_ref"] + 6] - self.trace[:, COL["x"] : COL["x"] + 6]
        e[:, 5] = (e[:, 5] + math.pi) % (2 * math.pi) - math.pi
        return e


def simulate(params: RobotParams, schedule, duration: float, timing: bool = False,
             state: BodyState | None = None, perturb=None) -> RunResult:
    """Run the closed loop for ``round(duration / Ts)`` ticks.

    ``schedule(t, initial_height)`` returns the :class:`CommandSet` at time ``t``.
    """
    Ts = params.sample_time
    n = int(round(duration / Ts))
    state = state or standing_state(params)
    plant = Plant(params, state.joints, perturb)
    sigma = detect_contacts(foot_points(params, state).of, params.contact_threshold)
    ctrl = Controller(params, state, sigma)
    z0 = float(state.q0[2])
    rows = np.zeros((n, len(TRACE_HEADER)))
    diags = []
    t_start = time.perf_counter()
    for k in range(n):
        t = k * Ts
        cmds = schedule(t, z0)
        t0 = time.perf_counter_ns() if timing else 0
        try:
            rates, diag = ctrl.step(cmds, plant.joints, sigma)
        except ControlError as exc:
            raise RuntimeFault(k, exc) from exc
        dt = time.perf_counter_ns() - t0 if timing else 0
        ctrl.state.joints = plant.step(rates)
        _fill_row(rows[k], (k + 1) * Ts, ctrl, cmds, sigma, diag, dt)
        sigma = detect_contacts(foot_points(params, ctrl.state).of, params.contact_threshold)
        ctrl.end_tick()
        diags.append(diag)
    return RunResult(rows, diags, time.perf_counter() - t_start)


def _fill_row(row, t, ctrl: Controller, cmds: CommandSet, sigma, diag, dt) -> None:
    st = ctrl.state
    gait = ctrl.feet.gait
    refs = ctrl.last_refs
    row[0] = t
    row[1:7] = st.q0
    row[7:13] = refs.q0
    dq0 = pose_rates(st)
    local = rot_z(st.q0[5]).T @ dq0[:3]
    row[13:16] = (local[0], local[1], dq0[5])
    row[16:19] = (cmds.v_fw, cmds.v_lw, cmds.yaw_rate)
    row[19:23] = sigma
    row[23] = diag.grounded
    row[24] = diag.rank
    row[25] = gait.period
    row[26] = gait.duty
    row[27] = gait.t
    row[28:40] = foot_points(ctrl.params, st).of.ravel()
    row[40:42] = refs.zmp_safe[:2]
    row[42] = dt
    row[43] = diag.iterations
