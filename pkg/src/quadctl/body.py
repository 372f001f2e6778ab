"""Body manager: constraint assembly, thin LDQ, internal dynamic model and
the feedback-linearizing pose controller."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LegSingularity
from .linalg import ThinLDQ, Workspace, cross, inverse, ldq_decompose
from .model import (
    E_Z,
    BodyState,
    RobotParams,
    body_jacobian,
    body_jacobian_inverse,
    body_jacobian_rate,
    body_rotation,
    constraint_matrix,
    contact_matrix,
    coriolis_terms,
    leg_forward_kinematics,
    leg_jacobian_inverse,
)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2 * math.pi)
    if w <= 0.0:
        w += 2 * math.pi
    return w - math.pi


@dataclass
class DecompositionCache:
    A: np.ndarray
    ldq: ThinLDQ
    PL: np.ndarray
    Dinv: np.ndarray
    Phi: np.ndarray
    Psi: np.ndarray
    Lam: np.ndarray
    fV: np.ndarray
    h: np.ndarray
    hV: np.ndarray
    gf: np.ndarray

    @property
    def rank(self) -> int:
        return self.ldq.rank


@dataclass
class ControlOutput:
    uV: np.ndarray
    joint_rates: np.ndarray
    rank: int
    grounded: int
    iterations: int
    residual: float = 0.0
    lam_norm: float = 0.0
    accel: np.ndarray = field(default_factory=lambda: np.zeros(6))


def refresh_decomposition(
    params: RobotParams, state: BodyState, sigma, gf: np.ndarray, ws: Workspace | None = None
) -> DecompositionCache:
    A, r = constraint_matrix(sigma, gf)
    f = ldq_decompose(A.T, r, ws=ws)
    Mi = params.mass_matrix_inv
    PL = f.PL()
    d = np.diag(f.D)
    Dinv = np.diag(1.0 / d) if r else np.zeros((0, 0))
    if r:
        Phi = -inverse(PL.T @ Mi @ PL)
    else:
        Phi = np.zeros((0, 0))
    Psi = Mi @ PL @ Phi
    Lam = Mi @ (np.eye(6) + PL @ Psi.T)
    h, hV = coriolis_terms(params, state, gf)
    fV = Lam @ hV + Psi @ (Dinv @ (f.Q @ h.ravel()))
    return DecompositionCache(A, f, PL, Dinv, Phi, Psi, Lam, fV, h, hV, np.array(gf, dtype=float))


def pose_rates(state: BodyState) -> np.ndarray:
    return body_jacobian_inverse(state.q0[3:]) @ state.twist


def pose_error(ref_q0, ref_dq0, state: BodyState) -> tuple[np.ndarray, np.ndarray]:
    e = np.asarray(ref_q0, dtype=float) - state.q0
    e[5] = wrap_angle(e[5])
    de = np.asarray(ref_dq0, dtype=float) - pose_rates(state)
    return e, de


def body_control(params: RobotParams, ref_q0, ref_dq0, state: BodyState, cache: DecompositionCache) -> np.ndarray:
    r = cache.rank
    if r == 0:
        return np.zeros(0)
    angles = state.q0[3:]
    dq0 = pose_rates(state)
    e, de = pose_error(ref_q0, ref_dq0, state)
    J = body_jacobian(angles)
    Jd = body_jacobian_rate(angles, dq0[3:])
    w = J @ (params.body_kp * e + params.body_kd * de) + Jd @ dq0 - cache.fV
    D = cache.ldq.D
    return -D @ (cache.PL.T @ w)


def twist_rate(cache: DecompositionCache, uV: np.ndarray) -> np.ndarray:
    if cache.rank == 0:
        return cache.fV.copy()
    return cache.fV + cache.Psi @ (cache.Dinv @ uV)


def joint_velocity_commands(params: RobotParams, state: BodyState, R: np.ndarray | None = None) -> np.ndarray:
    if R is None:
        R = body_rotation(*state.q0[3:])
    omega = state.twist[3:]
    lever = cross(omega, params.foot_radius * (R.T @ E_Z))
    out = np.empty((4, 3))
    for i in range(4):
        _, J = leg_forward_kinematics(params, i, state.joints[i])
        try:
            Jinv = leg_jacobian_inverse(J)
        except LegSingularity as exc:
            raise LegSingularity(f"leg {i}: {exc}") from None
        out[i] = Jinv @ (state.dgf[i] - lever)
    return out


def contact_point(params: RobotParams, q0, joints_i, leg: int, R: np.ndarray) -> np.ndarray:
    ge, _ = leg_forward_kinematics(params, leg, joints_i)
    return q0[:3] + R @ ge - params.foot_radius * E_Z


def realise_displacements(params: RobotParams, state: BodyState, nxt: BodyState, rates: np.ndarray,
                          R: np.ndarray, gf: np.ndarray, settle=None) -> np.ndarray:
    """One Newton correction of the joint rates so that the explicit joint
    step moves every contact point by ``Ts`` times its model velocity
    (plus ``settle``), removing the curvature drift of the Euler step."""
    Ts = params.sample_time
    R1 = body_rotation(*nxt.q0[3:])
    out = rates.copy()
    for i in range(4):
        v = R @ (contact_matrix(gf[i]) @ nxt.twist + nxt.dgf[i])
        target = contact_point(params, state.q0, state.joints[i], i, R) + Ts * v
        if settle is not None:
            target = target + settle[i]
        q1 = state.joints[i] + Ts * rates[i]
        miss = target - contact_point(params, nxt.q0, q1, i, R1)
        _, J = leg_forward_kinematics(params, i, q1)
        try:
            Jinv = leg_jacobian_inverse(J)
        except LegSingularity as exc:
            raise LegSingularity(f"leg {i}: {exc}") from None
        out[i] = rates[i] + Jinv @ (R1.T @ miss) / Ts
    return out


def step_internal_model(
    params: RobotParams,
    state: BodyState,
    cache: DecompositionCache,
    uV: np.ndarray,
    ddof: np.ndarray,
    held,
    Ts: float,
    settle=None,
) -> tuple[BodyState, np.ndarray, np.ndarray]:
    """Semi-implicit Euler step of the body state form.

    ``held[i]`` marks grounded feet outside their swing window; their
    world acceleration is zero and their relative velocity is projected
    back onto the contact constraint after the twist update. The joint
    rates are then corrected so the explicit joint step lands each contact
    point where the model velocities put it; ``settle`` (4, 3) adds world
    displacements on top. ``V`` and ``dGF`` are not affected.
    Returns the new state, the joint-rate commands and the twist rate.
    """
    R = body_rotation(*state.q0[3:])
    dV = twist_rate(cache, uV)
    nxt = state.copy()
    nxt.twist = state.twist + Ts * dV
    for i in range(4):
        Ai = contact_matrix(cache.gf[i])
        acc = np.zeros(3) if held[i] else R.T @ ddof[i]
        ddgf = -cache.h[i] - Ai @ dV + acc
        nxt.dgf[i] = state.dgf[i] + Ts * ddgf
        if held[i]:
            nxt.dgf[i] = -Ai @ nxt.twist
    dq0 = body_jacobian_inverse(state.q0[3:]) @ nxt.twist
    rates = joint_velocity_commands(params, nxt, R)
    nxt.q0 = state.q0 + Ts * dq0
    rates = realise_displacements(params, state, nxt, rates, R, cache.gf, settle)
    nxt.joints = state.joints + Ts * rates
    return nxt, rates, dV

