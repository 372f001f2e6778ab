import dataclasses
import math

import numpy as np
import pytest

from quadctl.body import (
    body_control,
    joint_velocity_commands,
    pose_rates,
    refresh_decomposition,
    step_internal_model,
    twist_rate,
    wrap_angle,
)
from quadctl.errors import LegSingularity
from quadctl.feet import CommandSet
from quadctl.linalg import Workspace
from quadctl.model import E_Z, body_jacobian_inverse, body_rotation, foot_points, leg_forward_kinematics
from quadctl.sim import Controller, standing_state

ALL = [1, 1, 1, 1]


def setup(params, sigma=ALL):
    st = standing_state(params)
    fk = foot_points(params, st)
    return st, fk, refresh_decomposition(params, st, sigma, fk.gf)


def test_wrap_angle():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_no_contacts_is_ballistic(go2):
    st, _, c = setup(go2, [0, 0, 0, 0])
    assert c.rank == 0
    assert np.allclose(c.Lam, go2.mass_matrix_inv)
    assert np.allclose(c.fV, c.Lam @ c.hV)
    assert body_control(go2, st.q0, np.zeros(6), st, c).shape == (0,)
    dV = twist_rate(c, np.zeros(0))
    assert np.allclose(dV, [0, 0, -go2.gravity, 0, 0, 0], atol=1e-12)


def test_full_support_has_no_free_motion(go2):
    _, _, c = setup(go2)
    assert c.rank == 6
    assert np.abs(c.Lam).max() <= 1e-9


def test_two_feet_rank_five(go2, rng):
    st = standing_state(go2)
    gf = foot_points(go2, st).gf + rng.uniform(-0.02, 0.02, (4, 3))
    c = refresh_decomposition(go2, st, [1, 0, 0, 1], gf)
    assert c.rank == 5 and c.ldq.Q.shape == (5, 12)
    assert np.abs(c.ldq.Q @ c.ldq.Q.T - np.eye(5)).max() <= 1e-9


def test_standing_equilibrium(go2):
    st, _, c = setup(go2)
    uV = body_control(go2, st.q0, np.zeros(6), st, c)
    nxt, rates, dV = step_internal_model(go2, st, c, uV, np.zeros((4, 3)), [True] * 4, go2.sample_time)
    assert np.abs(dV).max() <= 1e-9
    assert np.abs(pose_rates(nxt)).max() <= 1e-9
    nxt, rates, _ = step_internal_model(go2, st, c, np.zeros(6), np.zeros((4, 3)), [True] * 4, go2.sample_time)
    assert np.abs(nxt.q0 - st.q0).max() <= 1e-12
    assert np.abs(rates).max() <= 1e-9


def test_height_error_gives_linear_response(go2):
    st, _, c = setup(go2)
    ref = st.q0.copy()
    ref[2] += 0.01
    uV = body_control(go2, ref, np.zeros(6), st, c)
    dV = twist_rate(c, uV)
    ddq0 = body_jacobian_inverse(st.q0[3:]) @ dV
    assert np.abs(ddq0 - [0, 0, go2.body_kp * 0.01, 0, 0, 0]).max() <= 1e-9


def test_ballistic_integrator_order(go2):
    """Free fall under semi-implicit Euler: position error halves with the step."""

    def fall_error(Ts, t_end=0.5):
        st = standing_state(go2)
        z0 = st.q0[2]
        for _ in range(int(round(t_end / Ts))):
            fk = foot_points(go2, st)
            c = refresh_decomposition(go2, st, [0, 0, 0, 0], fk.gf)
            st, _, _ = step_internal_model(go2, st, c, np.zeros(0), np.zeros((4, 3)), [False] * 4, Ts)
        return abs(st.q0[2] - (z0 - 0.5 * go2.gravity * t_end**2))

    e1, e2 = fall_error(0.01), fall_error(0.005)
    assert e2 < e1
    assert e1 / e2 == pytest.approx(2.0, rel=0.05)


def test_joint_rates_at_rest(go2):
    assert np.array_equal(joint_velocity_commands(go2, standing_state(go2)), np.zeros((4, 3)))


def test_point_foot_joint_rates(go2, rng):
    p = dataclasses.replace(go2, foot_radius=0.0)
    st = standing_state(p)
    st.twist = rng.standard_normal(6)
    st.dgf = rng.standard_normal((4, 3)) * 0.1
    rates = joint_velocity_commands(p, st)
    for i in range(4):
        _, J = leg_forward_kinematics(p, i, st.joints[i])
        assert np.abs(rates[i] - np.linalg.solve(J, st.dgf[i])).max() <= 1e-12


def test_joint_rates_round_trip(go2, rng):
    st = standing_state(go2)
    st.q0[3:] = rng.uniform(-0.2, 0.2, 3)
    st.twist = rng.standard_normal(6)
    st.dgf = rng.standard_normal((4, 3)) * 0.1
    rates = joint_velocity_commands(go2, st)
    R = body_rotation(*st.q0[3:])
    lever = np.cross(st.twist[3:], go2.foot_radius * (R.T @ E_Z))
    for i in range(4):
        _, J = leg_forward_kinematics(go2, i, st.joints[i])
        assert np.abs(J @ rates[i] + lever - st.dgf[i]).max() <= 1e-9


def test_singular_leg_is_reported(go2):
    st = standing_state(go2)
    st.joints[2] = [0.0, 0.0, 0.0]  # fully stretched: knee singularity
    with pytest.raises(LegSingularity, match="leg 2"):
        joint_velocity_commands(go2, st)


def test_swing_foot_acceleration_does_not_disturb_body(go2, rng):
    st = standing_state(go2)
    ref = st.q0.copy()
    sigma = [1, 1, 1, 0]
    held = [True, True, True, False]
    worst = 0.0
    for _ in range(50):
        fk = foot_points(go2, st)
        c = refresh_decomposition(go2, st, sigma, fk.gf)
        uV = body_control(go2, ref, np.zeros(6), st, c)
        ddof = np.zeros((4, 3))
        ddof[3] = rng.uniform(-5, 5, 3)
        st, _, _ = step_internal_model(go2, st, c, uV, ddof, held, go2.sample_time)
        worst = max(worst, float(np.abs(st.q0 - ref).max()))
    assert worst <= 1e-9


def test_contact_flip_keeps_pose_continuous(go2):
    st = standing_state(go2)
    ctrl = Controller(go2, st, ALL)
    cmds = CommandSet(height=float(st.q0[2]))
    _, d1 = ctrl.step(cmds, st.joints, ALL)
    q_before = ctrl.state.q0.copy()
    ctrl.end_tick()
    _, d2 = ctrl.step(cmds, ctrl.state.joints, [1, 1, 1, 0])
    assert d1.rank == 6 and d2.grounded == 3 and d2.rank == 6
    assert np.abs(ctrl.state.q0 - q_before).max() <= 1e-6


def test_decomposition_workspace_reused(go2):
    st = standing_state(go2)
    fk = foot_points(go2, st)
    ws = Workspace(12)
    ids = [id(b) for b in ws.buffers()]
    for sigma in ([1, 1, 1, 1], [1, 0, 0, 1], [0, 1, 1, 1], [1, 0, 0, 0]):
        refresh_decomposition(go2, st, sigma, fk.gf, ws)
    assert ids == [id(b) for b in ws.buffers()]
