import dataclasses
import math

import numpy as np
import pytest

from quadctl.feet import (
    FL,
    FR,
    RL,
    RR,
    SCHEDULE_ROWS,
    SCHEDULES,
    CommandSet,
    FootRefs,
    GaitState,
    WheelState,
    clock_tick,
    compute_period,
    feet_control,
    foot_trajectory,
    footholds,
    freeze_liftoffs,
    liftoff_times,
    predominant_motion,
    select_gait_schedule,
    shadow_anchors,
    wheel_commands,
)


def wheels_at_rest(params, moving=None):
    kw = shadow_anchors(params, 0.0, 0.0)
    vel = np.zeros((4, 3))
    if moving:
        for i, v in moving.items():
            vel[i] = v
    return WheelState(kw.copy(), vel, kw)


# ---------------------------------------------------------------------------
# wheels and footholds


def test_zero_commands_give_still_wheels(go2):
    w = wheel_commands(CommandSet(), 0.3, -0.1, 0.7, shadow_anchors(go2, 0, 0))
    assert np.array_equal(w.velocities, np.zeros((4, 3)))


def test_pure_translation(go2):
    w = wheel_commands(CommandSet(v_fw=0.2), 0, 0, 0.0, shadow_anchors(go2, 0, 0))
    assert np.allclose(w.velocities, np.tile([0.2, 0, 0], (4, 1)))


def test_pure_rotation_is_tangential(go2):
    kw = shadow_anchors(go2, 0, 0)
    w = wheel_commands(CommandSet(yaw_rate=0.5), 0, 0, 0.0, kw)
    for i in range(4):
        assert np.allclose(w.velocities[i], 0.5 * np.cross([0, 0, 1], kw[i]), atol=1e-15)
        assert abs(w.velocities[i] @ kw[i]) <= 1e-15
    assert w.velocities[FL, 0] < 0 < w.velocities[FL, 1]


def test_shadow_anchors_flatten_tilt(go2):
    kw = shadow_anchors(go2, 0.1, -0.1)
    assert np.array_equal(kw[:, 2], np.zeros(4))


def test_footholds():
    w = WheelState(np.zeros((4, 3)), np.zeros((4, 3)), np.zeros((4, 3)))
    s, e = footholds(w, 0.3, 1.0)
    assert np.array_equal(s, w.positions) and np.array_equal(e, w.positions)
    w.velocities[:] = [0.3, 0, 0]
    s, e = footholds(w, 0.0, 1.0)
    assert np.allclose(e, np.tile([0.3, 0, 0], (4, 1)))
    w.positions = s + 0.5 * (e - s)
    s2, e2 = footholds(w, 0.5, 1.0)
    assert np.allclose(s2, s) and np.allclose(e2, e)


# ---------------------------------------------------------------------------
# period


def test_idle_period_is_maximal(go2):
    T, beta, Tsw, clamped = compute_period(wheels_at_rest(go2), 0.0, go2, (0, 0, 0))
    assert (T, beta, Tsw, clamped) == pytest.approx((1.0, 0.8, 0.2, False))
    assert not clamped


def test_period_from_workspace_exit(go2):
    kw = shadow_anchors(go2, 0, 0)
    ws = go2.workspaces.copy()
    ws[FL] = (kw[FL, 0] - 0.1, kw[FL, 0] + 0.24, kw[FL, 1] - 0.1, kw[FL, 1] + 0.1)
    p = dataclasses.replace(go2, workspaces=ws)
    T, beta, Tsw, clamped = compute_period(wheels_at_rest(p, {FL: [0.3, 0, 0]}), 0.0, p, (0, 0, 0))
    assert T == pytest.approx(0.8, abs=1e-12)
    assert beta == pytest.approx(0.75, abs=1e-12)
    assert Tsw == pytest.approx(0.2, abs=1e-12)
    assert not clamped


def test_period_clamps_at_boundary(go2):
    kw = shadow_anchors(go2, 0, 0)
    ws = go2.workspaces.copy()
    ws[FL] = (kw[FL, 0] - 0.1, kw[FL, 0], kw[FL, 1] - 0.1, kw[FL, 1] + 0.1)
    p = dataclasses.replace(go2, workspaces=ws)
    T, beta, Tsw, clamped = compute_period(wheels_at_rest(p, {FL: [0.3, 0, 0]}), 0.0, p, (0, 0, 0))
    assert T == pytest.approx(0.4) and clamped
    assert beta == pytest.approx(0.5) and Tsw == pytest.approx(0.2)


def test_period_invariants(go2, rng):
    for _ in range(200):
        cmds = CommandSet(*rng.uniform(-1, 1, 2), rng.uniform(-2, 2))
        w = wheel_commands(cmds, 0, 0, 0, shadow_anchors(go2, 0, 0))
        t = rng.uniform(0, 0.4)
        T, beta, Tsw, _ = compute_period(w, t, go2, (0, 0, 0))
        assert go2.period_min - 1e-12 <= T <= go2.period_max + 1e-12
        assert go2.duty_min - 1e-12 <= beta <= go2.duty_max + 1e-12
        assert abs(Tsw - (1 - beta) * T) <= 1e-9


# ---------------------------------------------------------------------------
# clock and schedule


def test_clock_rollover():
    g = GaitState(1.0, 0.8, 0.2, t=0.99)
    assert clock_tick(g, 0.01) and g.t == 0.0
    g.t = 0.5
    assert not clock_tick(g, 0.01) and g.t == pytest.approx(0.51)


def test_clock_rolls_over_when_period_shrinks():
    g = GaitState(1.0, 0.8, 0.2, t=0.6)
    g.period = 0.5
    assert clock_tick(g, 0.01) and g.t == 0.0


def test_schedule_rows_start_with_front_left():
    assert len(set(SCHEDULE_ROWS)) == 6
    for row in SCHEDULE_ROWS:
        assert row[0] == FL and sorted(row) == [0, 1, 2, 3]


def test_liftoff_times():
    t = liftoff_times(SCHEDULES["forward"], 1.0, 0.2)
    assert np.allclose([t[FL], t[RR], t[FR], t[RL]], [0.0, 0.3, 0.5, 0.8])


@pytest.mark.parametrize(
    "cmds,row",
    [
        (CommandSet(v_fw=0.2), (FL, RR, FR, RL)),
        (CommandSet(v_fw=-0.2), (FL, RL, FR, RR)),
        (CommandSet(v_lw=0.2), (FL, RR, RL, FR)),
        (CommandSet(v_lw=-0.2), (FL, FR, RL, RR)),
        (CommandSet(yaw_rate=0.5), (FL, RL, RR, FR)),
        (CommandSet(yaw_rate=-0.5), (FL, FR, RR, RL)),
        (CommandSet(v_fw=0.02, yaw_rate=1.0), (FL, RL, RR, FR)),
        (CommandSet(v_fw=0.02, yaw_rate=-1.0), (FL, FR, RR, RL)),
    ],
)
def test_schedule_selection(go2, cmds, row):
    w = wheel_commands(cmds, 0, 0, 0, shadow_anchors(go2, 0, 0))
    assert select_gait_schedule(cmds, w, True, SCHEDULES["left"]) == row


def test_schedule_held_between_rollovers(go2):
    cmds = CommandSet(v_fw=-0.2)
    w = wheel_commands(cmds, 0, 0, 0, shadow_anchors(go2, 0, 0))
    assert select_gait_schedule(cmds, w, False, SCHEDULES["left"]) == SCHEDULES["left"]
    assert predominant_motion(CommandSet(), w) is None


# ---------------------------------------------------------------------------
# swing trajectory


def swing_gait(t):
    g = GaitState(1.0, 0.8, 0.2, idle=False)
    g.liftoff = liftoff_times(SCHEDULES["forward"], 1.0, 0.2)
    g.t = t
    return g


START = np.array([[0.2, 0.2, 0.0], [0.2, -0.2, 0.0], [-0.2, 0.2, 0.0], [-0.2, -0.2, 0.0]])
VEL = np.tile([0.3, 0.05, 0.0], (4, 1))


def test_swing_start():
    refs = foot_trajectory(swing_gait(0.0), START, VEL, 0.05)
    assert np.array_equal(refs.position[FL], START[FL])
    assert np.array_equal(refs.velocity[FL], np.zeros(3))
    assert np.array_equal(refs.acceleration[FL], np.zeros(3))


def test_swing_apex():
    refs = foot_trajectory(swing_gait(0.1), START, VEL, 0.05)
    assert refs.position[FL, 2] == pytest.approx(START[FL, 2] + 0.05, abs=1e-15)


def test_swing_end_lands_on_foothold():
    refs = foot_trajectory(swing_gait(0.2), START, VEL, 0.05)
    assert np.allclose(refs.position[FL], START[FL] + 1.0 * VEL[FL], atol=1e-15)
    assert np.abs(refs.velocity[FL]).max() <= 1e-12
    assert np.abs(refs.acceleration[FL]).max() <= 1e-12


def test_swing_derivatives_finite_difference():
    eps = 1e-6
    for t in np.linspace(0.01, 0.19, 9):
        a = foot_trajectory(swing_gait(t), START, VEL, 0.05)
        b = foot_trajectory(swing_gait(t + eps), START, VEL, 0.05)
        assert np.allclose((b.position[FL] - a.position[FL]) / eps, a.velocity[FL], atol=1e-4)
        assert np.allclose((b.velocity[FL] - a.velocity[FL]) / eps, a.acceleration[FL], atol=1e-2)


def test_stance_feet_stay_at_start():
    refs = foot_trajectory(swing_gait(0.1), START, VEL, 0.05)
    for i in (FR, RL, RR):
        assert np.array_equal(refs.position[i], START[i])


# ---------------------------------------------------------------------------
# foot PD


def test_foot_pd():
    acc = np.arange(12.0).reshape(4, 3)
    refs = FootRefs(START.copy(), VEL.copy(), acc)
    assert np.array_equal(feet_control(refs, START, VEL, 1000, 110), acc)
    e = np.full((4, 3), 0.001)
    out = feet_control(refs, START - e, VEL, 1000, 110)
    assert np.allclose(out, acc + 1000 * e)
    still = FootRefs(START.copy(), np.zeros((4, 3)), np.zeros((4, 3)))
    assert np.array_equal(feet_control(still, START, np.zeros((4, 3)), 1000, 110), np.zeros((4, 3)))


# ---------------------------------------------------------------------------
# lift-off freezing


def test_started_swing_keeps_its_window():
    g = GaitState(1.0, 0.8, 0.2, idle=False, t=0.55)
    g.started = np.array([0.0, 0.3, np.nan, np.nan])
    g.liftoff = np.array([0.0, 0.45, 0.6, 0.95])  # recomputed for a longer period
    freeze_liftoffs(g, 0.01)
    assert np.allclose(g.liftoff, [0.0, 0.3, 0.6, 0.95])
    assert not g.swinging(FR)


def test_window_moved_into_the_past_starts_now():
    g = GaitState(0.6, 0.67, 0.2, idle=False, t=0.5)
    g.liftoff = np.array([0.0, 0.1, 0.3, 0.4])
    g.started = np.array([0.0, 0.1, np.nan, np.nan])
    freeze_liftoffs(g, 0.01)
    assert g.liftoff[RL] == 0.5 and g.liftoff[RR] == 0.5
    assert g.started[RL] == 0.5


def test_regular_crossing_keeps_exact_liftoff():
    g = GaitState(1.0, 0.8, 0.2, idle=False, t=0.5)
    g.liftoff = np.array([0.0, 0.3, 0.495, 0.8])
    g.started = np.array([0.0, 0.3, np.nan, np.nan])
    freeze_liftoffs(g, 0.01)
    assert g.liftoff[RL] == 0.495 and g.started[RL] == 0.495
    assert np.isnan(g.started[RR])
