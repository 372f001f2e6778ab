"""Kinematic and dynamic model of a quadruped with a single rigid body.

Legs are numbered FL=1, FR=2, RL=3, RR=4 (zero-based 0..3 in arrays).
Each leg has an abduction joint about the body x axis followed by two
pitch joints about y; links hang along -z at zero angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateWrench, EmptyPolygon, GimbalSingularity, LegSingularity
from .linalg import cross, inv3, rot_x, rot_y, rot_z, skew

LEG_NAMES = ("FL", "FR", "RL", "RR")
RANK_TABLE = (0, 3, 5, 6, 6)
GIMBAL_TOL = 1e-6
LEG_DET_TOL = 1e-8
ZMP_TOL = 1e-6
HULL_TOL = 1e-12

E_X = np.array([1.0, 0.0, 0.0])
E_Y = np.array([0.0, 1.0, 0.0])
E_Z = np.array([0.0, 0.0, 1.0])


@dataclass
class RobotParams:
    """Robot constants. Per-leg arrays are indexed FL, FR, RL, RR.

    ``workspaces[i]`` is ``(x_min, x_max, y_min, y_max)`` in the shadow frame.
    """

    mass: float
    inertia: np.ndarray
    hip_offsets: np.ndarray
    abduction_offsets: np.ndarray
    thigh_length: float
    shank_length: float
    foot_radius: float
    wheel_anchors: np.ndarray
    workspaces: np.ndarray
    nominal_joints: np.ndarray
    gravity: float = 9.81
    swing_time_min: float = 0.2
    swing_time_max: float = 0.2
    duty_min: float = 0.5
    duty_max: float = 0.8
    step_height: float = 0.05
    foot_kp: float = 1000.0
    foot_kd: float = 110.0
    body_kp: float = 100.0
    body_kd: float = 21.0
    sample_time: float = 0.01
    contact_threshold: float = 5e-3

    def __post_init__(self):
        self.inertia = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        self.hip_offsets = np.asarray(self.hip_offsets, dtype=float).reshape(4, 3)
        self.abduction_offsets = np.asarray(self.abduction_offsets, dtype=float).reshape(4)
        self.wheel_anchors = np.asarray(self.wheel_anchors, dtype=float).reshape(4, 3)
        self.workspaces = np.asarray(self.workspaces, dtype=float).reshape(4, 4)
        self.nominal_joints = np.asarray(self.nominal_joints, dtype=float).reshape(4, 3)
        self.validate()

    def validate(self) -> None:
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not np.allclose(self.inertia, self.inertia.T):
            raise ValueError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0):
            raise ValueError("inertia must be positive definite")
        if self.foot_radius < 0:
            raise ValueError("foot_radius must be non-negative")
        if not 0 < self.duty_min <= self.duty_max < 1:
            raise ValueError("need 0 < duty_min <= duty_max < 1")
        if not 0 < self.swing_time_min <= self.swing_time_max:
            raise ValueError("need 0 < swing_time_min <= swing_time_max")
        if not self.sample_time > 0:
            raise ValueError("sample_time must be positive")
        ws = self.workspaces
        if np.any(ws[:, 0] > ws[:, 1]) or np.any(ws[:, 2] > ws[:, 3]):
            raise ValueError("workspace intervals must be non-empty")

    @property
    def period_min(self) -> float:
        return self.swing_time_min / (1.0 - self.duty_min)

    @property
    def period_mid(self) -> float:
        return self.swing_time_min / (1.0 - self.duty_max)

    @property
    def period_max(self) -> float:
        return self.swing_time_max / (1.0 - self.duty_max)

    @property
    def mass_matrix(self) -> np.ndarray:
        M = np.zeros((6, 6))
        M[:3, :3] = self.mass * np.eye(3)
        M[3:, 3:] = self.inertia
        return M

    @property
    def mass_matrix_inv(self) -> np.ndarray:
        Mi = np.zeros((6, 6))
        Mi[:3, :3] = np.eye(3) / self.mass
        Mi[3:, 3:] = inv3(self.inertia)
        return Mi


@dataclass
class BodyState:
    """Full model state: pose, joint angles, twist and foot-point velocities.

    ``q0 = (x, y, z, roll, pitch, yaw)`` in the world frame, ``twist`` is
    ``(v, omega)`` in body coordinates and ``dgf[i]`` is the velocity of
    the contact point of foot ``i`` relative to the body, in body axes.
    """

    q0: np.ndarray = field(default_factory=lambda: np.zeros(6))
    joints: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    twist: np.ndarray = field(default_factory=lambda: np.zeros(6))
    dgf: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))

    def copy(self) -> "BodyState":
        return BodyState(self.q0.copy(), self.joints.copy(), self.twist.copy(), self.dgf.copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q0, self.joints.ravel(), self.twist, self.dgf.ravel()])


# ---------------------------------------------------------------------------
# frames and Jacobians


def body_rotation(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """World-from-body rotation ``Rz(yaw) Ry(pitch) Rx(roll)``."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def euler_rate_matrix(roll: float, pitch: float) -> np.ndarray:
    """Map from Euler-angle rates to body angular velocity."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    return np.array([[1.0, 0.0, -sp], [0.0, cr, sr * cp], [0.0, -sr, cr * cp]])


def euler_rate_matrix_dot(roll: float, pitch: float, droll: float, dpitch: float) -> np.ndarray:
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    return np.array(
        [
            [0.0, 0.0, -cp * dpitch],
            [0.0, -sr * droll, cr * cp * droll - sr * sp * dpitch],
            [0.0, -cr * droll, -sr * cp * droll - cr * sp * dpitch],
        ]
    )


def body_jacobian(angles) -> np.ndarray:
    """Jacobian mapping pose rates to body-frame twist."""
    roll, pitch, yaw = angles
    J = np.zeros((6, 6))
    J[:3, :3] = body_rotation(roll, pitch, yaw).T
    J[3:, 3:] = euler_rate_matrix(roll, pitch)
    return J


def body_jacobian_rate(angles, rates) -> np.ndarray:
    """Time derivative of :func:`body_jacobian` along the Euler rates."""
    roll, pitch, yaw = angles
    R = body_rotation(roll, pitch, yaw)
    omega = euler_rate_matrix(roll, pitch) @ np.asarray(rates, dtype=float)
    Jd = np.zeros((6, 6))
    # d/dt R^T = -[omega x] R^T with omega in body coordinates
    Jd[:3, :3] = -skew(omega) @ R.T
    Jd[3:, 3:] = euler_rate_matrix_dot(roll, pitch, rates[0], rates[1])
    return Jd


def body_jacobian_inverse(angles) -> np.ndarray:
    roll, pitch, yaw = angles
    cp = math.cos(pitch)
    if abs(cp) <= GIMBAL_TOL:
        raise GimbalSingularity(f"|cos(pitch)| = {abs(cp):.2e}")
    cr, sr = math.cos(roll), math.sin(roll)
    tp = math.tan(pitch)
    Jinv = np.zeros((6, 6))
    Jinv[:3, :3] = body_rotation(roll, pitch, yaw)
    Jinv[3:, 3:] = np.array(
        [[1.0, sr * tp, cr * tp], [0.0, cr, -sr], [0.0, sr / cp, cr / cp]]
    )
    return Jinv


# ---------------------------------------------------------------------------
# legs and feet


def leg_forward_kinematics(params: RobotParams, leg: int, q) -> tuple[np.ndarray, np.ndarray]:
    """Foot-centre position in the body frame and its 3x3 joint Jacobian."""
    q1, q2, q3 = float(q[0]), float(q[1]), float(q[2])
    Rx = rot_x(q1)
    Ry2 = rot_y(q2)
    Ry23 = rot_y(q2 + q3)
    hip = params.hip_offsets[leg]
    shank = Ry23 @ np.array([0.0, 0.0, -params.shank_length])
    knee_rel = Ry2 @ np.array([0.0, 0.0, -params.thigh_length])
    local = np.array([0.0, params.abduction_offsets[leg], 0.0]) + knee_rel + shank
    ge = hip + Rx @ local
    pitch_axis = Rx @ E_Y
    col1 = cross(E_X, Rx @ local)
    col2 = cross(pitch_axis, Rx @ (knee_rel + shank))
    col3 = cross(pitch_axis, Rx @ shank)
    J = np.column_stack([col1, col2, col3])
    return ge, J


def leg_jacobian_inverse(J: np.ndarray) -> np.ndarray:
    det = float(np.linalg.det(J))
    if abs(det) <= LEG_DET_TOL:
        raise LegSingularity(f"leg Jacobian determinant {det:.2e}")
    return inv3(J, tol=0.0)


@dataclass
class FootKinematics:
    """Per-foot points: centre and contact in world, contact in body, and
    contact-point velocity in world. All arrays are (4, 3)."""

    oe: np.ndarray
    of: np.ndarray
    gf: np.ndarray
    dof: np.ndarray
    jacobians: np.ndarray


def foot_points(params: RobotParams, state: BodyState, R: np.ndarray | None = None) -> FootKinematics:
    if R is None:
        R = body_rotation(*state.q0[3:])
    og = state.q0[:3]
    down_body = params.foot_radius * (R.T @ E_Z)
    oe = np.zeros((4, 3))
    gf = np.zeros((4, 3))
    dof = np.zeros((4, 3))
    jac = np.zeros((4, 3, 3))
    for i in range(4):
        ge, J = leg_forward_kinematics(params, i, state.joints[i])
        jac[i] = J
        gf[i] = ge - down_body
        oe[i] = og + R @ ge
        dof[i] = R @ (contact_matrix(gf[i]) @ state.twist + state.dgf[i])
    of = oe - params.foot_radius * E_Z
    return FootKinematics(oe, of, gf, dof, jac)


def contact_matrix(gf_i) -> np.ndarray:
    """3x6 block ``[I, -[gf x]]`` of a single foot."""
    A = np.zeros((3, 6))
    A[:, :3] = np.eye(3)
    A[:, 3:] = -skew(gf_i)
    return A


def rank_for_contacts(n_grounded: int) -> int:
    return RANK_TABLE[n_grounded]


def constraint_matrix(sigma, gf) -> tuple[np.ndarray, int]:
    """Stacked 12x6 constraint matrix with rows of lifted feet zeroed."""
    A = np.zeros((12, 6))
    n = 0
    for i in range(4):
        if sigma[i]:
            A[3 * i : 3 * i + 3] = contact_matrix(gf[i])
            n += 1
    return A, RANK_TABLE[n]


# ---------------------------------------------------------------------------
# dynamics


def gravity_wrench(params: RobotParams, R: np.ndarray) -> np.ndarray:
    W = np.zeros(6)
    W[:3] = R.T @ np.array([0.0, 0.0, -params.mass * params.gravity])
    return W


def coadjoint(twist) -> np.ndarray:
    """``ad*`` operator of a body twist ``(v, omega)``."""
    ad = np.zeros((6, 6))
    w = skew(twist[3:])
    ad[:3, :3] = w
    ad[3:, :3] = skew(twist[:3])
    ad[3:, 3:] = w
    return ad


def coriolis_terms(params: RobotParams, state: BodyState, gf, R: np.ndarray | None = None):
    """Velocity-product terms ``h_i`` (4, 3) of the feet and the body
    bias wrench ``h_V = W_g - ad*(V) M V``."""
    if R is None:
        R = body_rotation(*state.q0[3:])
    V = state.twist
    omega = V[3:]
    h = np.zeros((4, 3))
    for i in range(4):
        h[i] = cross(omega, contact_matrix(gf[i]) @ V + 2.0 * state.dgf[i])
    hV = gravity_wrench(params, R) - coadjoint(V) @ (params.mass_matrix @ V)
    return h, hV


def inertial_wrench(params: RobotParams, twist, twist_dot) -> tuple[np.ndarray, np.ndarray]:
    W = params.mass_matrix @ twist_dot + coadjoint(twist) @ (params.mass_matrix @ twist)
    return W[:3], W[3:]


def zmp(og, R: np.ndarray, force, moment, gravity_force) -> np.ndarray:
    """Zero-moment point on the ground plane.

    ``force``/``moment`` are the inertial wrench and ``gravity_force`` the
    weight, all in body coordinates.
    """
    f = R @ (np.asarray(force) - np.asarray(gravity_force))
    m = R @ np.asarray(moment)
    fz = f[2]
    if abs(fz) <= ZMP_TOL:
        raise DegenerateWrench(f"vertical force {fz:.2e} N")
    return np.asarray(og, dtype=float) - (og[2] * f - cross(E_Z, m)) / fz


def zmp_offset(height: float, R: np.ndarray, force, moment, gravity_force) -> np.ndarray:
    """``og - oz`` for a centre of mass at ``height``: the inverse map."""
    f = R @ (np.asarray(force) - np.asarray(gravity_force))
    m = R @ np.asarray(moment)
    if abs(f[2]) <= ZMP_TOL:
        raise DegenerateWrench(f"vertical force {f[2]:.2e} N")
    return (height * f - cross(E_Z, m)) / f[2]


# ---------------------------------------------------------------------------
# support polygon


def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def support_polygon(sigma, of) -> np.ndarray:
    """Convex hull of the grounded contact points, counter-clockwise.

    Returns a (k, 2) array with k in 0..4; collinear or repeated points
    collapse to a segment or a point.
    """
    pts = [(float(of[i][0]), float(of[i][1]), i) for i in range(4) if sigma[i]]
    if len(pts) <= 1:
        return np.array([p[:2] for p in pts]).reshape(-1, 2)
    pts.sort()
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross2(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross2(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 0:
        hull = [pts[0]]
    if len(hull) == 2 and hull[0][:2] == hull[1][:2]:
        hull = hull[:1]
    # start from the lowest leg index for a deterministic vertex order
    start = min(range(len(hull)), key=lambda k: hull[k][2])
    hull = hull[start:] + hull[:start]
    return np.array([h[:2] for h in hull])


def _project_segment(p, a, b) -> np.ndarray:
    ab = b - a
    den = float(ab @ ab)
    if den == 0.0:
        return a.copy()
    s = min(1.0, max(0.0, float((p - a) @ ab) / den))
    return a + s * ab


def polygon_contains(p, polygon: np.ndarray, tol: float = HULL_TOL) -> bool:
    """Membership of a planar point in a CCW convex polygon."""
    k = len(polygon)
    p = np.asarray(p, dtype=float)[:2]
    if k == 0:
        return False
    if k == 1:
        return bool(np.linalg.norm(p - polygon[0]) <= tol)
    if k == 2:
        q = _project_segment(p, polygon[0], polygon[1])
        return bool(np.linalg.norm(p - q) <= tol)
    for i in range(k):
        if _cross2(polygon[i], polygon[(i + 1) % k], p) < -tol:
            return False
    return True


def closest_point_in_polygon(p, polygon: np.ndarray) -> np.ndarray:
    """Point of the convex polygon nearest to ``p`` (planar; z is kept)."""
    k = len(polygon)
    if k == 0:
        raise EmptyPolygon("no grounded feet")
    p = np.asarray(p, dtype=float)
    xy = p[:2]
    if k >= 3 and polygon_contains(xy, polygon, tol=0.0):
        return p.copy()
    if k == 1:
        best = polygon[0].copy()
    else:
        best = None
        best_d = math.inf
        edges = k if k >= 3 else 1
        for i in range(edges):
            q = _project_segment(xy, polygon[i], polygon[(i + 1) % k])
            d = float((q - xy) @ (q - xy))
            if d < best_d:
                best_d = d
                best = q
    out = p.copy()
    out[:2] = best
    return out
