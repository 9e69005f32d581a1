"""Slack-cable and taut-cable controllers.

Slack cable: feedback-linearising pose tracker on the UAV's dual quaternion.
The commanded body force is a full 3-vector, so it is realised the same way as
in the taut case: thrust magnitude plus a tilt of the body z-axis onto the
commanded inertial force, with the tilt tracked by the attitude law.

Taut cable: the load position/direction controller produces the inertial force
F_uI, which is converted to thrust magnitude and a desired UAV attitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Protocol

import numpy as np

from .dqmath import (
    IDENTITY,
    DualQuaternion,
    DualVector,
    InvalidInputError,
    canonical,
    cross,
    dot,
    norm,
    quat_angle_axis,
    quat_conj,
    quat_mul,
    quat_rotate,
    translation_body,
)
from .dynamics import (
    E3,
    CargoParams,
    RigidBodyParams,
    RigidBodyState,
    TautState,
    gravity_body,
    gyroscopic_accel,
    load_drift,
    pose_error,
    pose_error_rate,
    twist_error,
    twist_feedforward,
)

B_AXIS = E3
DIRECTION_TOL = 1e-6


class DegenerateCommandError(ValueError):
    """Requested load acceleration cancels gravity; no cable direction exists."""


class SingularTiltError(ValueError):
    """Commanded force is zero or points straight down the body axis."""


def _positive(name: str, *arrays) -> None:
    for a in arrays:
        if np.any(np.asarray(a) <= 0):
            raise ValueError(f"{name}: all gain components must be positive")


@dataclass(frozen=True)
class SlackGains:
    kp: DualVector
    kv: DualVector

    def __post_init__(self):
        _positive("SlackGains", *self.kp, *self.kv)


@dataclass(frozen=True)
class TautGains:
    kp_load: DualVector
    kv_load: DualVector
    kp_att: np.ndarray
    kv_att: np.ndarray

    def __post_init__(self):
        _positive("TautGains", *self.kp_load, *self.kv_load, self.kp_att, self.kv_att)


@dataclass(frozen=True)
class LoadReference:
    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray


@dataclass(frozen=True)
class ControlOutput:
    torque_body: np.ndarray
    thrust_body: np.ndarray
    f: float
    desired_attitude: np.ndarray
    force_inertial: np.ndarray
    # taut-only diagnostics
    qc_des: np.ndarray | None = None
    qc_des_dot: np.ndarray | None = None
    load_errors: tuple[DualVector, DualVector] | None = None


@dataclass(frozen=True)
class ControllerMemory:
    """One-step memory for differentiating the desired cable direction."""

    prev_qc_des: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Thrust / attitude synthesis
# ---------------------------------------------------------------------------

def force_to_body(q_v: np.ndarray, force_inertial: np.ndarray) -> np.ndarray:
    return quat_rotate(quat_conj(q_v), force_inertial)


def thrust_extraction(force_body: np.ndarray) -> tuple[np.ndarray, float]:
    f = float(norm(force_body))
    return np.array([0.0, 0.0, f]), f


def tilt_quaternion(force_inertial: np.ndarray, force_current: np.ndarray) -> np.ndarray:
    """q_t = ((b·F_uI + |F_uI|) + b × F_uc) / |·| with b the body thrust axis."""
    mag = float(norm(force_inertial))
    if mag < 1e-9:
        raise SingularTiltError("commanded force is zero")
    w = float(dot(B_AXIS, force_inertial)) + mag
    q = np.concatenate([[w], cross(B_AXIS, force_current)])
    n = float(norm(q))
    if n < 1e-9:
        raise SingularTiltError("commanded force is antiparallel to the thrust axis")
    return q / n


def desired_attitude(q_zd: np.ndarray, q_t: np.ndarray) -> np.ndarray:
    return quat_mul(q_zd, q_t)


def attitude_control(
    params: RigidBodyParams,
    q_v: np.ndarray,
    omega_v: np.ndarray,
    q_v_des: np.ndarray,
    omega_des: np.ndarray,
    kp: np.ndarray,
    kv: np.ndarray,
) -> np.ndarray:
    """τ_u = −J (k_p θ_ve + k_v ω_ve + a_v), a_v the gyroscopic term (no external torque)."""
    q_ve = canonical(quat_mul(quat_conj(q_v_des), q_v))
    theta = quat_angle_axis(q_ve)
    omega_e = omega_v - quat_rotate(quat_conj(q_ve), omega_des)
    a_v = gyroscopic_accel(params, omega_v)
    return -params.inertia @ (kp * theta + kv * omega_e + a_v)


def taut_attitude_control(
    params: CargoParams | RigidBodyParams,
    q_v: np.ndarray,
    omega_v: np.ndarray,
    q_v_des: np.ndarray,
    omega_des: np.ndarray,
    gains: TautGains,
) -> np.ndarray:
    uav = params.uav if isinstance(params, CargoParams) else params
    return attitude_control(uav, q_v, omega_v, q_v_des, omega_des, gains.kp_att, gains.kv_att)


def _realise_force(
    uav: RigidBodyParams,
    q_v: np.ndarray,
    omega_v: np.ndarray,
    force_inertial: np.ndarray,
    q_zd: np.ndarray,
    omega_des: np.ndarray,
    kp_att: np.ndarray,
    kv_att: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, float, np.ndarray]:
    force_body = force_to_body(q_v, force_inertial)
    thrust_body, f = thrust_extraction(force_body)
    # the thrust currently being commanded in inertial axes is F_uI itself
    q_t = tilt_quaternion(force_inertial, force_inertial)
    q_des = desired_attitude(q_zd, q_t)
    torque = attitude_control(uav, q_v, omega_v, q_des, omega_des, kp_att, kv_att)
    return torque, thrust_body, f, q_des


# ---------------------------------------------------------------------------
# Slack cable
# ---------------------------------------------------------------------------

def slack_body_force(
    params: RigidBodyParams,
    state: RigidBodyState,
    desired_pose: DualQuaternion,
    desired_twist: DualVector,
    desired_twist_dot: DualVector,
    gains: SlackGains,
    gravity: float,
) -> np.ndarray:
    """Body-frame force of the feedback-linearising pose law (gravity compensated)."""
    m_v = params.mass
    q_e = pose_error(desired_pose, state.pose)
    xi_e = twist_error(state, desired_pose, desired_twist)
    t_e = translation_body(q_e)
    omega = state.twist.real
    t_body = translation_body(state.pose)
    t_dot = state.twist.dual - cross(omega, t_body)
    a_v = gyroscopic_accel(params, omega)
    ff = twist_feedforward(q_e, pose_error_rate(q_e, state.twist, desired_twist), desired_twist, desired_twist_dot)
    accel = (
        gains.kp.dual * t_e
        + gains.kv.dual * xi_e.dual
        + cross(a_v, t_body)
        + cross(omega, t_dot)
        - ff.dual
    )
    return -m_v * accel - m_v * gravity_body(state.pose.real, gravity)


def slack_control(
    params: CargoParams | RigidBodyParams,
    state: RigidBodyState,
    desired_pose: DualQuaternion,
    desired_twist: DualVector,
    desired_twist_dot: DualVector,
    gains: SlackGains,
    gravity: float,
) -> ControlOutput:
    uav = params.uav if isinstance(params, CargoParams) else params
    force_body = slack_body_force(uav, state, desired_pose, desired_twist, desired_twist_dot, gains, gravity)
    force_inertial = quat_rotate(state.pose.real, force_body)
    torque, thrust_body, f, q_des = _realise_force(
        uav,
        state.pose.real,
        state.twist.real,
        force_inertial,
        desired_pose.real,
        desired_twist.real,
        gains.kp.real,
        gains.kv.real,
    )
    return ControlOutput(torque, thrust_body, f, q_des, force_inertial)


# ---------------------------------------------------------------------------
# Taut cable
# ---------------------------------------------------------------------------

def _check_direction(v: np.ndarray, name: str) -> None:
    if abs(float(norm(v)) - 1.0) > DIRECTION_TOL:
        raise InvalidInputError(f"{name} is not a unit vector")


def load_tracking_errors(
    state: TautState,
    ref: LoadReference,
    qc_des: np.ndarray,
    qc_des_dot: np.ndarray,
) -> tuple[DualVector, DualVector]:
    """(q̂_le, ξ̂_le) with q_ce = q_c × (q_c × q_c^d) and q̇_ce = q̇_c − (q_c^d × q̇_c^d) × q_c."""
    qc, qc_dot = state.qc, state.qc_dot
    _check_direction(qc, "q_c")
    _check_direction(qc_des, "desired q_c")
    q_ce = cross(qc, cross(qc, qc_des))
    q_ce_dot = qc_dot - cross(cross(qc_des, qc_des_dot), qc)
    return (
        DualVector(q_ce, state.load_pos - ref.pos),
        DualVector(q_ce_dot, state.load_vel - ref.vel),
    )


def desired_load_attitude(
    errors_T: np.ndarray,
    errors_Tdot: np.ndarray,
    acc_des: np.ndarray,
    gains: TautGains,
    gravity: float,
) -> np.ndarray:
    v = -gains.kp_load.dual * errors_T - gains.kv_load.dual * errors_Tdot + acc_des + gravity * E3
    n = float(norm(v))
    if n < 1e-9:
        raise DegenerateCommandError("desired load acceleration cancels gravity")
    return v / n


def desired_force_inertial(
    params: CargoParams,
    state: TautState,
    errors: tuple[DualVector, DualVector],
    fl_parts: DualVector,
    gains: TautGains,
) -> np.ndarray:
    """Inertial force F_uI = −m (k_pld T_le + k_vld Ṫ_le + F̂_l^d) − m_v l (k_plr q_ce + k_vlr q̇_ce).

    The first term sets the cable tension (q_c·F_uI); the second is normal to
    q_c and swings the cable towards q_c^d. F̂_l^r lies along q_c, so there is
    no normal component of it to cancel.
    """
    q_le, xi_le = errors
    m = params.total_mass
    m_v = params.uav.mass
    l = params.cable_length
    along = -m * (gains.kp_load.dual * q_le.dual + gains.kv_load.dual * xi_le.dual + fl_parts.dual)
    across = -m_v * l * (gains.kp_load.real * q_le.real + gains.kv_load.real * xi_le.real)
    return along + across


def desired_direction_rate(qc_des: np.ndarray, prev: np.ndarray | None, dt: float) -> np.ndarray:
    """Backward difference of q_c^d projected onto the sphere's tangent plane."""
    if prev is None:
        return np.zeros(3)
    rate = (qc_des - prev) / dt
    return rate - dot(rate, qc_des) * qc_des


def taut_control_step(
    params: CargoParams,
    state: TautState,
    ref: LoadReference,
    gains: TautGains,
    gravity: float,
    memory: ControllerMemory = ControllerMemory(),
    dt: float = 0.01,
    yaw: np.ndarray = IDENTITY,
) -> tuple[ControlOutput, ControllerMemory]:
    t_le = state.load_pos - ref.pos
    t_le_dot = state.load_vel - ref.vel
    qc_des = desired_load_attitude(t_le, t_le_dot, ref.acc, gains, gravity)
    qc_des_dot = desired_direction_rate(qc_des, memory.prev_qc_des, dt)
    errors = load_tracking_errors(state, ref, qc_des, qc_des_dot)
    fl = load_drift(params, state, gravity)
    force_inertial = desired_force_inertial(params, state, errors, fl, gains)
    torque, thrust_body, f, q_des = _realise_force(
        params.uav,
        state.uav_attitude,
        state.uav_omega,
        force_inertial,
        yaw,
        np.zeros(3),
        gains.kp_att,
        gains.kv_att,
    )
    out = ControlOutput(torque, thrust_body, f, q_des, force_inertial, qc_des, qc_des_dot, errors)
    return out, replace(memory, prev_qc_des=qc_des)


# ---------------------------------------------------------------------------
# Controller interface used by the simulator
# ---------------------------------------------------------------------------

class Controller(Protocol):
    """Anything the closed-loop simulator can drive.

    ``slack`` is called in Setup/Pull, ``taut`` in Raise/Track.
    """

    def slack(self, state: RigidBodyState, desired_pose: DualQuaternion) -> ControlOutput: ...

    def taut(
        self, state: TautState, ref: LoadReference, memory: ControllerMemory, dt: float
    ) -> tuple[ControlOutput, ControllerMemory]: ...


@dataclass(frozen=True)
class DualQuaternionController:
    params: CargoParams
    slack_gains: SlackGains
    taut_gains: TautGains
    gravity: float = 9.81
    yaw: np.ndarray = field(default_factory=lambda: IDENTITY.copy())

    def slack(self, state: RigidBodyState, desired_pose: DualQuaternion) -> ControlOutput:
        zero = DualVector(np.zeros(3), np.zeros(3))
        return slack_control(self.params, state, desired_pose, zero, zero, self.slack_gains, self.gravity)

    def taut(
        self, state: TautState, ref: LoadReference, memory: ControllerMemory, dt: float
    ) -> tuple[ControlOutput, ControllerMemory]:
        return taut_control_step(self.params, state, ref, self.taut_gains, self.gravity, memory, dt, self.yaw)


def default_gains() -> tuple[SlackGains, TautGains]:
    """Controller gains of the reference lifting/tracking scenario."""
    slack = SlackGains(
        kp=DualVector(np.array([10.0, 10.0, 10.0]), np.array([1.0, 1.0, 4.0])),
        kv=DualVector(np.array([1.0, 1.0, 1.0]), np.array([1.0, 1.0, 4.0])),
    )
    taut = TautGains(
        kp_load=DualVector(np.array([2.0, 2.0, 2.0]), np.array([1.0, 1.0, 4.0])),
        kv_load=DualVector(np.array([0.5, 0.5, 0.5]), np.array([1.0, 1.0, 4.0])),
        kp_att=slack.kp.real,
        kv_att=slack.kv.real,
    )
    return slack, taut
