"""Rigid-body and cargo-UAV dynamics in dual-quaternion form.

Everything here is an explicit state-derivative function. The UAV alone is the
rigid-body model

    q̂' = 0.5 q̂ ⊗ ξ̂,    ξ̂' = F̂ + û

with twist ξ̂ = ω + (ω × T + T') ε, T the body-frame translation. The cargo
system switches between a slack model (two decoupled bodies, load grounded or
falling) and a taut model (load configuration q_c + T_l ε, UAV attitude only).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dqmath import (
    DualQuaternion,
    DualVector,
    adjoint,
    cross,
    dot,
    dq_conj,
    dq_mul,
    dq_scale,
    dq_add,
    dv_as_dq,
    dv_sub,
    norm,
    quat_conj,
    quat_mul,
    quat_rotate,
    translation_body,
    translation_inertial,
    vec_quat,
)

E3 = np.array([0.0, 0.0, 1.0])
QC_DRIFT_LIMIT = 1e-4


class InvalidStateError(ValueError):
    """State has the wrong cable regime for the requested model."""


class ConstraintViolationError(RuntimeError):
    """Cable direction drifted off the unit sphere."""


@dataclass(frozen=True, eq=False)
class RigidBodyParams:
    mass: float
    inertia: np.ndarray
    inertia_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        J = np.array(self.inertia, dtype=float)
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if J.shape != (3, 3) or not np.allclose(J, J.T):
            raise ValueError("inertia must be a symmetric 3x3 matrix")
        if np.min(np.linalg.eigvalsh(J)) <= 0:
            raise ValueError("inertia must be positive definite")
        object.__setattr__(self, "inertia", J)
        object.__setattr__(self, "inertia_inv", np.linalg.inv(J))


@dataclass(frozen=True, eq=False)
class CargoParams:
    uav: RigidBodyParams
    load_mass: float
    cable_length: float

    def __post_init__(self):
        if not self.load_mass > 0:
            raise ValueError(f"load_mass must be positive, got {self.load_mass}")
        if not self.cable_length > 0:
            raise ValueError(f"cable_length must be positive, got {self.cable_length}")

    @property
    def total_mass(self) -> float:
        return self.uav.mass + self.load_mass


@dataclass(frozen=True)
class WrenchInput:
    torque: np.ndarray
    force: np.ndarray

    @classmethod
    def zero(cls) -> "WrenchInput":
        return cls(np.zeros(3), np.zeros(3))


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RigidBodyState:
    pose: DualQuaternion
    twist: DualVector

    SIZE = 14

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.pose.real, self.pose.dual, self.twist.real, self.twist.dual], axis=-1)

    @classmethod
    def from_array(cls, x: np.ndarray) -> "RigidBodyState":
        return cls(
            DualQuaternion(x[..., 0:4], x[..., 4:8]),
            DualVector(x[..., 8:11], x[..., 11:14]),
        )

    @property
    def attitude(self) -> np.ndarray:
        return self.pose.real

    @property
    def omega(self) -> np.ndarray:
        return self.twist.real

    def position(self) -> np.ndarray:
        """Inertial-frame position."""
        return translation_inertial(self.pose)

    def velocity(self) -> np.ndarray:
        """Inertial-frame velocity; the twist's dual part is it in body axes."""
        return quat_rotate(self.pose.real, self.twist.dual)


class Regime(Enum):
    SLACK = "slack"
    TAUT = "taut"


@dataclass(frozen=True)
class SlackState:
    uav: RigidBodyState
    load_pos: np.ndarray
    load_vel: np.ndarray

    regime = Regime.SLACK
    SIZE = 20

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.uav.to_array(), self.load_pos, self.load_vel])

    @classmethod
    def from_array(cls, x: np.ndarray) -> "SlackState":
        return cls(RigidBodyState.from_array(x[:14]), x[14:17], x[17:20])


@dataclass(frozen=True)
class TautState:
    """Taut-cable state: load configuration q_c + T_l ε, its rate, UAV attitude and body rate.

    ``q_c`` points from the load to the UAV, so the UAV sits at T_l + l q_c.
    """

    load_config: DualVector
    load_twist: DualVector
    uav_attitude: np.ndarray
    uav_omega: np.ndarray

    regime = Regime.TAUT
    SIZE = 19

    @property
    def qc(self) -> np.ndarray:
        return self.load_config.real

    @property
    def qc_dot(self) -> np.ndarray:
        return self.load_twist.real

    @property
    def load_pos(self) -> np.ndarray:
        return self.load_config.dual

    @property
    def load_vel(self) -> np.ndarray:
        return self.load_twist.dual

    def to_array(self) -> np.ndarray:
        return np.concatenate(
            [
                self.load_config.real,
                self.load_config.dual,
                self.load_twist.real,
                self.load_twist.dual,
                self.uav_attitude,
                self.uav_omega,
            ]
        )

    @classmethod
    def from_array(cls, x: np.ndarray) -> "TautState":
        return cls(
            DualVector(x[0:3], x[3:6]),
            DualVector(x[6:9], x[9:12]),
            x[12:16],
            x[16:19],
        )


CargoState = SlackState | TautState


# ---------------------------------------------------------------------------
# Rigid body
# ---------------------------------------------------------------------------

def twist_of(omega_body: np.ndarray, t_body: np.ndarray, t_body_dot: np.ndarray) -> DualVector:
    return DualVector(np.asarray(omega_body, dtype=float), cross(omega_body, t_body) + t_body_dot)


def body_translation_rate(state: RigidBodyState) -> np.ndarray:
    """Ṫ^b recovered from the twist: dual − ω × T^b."""
    t_body = translation_body(state.pose)
    return state.twist.dual - cross(state.twist.real, t_body)


def rigid_kinematics(state: RigidBodyState) -> DualQuaternion:
    return dq_scale(dq_mul(state.pose, dv_as_dq(state.twist)), 0.5)


def gyroscopic_accel(params: RigidBodyParams, omega: np.ndarray) -> np.ndarray:
    """a = −J⁻¹ (ω × J ω)."""
    return -cross(omega, omega @ params.inertia.T) @ params.inertia_inv.T


def rigid_dynamics(
    params: RigidBodyParams,
    state: RigidBodyState,
    input: WrenchInput,
    ext: WrenchInput | None = None,
) -> DualVector:
    """Twist derivative F̂ + û for body-frame torque and force."""
    torque = input.torque if ext is None else input.torque + ext.torque
    force = input.force if ext is None else input.force + ext.force
    omega = state.twist.real
    t_body = translation_body(state.pose)
    t_dot = state.twist.dual - cross(omega, t_body)
    a = gyroscopic_accel(params, omega)
    alpha_u = torque @ params.inertia_inv.T
    real = a + alpha_u
    dual = cross(a, t_body) + cross(omega, t_dot) + cross(alpha_u, t_body) + force / params.mass
    return DualVector(real, dual)


def rigid_derivative(
    params: RigidBodyParams,
    state: RigidBodyState,
    input: WrenchInput,
    ext: WrenchInput | None = None,
) -> RigidBodyState:
    return RigidBodyState(rigid_kinematics(state), rigid_dynamics(params, state, input, ext))


# ---------------------------------------------------------------------------
# Tracking errors
# ---------------------------------------------------------------------------

def pose_error(desired: DualQuaternion, actual: DualQuaternion) -> DualQuaternion:
    """q̂_e = q̂_d* ⊗ q̂."""
    return dq_mul(dq_conj(desired), actual)


def twist_error(state: RigidBodyState, desired_pose: DualQuaternion, desired_twist: DualVector) -> DualVector:
    """ξ̂_e = ξ̂ − Ad_{q̂_e*} ξ̂_d."""
    q_e = pose_error(desired_pose, state.pose)
    return dv_sub(state.twist, adjoint(dq_conj(q_e), desired_twist))


def pose_error_rate(q_e: DualQuaternion, twist: DualVector, desired_twist: DualVector) -> DualQuaternion:
    """d/dt q̂_e = 0.5 (q̂_e ⊗ ξ̂ − ξ̂_d ⊗ q̂_e)."""
    return dq_scale(
        dq_add(dq_mul(q_e, dv_as_dq(twist)), dq_scale(dq_mul(dv_as_dq(desired_twist), q_e), -1.0)),
        0.5,
    )


def twist_feedforward(
    q_e: DualQuaternion,
    q_e_dot: DualQuaternion,
    desired_twist: DualVector,
    desired_twist_dot: DualVector,
) -> DualVector:
    """E-term of the twist-error derivative:

    q̂_e*' ⊗ ξ̂_d ⊗ q̂_e + Ad_{q̂_e*} ξ̂_d' + q̂_e* ⊗ ξ̂_d ⊗ q̂_e'
    """
    xi_d = dv_as_dq(desired_twist)
    q_ec = dq_conj(q_e)
    t1 = dq_mul(dq_mul(dq_conj(q_e_dot), xi_d), q_e)
    t3 = dq_mul(dq_mul(q_ec, xi_d), q_e_dot)
    t2 = adjoint(q_ec, desired_twist_dot)
    s = dq_add(t1, t3)
    return DualVector(s.real[..., 1:] + t2.real, s.dual[..., 1:] + t2.dual)


# ---------------------------------------------------------------------------
# Cargo system
# ---------------------------------------------------------------------------

def gravity_body(attitude: np.ndarray, gravity: float) -> np.ndarray:
    """Gravity acceleration vector (−g e3 inertial) in body axes."""
    return quat_rotate(quat_conj(attitude), -gravity * E3)


def load_is_grounded(load_pos: np.ndarray, upward_force: float) -> bool:
    return bool(load_pos[2] <= 0.0 and upward_force <= 0.0)


def slack_derivative(
    params: CargoParams,
    state: CargoState,
    input: WrenchInput,
    gravity: float,
    ext: WrenchInput | None = None,
) -> SlackState:
    """Slack cable: UAV rigid-body model plus a load that is grounded or in free fall.

    ``input.force`` is the body-frame control force; the UAV weight is added here.
    """
    if not isinstance(state, SlackState):
        raise InvalidStateError("slack_derivative needs a slack-regime state")
    uav = state.uav
    m_v = params.uav.mass
    force = input.force + m_v * gravity_body(uav.pose.real, gravity)
    d_uav = rigid_derivative(params.uav, uav, WrenchInput(input.torque, force), ext)
    # a slack cable carries no force, so the only vertical force on the load is its weight
    if load_is_grounded(state.load_pos, -params.load_mass * gravity):
        d_pos = np.zeros(3)
        d_vel = np.zeros(3)
    else:
        d_pos = np.array(state.load_vel, dtype=float)
        d_vel = -gravity * E3
    return SlackState(d_uav, d_pos, d_vel)


def load_drift(params: CargoParams, state: TautState, gravity: float, ext_force: np.ndarray | None = None) -> DualVector:
    """Drift F̂_l of the load configuration, with F_ext = −m g e3 (+ ext).

    F̂_l = −(q̇_c·q̇_c) q_c + [(F_ext + m_v l (q̇_c·q̇_c) q_c) / m] ε

    Written for q_c pointing from the load to the UAV; the centripetal term
    then pulls the load towards the UAV.
    """
    m = params.total_mass
    qc, qc_dot = state.qc, state.qc_dot
    w2 = dot(qc_dot, qc_dot)
    f_ext = -m * gravity * E3
    if ext_force is not None:
        f_ext = f_ext + ext_force
    real = -w2 * qc
    dual = (f_ext + params.uav.mass * params.cable_length * w2 * qc) / m
    return DualVector(real, dual)


def load_input(params: CargoParams, qc: np.ndarray, thrust_inertial: np.ndarray) -> DualVector:
    """û_l = −(q_c × q_c × F_uI)/(m_v l) + ((q_c·F_uI) q_c / m) ε.

    The real part is the thrust component normal to the cable, which swings
    the UAV about the load.
    """
    real = -cross(qc, cross(qc, thrust_inertial)) / (params.uav.mass * params.cable_length)
    dual = dot(qc, thrust_inertial) * qc / params.total_mass
    return DualVector(real, dual)


def taut_derivative(
    params: CargoParams,
    state: CargoState,
    thrust_inertial: np.ndarray,
    torque_body: np.ndarray,
    ext_force: np.ndarray,
    ext_torque: np.ndarray,
    gravity: float,
) -> TautState:
    if not isinstance(state, TautState):
        raise InvalidStateError("taut_derivative needs a taut-regime state")
    drift = abs(float(norm(state.qc)) - 1.0)
    if drift > QC_DRIFT_LIMIT:
        raise ConstraintViolationError(f"|q_c| drifted by {drift:.3g}")
    u_l = load_input(params, state.qc, thrust_inertial)
    f_l = load_drift(params, state, gravity, ext_force)
    load_acc = DualVector(u_l.real + f_l.real, u_l.dual + f_l.dual)

    J = params.uav.inertia
    omega = state.uav_omega
    att_dot = 0.5 * quat_mul(state.uav_attitude, vec_quat(omega))
    omega_dot = (torque_body + ext_torque - cross(omega, J @ omega)) @ params.uav.inertia_inv.T
    return TautState(state.load_twist, load_acc, att_dot, omega_dot)


def uav_pose_from_load(params: CargoParams, state: TautState) -> tuple[np.ndarray, np.ndarray]:
    """(T_v, Ṫ_v) = (T_l + l q_c, Ṫ_l + l q̇_c)."""
    l = params.cable_length
    return state.load_pos + l * state.qc, state.load_vel + l * state.qc_dot


def cable_state_from_positions(
    params: CargoParams,
    uav_pos: np.ndarray,
    uav_vel: np.ndarray,
    load_pos: np.ndarray,
    load_vel: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Invert T_v = T_l + l q_c for (q_c, q̇_c); q̇_c is projected onto the sphere's tangent."""
    rel = uav_pos - load_pos
    qc = rel / norm(rel)
    qc_dot = (uav_vel - load_vel) / params.cable_length
    qc_dot = qc_dot - dot(qc, qc_dot) * qc
    return qc, qc_dot
