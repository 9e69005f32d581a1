"""Quaternion and dual-quaternion algebra.

Conventions
-----------
Quaternions are numpy arrays with trailing axis of length 4, scalar first:
``q = [w, x, y, z]``. 3-vectors are arrays with trailing axis of length 3 and
are embedded as vector quaternions ``[0, x, y, z]`` wherever a product needs
them. Every function broadcasts over leading axes, so a batch of poses can be
pushed through the same code as a single pose.

A pose is the unit dual quaternion ``q + 0.5 * (q ⊗ t) ε`` where ``t`` is the
translation expressed in the body frame. With that embedding

    ln(q̂) = 0.5 * (θ + t ε)

with ``θ`` the angle-axis vector of ``q``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

UNIT_TOL = 1e-6
PI_GUARD = 1e-6


class InvalidInputError(ValueError):
    """An argument violates a precondition (typically a non-unit quaternion)."""


class SingularRotationError(ValueError):
    """Rotation angle too close to pi for the logarithm to be well defined."""


class DualQuaternion(NamedTuple):
    real: np.ndarray
    dual: np.ndarray


class DualVector(NamedTuple):
    real: np.ndarray
    dual: np.ndarray


IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


# ---------------------------------------------------------------------------
# 3-vectors
# ---------------------------------------------------------------------------

def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.cross is slow for single 3-vectors; this is the same thing with broadcasting
    if a.ndim == 1 and b.ndim == 1:
        a0, a1, a2 = a.tolist()
        b0, b1, b2 = b.tolist()
        return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def norm(a: np.ndarray) -> np.ndarray:
    if a.ndim == 1:
        return np.float64(math.sqrt(a @ a))
    return np.sqrt(np.sum(a * a, axis=-1))


# ---------------------------------------------------------------------------
# Quaternions
# ---------------------------------------------------------------------------

def quat(w: float, x: float, y: float, z: float) -> np.ndarray:
    return np.array([w, x, y, z], dtype=float)


def vec_quat(v: np.ndarray) -> np.ndarray:
    """Embed a 3-vector as a vector quaternion (zero scalar part)."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def quat_vec(q: np.ndarray) -> np.ndarray:
    """Vector part of a quaternion."""
    return q[..., 1:]


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a ⊗ b."""
    if a.ndim == 1 and b.ndim == 1:
        aw, ax, ay, az = a.tolist()
        bw, bx, by, bz = b.tolist()
        return np.array(
            [
                aw * bw - ax * bx - ay * by - az * bz,
                aw * bx + ax * bw + ay * bz - az * by,
                aw * by - ax * bz + ay * bw + az * bx,
                aw * bz + ax * by - ay * bx + az * bw,
            ]
        )
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conj(q: np.ndarray) -> np.ndarray:
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_norm(q: np.ndarray) -> np.ndarray:
    return norm(q)


def quat_normalize(q: np.ndarray) -> np.ndarray:
    return q / quat_norm(q)[..., None]


def canonical(q: np.ndarray) -> np.ndarray:
    """Pick the double-cover representative with non-negative scalar part."""
    sign = np.where(q[..., 0] < 0.0, -1.0, 1.0)
    return q * sign[..., None]


def _check_unit(q: np.ndarray, what: str = "quaternion") -> None:
    err = np.abs(quat_norm(q) - 1.0)
    if np.any(err > UNIT_TOL):
        raise InvalidInputError(f"{what} is not unit (norm error {np.max(err):.3g})")


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vector part of q ⊗ v ⊗ q* for unit q."""
    _check_unit(q)
    w = q[..., 0:1]
    u = q[..., 1:]
    t = 2.0 * cross(u, v)
    return v + w * t + cross(u, t)


def quat_from_axis_angle(axis: np.ndarray, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / norm(axis)[..., None]
    half = 0.5 * np.asarray(angle, dtype=float)
    return np.concatenate([np.cos(half)[..., None], np.sin(half)[..., None] * axis], axis=-1)


def quat_exp_vec(theta: np.ndarray) -> np.ndarray:
    """Unit quaternion of the rotation with angle-axis vector ``theta``."""
    theta = np.asarray(theta, dtype=float)
    angle = norm(theta)
    half = 0.5 * angle
    # sin(x/2)/x with its series near zero
    scale = np.where(angle > 1e-8, np.sin(half) / np.where(angle > 1e-8, angle, 1.0), 0.5 - angle**2 / 48.0)
    return np.concatenate([np.cos(half)[..., None], scale[..., None] * theta], axis=-1)


def quat_angle_axis(q: np.ndarray) -> np.ndarray:
    """Angle-axis vector of a unit quaternion, angle = 2 atan2(|v|, w).

    Raises SingularRotationError when the angle is within ``PI_GUARD`` of pi,
    where the axis sign depends on the double-cover representative.
    """
    v = q[..., 1:]
    s = norm(v)
    angle = 2.0 * np.arctan2(s, q[..., 0])
    if np.any(np.abs(angle - np.pi) < PI_GUARD):
        raise SingularRotationError("rotation angle is pi; logarithm is ambiguous")
    scale = np.where(s > 1e-12, angle / np.where(s > 1e-12, s, 1.0), 2.0 / np.where(s > 1e-12, 1.0, q[..., 0]))
    return scale[..., None] * v


# ---------------------------------------------------------------------------
# Dual quaternions
# ---------------------------------------------------------------------------

DQ_IDENTITY = DualQuaternion(IDENTITY.copy(), np.zeros(4))


def dq_mul(a: DualQuaternion, b: DualQuaternion) -> DualQuaternion:
    return DualQuaternion(
        quat_mul(a.real, b.real),
        quat_mul(a.real, b.dual) + quat_mul(a.dual, b.real),
    )


def dq_conj(a: DualQuaternion) -> DualQuaternion:
    return DualQuaternion(quat_conj(a.real), quat_conj(a.dual))


def dq_add(a: DualQuaternion, b: DualQuaternion) -> DualQuaternion:
    return DualQuaternion(a.real + b.real, a.dual + b.dual)


def dq_scale(a: DualQuaternion, s: float) -> DualQuaternion:
    return DualQuaternion(s * a.real, s * a.dual)


def dq_norm_sq(a: DualQuaternion) -> DualQuaternion:
    """q̂ ⊗ q̂*; equals 1 + 0ε for unit dual quaternions."""
    return dq_mul(a, dq_conj(a))


def dq_is_unit(a: DualQuaternion, tol: float = UNIT_TOL) -> bool:
    return bool(
        np.all(np.abs(quat_norm(a.real) - 1.0) <= tol)
        and np.all(np.abs(dot(a.real, a.dual)) <= tol)
    )


def _check_dq_unit(a: DualQuaternion) -> None:
    if not dq_is_unit(a):
        raise InvalidInputError("dual quaternion is not unit")


def dq_normalize(a: DualQuaternion) -> DualQuaternion:
    """Project onto the unit dual quaternions: |real| = 1 and real·dual = 0."""
    n = quat_norm(a.real)[..., None]
    r = a.real / n
    d = a.dual / n
    d = d - dot(r, d)[..., None] * r
    return DualQuaternion(r, d)


def dq_canonical(a: DualQuaternion) -> DualQuaternion:
    sign = np.where(a.real[..., 0] < 0.0, -1.0, 1.0)[..., None]
    return DualQuaternion(a.real * sign, a.dual * sign)


def from_pose(q: np.ndarray, t_body: np.ndarray) -> DualQuaternion:
    """Unit dual quaternion of attitude ``q`` and body-frame translation ``t_body``."""
    q = np.asarray(q, dtype=float)
    return DualQuaternion(q, 0.5 * quat_mul(q, vec_quat(t_body)))


def from_position(q: np.ndarray, t_inertial: np.ndarray) -> DualQuaternion:
    """Same pose, built from the inertial-frame position."""
    q = np.asarray(q, dtype=float)
    return DualQuaternion(q, 0.5 * quat_mul(vec_quat(t_inertial), q))


def translation_body(a: DualQuaternion) -> np.ndarray:
    """Body-frame translation 2 q_r* ⊗ q_d."""
    return quat_vec(2.0 * quat_mul(quat_conj(a.real), a.dual))


def translation_inertial(a: DualQuaternion) -> np.ndarray:
    """Inertial-frame translation 2 q_d ⊗ q_r*."""
    return quat_vec(2.0 * quat_mul(a.dual, quat_conj(a.real)))


def dq_log(a: DualQuaternion) -> DualVector:
    """ln q̂ = 0.5 (θ + t ε) for a unit dual quaternion."""
    _check_dq_unit(a)
    theta = quat_angle_axis(a.real)
    return DualVector(0.5 * theta, 0.5 * translation_body(a))


# ---------------------------------------------------------------------------
# Dual vectors
# ---------------------------------------------------------------------------

def dv_zero(shape: tuple[int, ...] = ()) -> DualVector:
    return DualVector(np.zeros(shape + (3,)), np.zeros(shape + (3,)))


def dv_as_dq(v: DualVector) -> DualQuaternion:
    return DualQuaternion(vec_quat(v.real), vec_quat(v.dual))


def dq_as_dv(a: DualQuaternion) -> DualVector:
    return DualVector(quat_vec(a.real), quat_vec(a.dual))


def dv_add(a: DualVector, b: DualVector) -> DualVector:
    return DualVector(a.real + b.real, a.dual + b.dual)


def dv_sub(a: DualVector, b: DualVector) -> DualVector:
    return DualVector(a.real - b.real, a.dual - b.dual)


def dv_scale(a: DualVector, s: float) -> DualVector:
    return DualVector(s * a.real, s * a.dual)


def dv_hadamard(gain: DualVector, v: DualVector) -> DualVector:
    """Elementwise gain product: real-by-real and dual-by-dual."""
    return DualVector(gain.real * v.real, gain.dual * v.dual)


def dv_norm(v: DualVector) -> np.ndarray:
    return np.sqrt(dot(v.real, v.real) + dot(v.dual, v.dual))


def adjoint(q: DualQuaternion, r: DualVector) -> DualVector:
    """Ad_q̂ r̂ = q̂ ⊗ r̂ ⊗ q̂*."""
    _check_dq_unit(q)
    out = dq_mul(dq_mul(q, dv_as_dq(r)), dq_conj(q))
    return dq_as_dv(out)
