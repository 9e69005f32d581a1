"""Lifting automaton (Setup → Pull → Raise → Track), guards and references."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from .dqmath import IDENTITY, DualQuaternion, dq_log, dv_norm, dv_zero, from_position, norm
from .dynamics import CargoParams, SlackState, TautState, pose_error, twist_error
from .control import LoadReference

RAISE_PROFILES = ("sinusoid", "constant")
TRACK_SHAPES = ("sin", "sin2")


class ModeTag(IntEnum):
    SETUP = 0
    PULL = 1
    RAISE = 2
    TRACK = 3


@dataclass(frozen=True)
class Mode:
    tag: ModeTag
    entered_at: float

    def next(self, t: float) -> "Mode":
        if self.tag is ModeTag.TRACK:
            raise ValueError("Track is the final mode")
        return Mode(ModeTag(self.tag + 1), t)


@dataclass(frozen=True)
class GuardConfig:
    cable_tol: float = 1e-3
    stability_tol_logq: float = 5e-2
    stability_tol_twist: float = 5e-2
    height_tol: float = 2e-2

    def __post_init__(self):
        for name in ("cable_tol", "stability_tol_logq", "stability_tol_twist", "height_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"guards.{name} must be positive")


@dataclass(frozen=True)
class MissionConfig:
    """Lifting mission. Positions are inertial, metres; times in seconds.

    ``setup_position`` left as None means "straight above ``load_start`` at
    cable length"; ``resolved`` fills it in for a given cable.

    The raise reference climbs from ``load_start`` to ``raise_height`` with
    vertical speed ``raise_speed * sin(pi * tau / raise_period)`` ("sinusoid")
    or the constant ``raise_speed * sin(pi / raise_period)`` ("constant").

    The track reference adds ``track_amplitude[i] * s(track_omega[i] * tau)``
    to the raised position for ``tau`` in ``[0, track_duration]``, with
    ``s = sin`` or ``sin**2``; the z term is clipped at zero.
    """

    setup_attitude: np.ndarray = field(default_factory=lambda: IDENTITY.copy())
    setup_position: np.ndarray | None = None
    load_start: np.ndarray = field(default_factory=lambda: np.zeros(3))
    uav_start_offset: np.ndarray = field(default_factory=lambda: np.array([0.15, 0.0, 0.0]))
    raise_height: float = 0.9
    raise_speed: float = 0.5
    raise_period: float = 3.0
    raise_profile: str = "sinusoid"
    track_amplitude: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.5, 0.5]))
    track_omega: np.ndarray = field(default_factory=lambda: np.array([np.pi / 6, np.pi / 6, np.pi / 3]))
    track_duration: float = 6.0
    track_shape: str = "sin"
    horizon: float = 15.0

    def __post_init__(self):
        if not self.raise_height > 0:
            raise ValueError("mission.raise_height must be positive")
        if self.raise_profile not in RAISE_PROFILES:
            raise ValueError(f"mission.raise_profile must be one of {RAISE_PROFILES}")
        if self.track_shape not in TRACK_SHAPES:
            raise ValueError(f"mission.track_shape must be one of {TRACK_SHAPES}")
        if not self.raise_speed > 0 or not self.raise_period > 0:
            raise ValueError("mission.raise_speed and raise_period must be positive")
        if self.raise_profile == "sinusoid" and self.raise_height > 2 * self.raise_speed * self.raise_period / np.pi:
            raise ValueError("mission.raise_height unreachable by the sinusoidal raise profile")
        if not self.horizon > 0 or not self.track_duration > 0:
            raise ValueError("mission.horizon and track_duration must be positive")

    @classmethod
    def for_cable(cls, cable_length: float = 0.3, **overrides) -> "MissionConfig":
        base = dict(
            uav_start_offset=np.array([cable_length / 2, 0.0, 0.0]),
            raise_height=3 * cable_length,
        )
        base.update(overrides)
        return cls(**base)

    def resolved(self, cable_length: float) -> "MissionConfig":
        """Copy with the setup position pinned (no-op if already explicit)."""
        if self.setup_position is not None:
            return self
        pos = np.asarray(self.load_start, dtype=float) + np.array([0.0, 0.0, cable_length])
        return replace(self, setup_position=pos)

    @property
    def setup_pose(self) -> DualQuaternion:
        if self.setup_position is None:
            raise ValueError("setup_position unresolved; call MissionConfig.resolved(cable_length)")
        return from_position(self.setup_attitude, self.setup_position)

    def raise_duration(self) -> float:
        h = self.raise_height
        if self.raise_profile == "constant":
            return h / (self.raise_speed * np.sin(np.pi / self.raise_period))
        c = self.raise_speed * self.raise_period / np.pi
        return self.raise_period / np.pi * np.arccos(1.0 - h / c)


@dataclass(frozen=True)
class Reference:
    """Reference for one instant: UAV pose (Setup/Pull) and load trajectory."""

    uav_pose: DualQuaternion
    load: LoadReference


# ---------------------------------------------------------------------------
# References
# ---------------------------------------------------------------------------

def _raise_offset(config: MissionConfig, tau: float) -> tuple[float, float, float]:
    tau_end = config.raise_duration()
    if tau >= tau_end:
        return config.raise_height, 0.0, 0.0
    a, p = config.raise_speed, config.raise_period
    if config.raise_profile == "constant":
        v = a * np.sin(np.pi / p)
        return v * tau, v, 0.0
    w = np.pi / p
    return a / w * (1.0 - np.cos(w * tau)), a * np.sin(w * tau), a * w * np.cos(w * tau)


def _track_offset(config: MissionConfig, tau: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    tau = min(tau, config.track_duration)
    amp, w = config.track_amplitude, config.track_omega
    s, c = np.sin(w * tau), np.cos(w * tau)
    if config.track_shape == "sin":
        pos, vel, acc = amp * s, amp * w * c, -amp * w * w * s
    else:
        pos, vel, acc = amp * s * s, amp * w * 2 * s * c, amp * w * w * 2 * (c * c - s * s)
    if tau >= config.track_duration:
        # the reference holds still after the track ends
        vel, acc = np.zeros(3), np.zeros(3)
    if s[2] < 0:
        pos[2] = vel[2] = acc[2] = 0.0
    return pos, vel, acc


def reference_at(config: MissionConfig, mode: Mode, t: float) -> Reference:
    if not 0.0 <= t <= config.horizon + 1e-9:
        raise ValueError(f"t={t} outside [0, {config.horizon}]")
    tau = max(t - mode.entered_at, 0.0)
    zero = np.zeros(3)
    start = config.load_start
    if mode.tag in (ModeTag.SETUP, ModeTag.PULL):
        load = LoadReference(start.copy(), zero, zero)
    elif mode.tag is ModeTag.RAISE:
        z, vz, az = _raise_offset(config, tau)
        e3 = np.array([0.0, 0.0, 1.0])
        load = LoadReference(start + z * e3, vz * e3, az * e3)
    else:
        pos, vel, acc = _track_offset(config, tau)
        load = LoadReference(start + np.array([0.0, 0.0, config.raise_height]) + pos, vel, acc)
    return Reference(config.setup_pose, load)


# ---------------------------------------------------------------------------
# Guards
# ---------------------------------------------------------------------------

def cable_gap(params: CargoParams, uav_pos: np.ndarray, load_pos: np.ndarray) -> float:
    """Distance between UAV and load minus the cable length (negative: slack)."""
    return float(norm(uav_pos - load_pos)) - params.cable_length


def guard_setup_to_pull(params: CargoParams, state: SlackState, guards: GuardConfig, mission: MissionConfig) -> bool:
    gap = cable_gap(params, state.uav.position(), state.load_pos)
    if abs(gap) >= guards.cable_tol:
        return False
    desired = mission.setup_pose
    q_e = pose_error(desired, state.uav.pose)
    log_err = float(dv_norm(dq_log(q_e)))
    xi_e = twist_error(state.uav, desired, dv_zero())
    return log_err < guards.stability_tol_logq and float(dv_norm(xi_e)) < guards.stability_tol_twist


def guard_pull_to_raise(
    params: CargoParams,
    state: SlackState,
    thrust_inertial: np.ndarray,
    guards: GuardConfig,
    gravity: float = 9.81,
) -> bool:
    gap = cable_gap(params, state.uav.position(), state.load_pos)
    return abs(gap) < guards.cable_tol and params.uav.mass * gravity <= float(norm(thrust_inertial))


def guard_raise_to_track(
    state: TautState,
    config: MissionConfig,
    guards: GuardConfig,
    ref_vel: np.ndarray | None = None,
) -> bool:
    target = config.load_start[2] + config.raise_height
    vel_err = state.load_vel if ref_vel is None else state.load_vel - ref_vel
    return abs(float(state.load_pos[2]) - target) < guards.height_tol and float(norm(vel_err)) < guards.stability_tol_twist
