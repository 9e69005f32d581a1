"""Closed-loop hybrid simulation, noise injection and Monte-Carlo batches."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .control import Controller, ControllerMemory, ControlOutput, DualQuaternionController, SlackGains, TautGains
from .dqmath import (
    IDENTITY,
    DualVector,
    dot,
    dq_normalize,
    from_position,
    norm,
    quat_normalize,
    quat_rotate,
    translation_inertial,
)
from .dynamics import (
    CargoParams,
    CargoState,
    RigidBodyParams,
    RigidBodyState,
    SlackState,
    TautState,
    WrenchInput,
    cable_state_from_positions,
    slack_derivative,
    taut_derivative,
    uav_pose_from_load,
)
from .mission import (
    GuardConfig,
    MissionConfig,
    Mode,
    ModeTag,
    guard_pull_to_raise,
    guard_raise_to_track,
    guard_setup_to_pull,
    reference_at,
)

INTEGRATORS = ("rk4", "euler")
NOISE_TARGETS = frozenset({"m_v", "m_l", "l", "J_v", "force_input", "torque_input"})

TRAJECTORY_COLUMNS = (
    "t", "mode",
    "uav_x", "uav_y", "uav_z",
    "uav_vx", "uav_vy", "uav_vz",
    "q_w", "q_x", "q_y", "q_z",
    "omega_x", "omega_y", "omega_z",
    "load_x", "load_y", "load_z",
    "load_vx", "load_vy", "load_vz",
    "qc_x", "qc_y", "qc_z",
    "qcdot_x", "qcdot_y", "qcdot_z",
    "ref_uav_x", "ref_uav_y", "ref_uav_z",
    "ref_load_x", "ref_load_y", "ref_load_z",
    "ref_load_vx", "ref_load_vy", "ref_load_vz",
    "qd_w", "qd_x", "qd_y", "qd_z",
    "thrust", "tau_x", "tau_y", "tau_z",
    "force_x", "force_y", "force_z",
)
ERROR_COLUMNS = (
    "t",
    "Tle_x", "Tle_y", "Tle_z",
    "Tdotle_x", "Tdotle_y", "Tdotle_z",
    "qce_x", "qce_y", "qce_z",
    "qcedot_x", "qcedot_y", "qcedot_z",
)


class SimulationError(RuntimeError):
    def __init__(self, t: float, cause: Exception):
        super().__init__(f"simulation failed at t={t:.4f}s: {type(cause).__name__}: {cause}")
        self.t = t
        self.cause = cause


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    horizon: float = 15.0
    integrator: str = "rk4"
    renormalize: bool = True
    seed: int = 0
    gravity: float = 9.81

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("sim.dt must be positive")
        if not self.horizon >= self.dt:
            raise ValueError("sim.horizon must be at least one step")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"sim.integrator must be one of {INTEGRATORS}")
        if self.seed < 0:
            raise ValueError("sim.seed must be non-negative")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class NoiseConfig:
    """White Gaussian noise at a given SNR.

    Parameters in ``targets`` are perturbed once per run; ``force_input`` and
    ``torque_input`` add a fresh disturbance to the commanded thrust/torque
    every step. With ``perturb_controller`` the controller is given the
    perturbed parameters too; otherwise it keeps the nominal ones.
    """

    snr_db: float = 35.0
    targets: frozenset[str] = NOISE_TARGETS
    per_run_reseed: bool = True
    linear_ratio: bool = False
    perturb_controller: bool = True

    def __post_init__(self):
        if not self.snr_db > 0:
            raise ValueError("noise.snr_db must be positive")
        unknown = set(self.targets) - NOISE_TARGETS
        if unknown:
            raise ValueError(f"noise.targets has unknown entries {sorted(unknown)}")
        object.__setattr__(self, "targets", frozenset(self.targets))


# ---------------------------------------------------------------------------
# Integrators
# ---------------------------------------------------------------------------

def rk4_step(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    return x + dt * f(x)


STEPPERS = {"rk4": rk4_step, "euler": euler_step}


def renormalize(state: CargoState) -> CargoState:
    """Project unit quantities back onto their manifolds (no double-cover flip)."""
    if isinstance(state, SlackState):
        uav = RigidBodyState(dq_normalize(state.uav.pose), state.uav.twist)
        return replace(state, uav=uav)
    qc = state.qc / norm(state.qc)
    qc_dot = state.qc_dot - dot(qc, state.qc_dot) * qc
    return TautState(
        DualVector(qc, state.load_pos),
        DualVector(qc_dot, state.load_vel),
        quat_normalize(state.uav_attitude),
        state.uav_omega,
    )


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

def noise_ratio(snr: float, linear: bool = False) -> float:
    """Noise standard deviation per unit of signal norm."""
    if math.isinf(snr):
        return 0.0
    return 1.0 / snr if linear else 10.0 ** (-snr / 20.0)


def inject_noise(value, snr_db: float, rng: np.random.Generator, linear: bool = False):
    """value + n with n ~ N(0, (|value| · 10^(−snr/20))²) per component.

    |value| is the Euclidean norm for vectors and the Frobenius norm for matrices.
    """
    arr = np.asarray(value, dtype=float)
    sigma = float(np.linalg.norm(arr)) * noise_ratio(snr_db, linear)
    out = arr + rng.normal(0.0, sigma, size=arr.shape)
    return float(out) if np.ndim(value) == 0 else out


def perturb_params(params: CargoParams, noise: NoiseConfig, rng: np.random.Generator) -> CargoParams:
    snr, lin, tg = noise.snr_db, noise.linear_ratio, noise.targets
    m_v = inject_noise(params.uav.mass, snr, rng, lin) if "m_v" in tg else params.uav.mass
    m_l = inject_noise(params.load_mass, snr, rng, lin) if "m_l" in tg else params.load_mass
    l = inject_noise(params.cable_length, snr, rng, lin) if "l" in tg else params.cable_length
    J = params.uav.inertia
    if "J_v" in tg:
        J = inject_noise(J, snr, rng, lin)
        J = 0.5 * (J + J.T)
    return CargoParams(RigidBodyParams(m_v, J), m_l, l)


def make_disturbance(noise: NoiseConfig | None, rng: np.random.Generator):
    if noise is None or not ({"force_input", "torque_input"} & noise.targets):
        return None

    def disturb(torque: np.ndarray, thrust: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if "torque_input" in noise.targets:
            torque = inject_noise(torque, noise.snr_db, rng, noise.linear_ratio)
        if "force_input" in noise.targets:
            thrust = inject_noise(thrust, noise.snr_db, rng, noise.linear_ratio)
        return torque, thrust

    return disturb


# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryLog:
    dt: float
    rows: list[np.ndarray] = field(default_factory=list)
    error_rows: list[np.ndarray] = field(default_factory=list)
    switches: list[tuple[ModeTag, float]] = field(default_factory=list)
    aborted: SimulationError | None = None

    columns = TRAJECTORY_COLUMNS
    error_columns = ERROR_COLUMNS

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def data(self) -> np.ndarray:
        return np.array(self.rows).reshape(-1, len(TRAJECTORY_COLUMNS))

    @property
    def errors(self) -> np.ndarray:
        return np.array(self.error_rows).reshape(-1, len(ERROR_COLUMNS))

    def column(self, name: str) -> np.ndarray:
        if name in TRAJECTORY_COLUMNS:
            return self.data[:, TRAJECTORY_COLUMNS.index(name)]
        return self.errors[:, ERROR_COLUMNS.index(name)]

    def columns_block(self, *names: str) -> np.ndarray:
        return np.stack([self.column(n) for n in names], axis=-1)

    @property
    def time(self) -> np.ndarray:
        return self.column("t")

    @property
    def modes(self) -> np.ndarray:
        return self.column("mode").astype(int)

    def switch_time(self, tag: ModeTag) -> float | None:
        for t_tag, t in self.switches:
            if t_tag == tag:
                return t
        return None

    def raise_if_aborted(self) -> None:
        if self.aborted is not None:
            raise self.aborted


def _slack_cable(state: SlackState) -> tuple[np.ndarray, np.ndarray]:
    rel = state.uav.position() - state.load_pos
    dist = norm(rel)
    qc = rel / dist
    vrel = state.uav.velocity() - state.load_vel
    return qc, (vrel - dot(qc, vrel) * qc) / dist


def _record(
    t: float,
    mode: Mode,
    plant: CargoParams,
    state: CargoState,
    ref,
    out: ControlOutput,
) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(state, SlackState):
        uav_pos, uav_vel = state.uav.position(), state.uav.velocity()
        q_v, omega = state.uav.pose.real, state.uav.twist.real
        qc, qc_dot = _slack_cable(state)
        load_pos, load_vel = state.load_pos, state.load_vel
    else:
        uav_pos, uav_vel = uav_pose_from_load(plant, state)
        q_v, omega = state.uav_attitude, state.uav_omega
        qc, qc_dot = state.qc, state.qc_dot
        load_pos, load_vel = state.load_pos, state.load_vel
    if out.load_errors is not None:
        q_le, xi_le = out.load_errors
        q_ce, q_ce_dot = q_le.real, xi_le.real
    else:
        q_ce = q_ce_dot = np.zeros(3)
    row = np.concatenate(
        [
            [t, float(mode.tag)],
            uav_pos, uav_vel, q_v, omega,
            load_pos, load_vel, qc, qc_dot,
            translation_inertial(ref.uav_pose), ref.load.pos, ref.load.vel,
            out.desired_attitude, [out.f], out.torque_body, out.force_inertial,
        ]
    )
    err = np.concatenate([[t], load_pos - ref.load.pos, load_vel - ref.load.vel, q_ce, q_ce_dot])
    return row, err


# ---------------------------------------------------------------------------
# Closed loop
# ---------------------------------------------------------------------------

def initial_state(mission: MissionConfig) -> SlackState:
    uav_pos = mission.load_start + mission.uav_start_offset
    pose = from_position(IDENTITY.copy(), uav_pos)
    twist = DualVector(np.zeros(3), np.zeros(3))
    return SlackState(RigidBodyState(pose, twist), mission.load_start.copy(), np.zeros(3))


def slack_to_taut(plant: CargoParams, state: SlackState) -> TautState:
    """Jump map at Pull → Raise: positions/velocities carried over, cable snapped to length l."""
    qc, qc_dot = cable_state_from_positions(
        plant, state.uav.position(), state.uav.velocity(), state.load_pos, state.load_vel
    )
    return TautState(
        DualVector(qc, state.load_pos.copy()),
        DualVector(qc_dot, state.load_vel.copy()),
        state.uav.pose.real.copy(),
        state.uav.twist.real.copy(),
    )


@dataclass(frozen=True)
class StepResult:
    state: CargoState
    mode: Mode
    row: np.ndarray
    error_row: np.ndarray
    memory: ControllerMemory
    output: ControlOutput


def step(
    config: SimConfig,
    plant: CargoParams,
    mission: MissionConfig,
    controller: Controller,
    memory: ControllerMemory,
    state: CargoState,
    mode: Mode,
    t: float,
    guards: GuardConfig = GuardConfig(),
    guard_params: CargoParams | None = None,
    disturbance=None,
) -> StepResult:
    """Advance the closed loop by one step of ``config.dt``.

    Control is computed at ``t`` and held over the step; guards are checked on
    the integrated state and at most one mode transition happens per step.
    """
    g = config.gravity
    dt = config.dt
    guard_params = plant if guard_params is None else guard_params
    stepper = STEPPERS[config.integrator]
    try:
        ref = reference_at(mission, mode, t)
        if mode.tag is ModeTag.SETUP:
            out = controller.slack(state.uav, ref.uav_pose)
        elif mode.tag is ModeTag.PULL:
            # cable already at length: the UAV starts carrying the (still grounded) load
            out, memory = controller.taut(slack_to_taut(guard_params, state), ref.load, memory, dt)
        else:
            out, memory = controller.taut(state, ref.load, memory, dt)
        torque, thrust = out.torque_body, out.thrust_body
        if disturbance is not None:
            torque, thrust = disturbance(torque, thrust)
        row, err = _record(t, mode, plant, state, ref, out)

        if isinstance(state, SlackState):
            wrench = WrenchInput(torque, thrust)

            def f(x):
                return slack_derivative(plant, SlackState.from_array(x), wrench, g).to_array()

            new_state = SlackState.from_array(stepper(f, state.to_array(), dt))
        else:
            zero = np.zeros(3)

            def f(x):
                s = TautState.from_array(x)
                thrust_inertial = quat_rotate(quat_normalize(s.uav_attitude), thrust)
                return taut_derivative(plant, s, thrust_inertial, torque, zero, zero, g).to_array()

            new_state = TautState.from_array(stepper(f, state.to_array(), dt))
        if config.renormalize:
            new_state = renormalize(new_state)

        t_new = t + dt
        new_mode = mode
        if mode.tag is ModeTag.SETUP:
            if guard_setup_to_pull(guard_params, new_state, guards, mission):
                new_mode = mode.next(t_new)
        elif mode.tag is ModeTag.PULL:
            thrust_inertial = quat_rotate(quat_normalize(new_state.uav.pose.real), thrust)
            if guard_pull_to_raise(guard_params, new_state, thrust_inertial, guards, g):
                new_mode = mode.next(t_new)
                new_state = slack_to_taut(plant, new_state)
        elif mode.tag is ModeTag.RAISE:
            ref_new = reference_at(mission, mode, min(t_new, mission.horizon))
            if guard_raise_to_track(new_state, mission, guards, ref_new.load.vel):
                new_mode = mode.next(t_new)
    except SimulationError:
        raise
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        raise SimulationError(t, exc) from exc
    if not np.all(np.isfinite(new_state.to_array())):
        raise SimulationError(t, FloatingPointError("non-finite state"))
    return StepResult(new_state, new_mode, row, err, memory, out)


def run(
    config: SimConfig,
    params: CargoParams,
    gains: tuple[SlackGains, TautGains],
    mission: MissionConfig,
    noise: NoiseConfig | None = None,
    guards: GuardConfig = GuardConfig(),
    controller: Controller | None = None,
    rng: np.random.Generator | None = None,
) -> TrajectoryLog:
    """Simulate one full mission. Step failures end the run; the partial log is kept."""
    if config.horizon > mission.horizon + 1e-9:
        mission = replace(mission, horizon=config.horizon)
    rng = np.random.default_rng(config.seed) if rng is None else rng
    plant = params
    if noise is not None:
        plant = perturb_params(params, noise, rng)
    ctrl_params = plant if (noise is not None and noise.perturb_controller) else params
    if controller is None:
        controller = DualQuaternionController(ctrl_params, gains[0], gains[1], config.gravity)
    disturbance = make_disturbance(noise, rng)
    mission = mission.resolved(ctrl_params.cable_length)

    log = TrajectoryLog(config.dt)
    state: CargoState = initial_state(mission)
    mode = Mode(ModeTag.SETUP, 0.0)
    memory = ControllerMemory()
    for k in range(config.n_steps):
        t = k * config.dt
        try:
            res = step(config, plant, mission, controller, memory, state, mode, t, guards, ctrl_params, disturbance)
        except SimulationError as exc:
            log.aborted = exc
            break
        log.rows.append(res.row)
        log.error_rows.append(res.error_row)
        if res.mode.tag != mode.tag:
            log.switches.append((res.mode.tag, res.mode.entered_at))
        state, mode, memory = res.state, res.mode, res.memory
    return log


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def cumulative_l2(errors: np.ndarray, dt: float) -> np.ndarray:
    """Running L2 norm sqrt(∫ |e|² dt) of an error series (rows = time)."""
    return np.sqrt(np.cumsum(np.sum(errors**2, axis=-1)) * dt)


@dataclass
class BatchResult:
    time: np.ndarray
    l2_norms: np.ndarray
    mean_errors: np.ndarray
    n_runs: int
    seeds: list[int]
    failures: list[tuple[int, str]]
    switch_times: np.ndarray

    @property
    def completed(self) -> int:
        return self.n_runs - len(self.failures)

    @property
    def mean_error(self) -> np.ndarray:
        """Mean load position error, shape (n_t, 3)."""
        return self.mean_errors[:, 1:4]

    @property
    def mean_l2(self) -> np.ndarray:
        return self.l2_norms.mean(axis=0)


def _run_one(args) -> tuple[int, TrajectoryLog]:
    idx, seed, config, params, gains, mission, noise, guards = args
    log = run(replace(config, seed=seed), params, gains, mission, noise, guards)
    return idx, log


def run_seeds(config: SimConfig, noise: NoiseConfig | None, n_runs: int) -> list[int]:
    if noise is not None and not noise.per_run_reseed:
        return [config.seed] * n_runs
    children = np.random.SeedSequence(config.seed).spawn(n_runs)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def monte_carlo(
    config: SimConfig,
    params: CargoParams,
    gains: tuple[SlackGains, TautGains],
    mission: MissionConfig,
    noise: NoiseConfig | None,
    n_runs: int,
    guards: GuardConfig = GuardConfig(),
    workers: int = 1,
) -> BatchResult:
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    seeds = run_seeds(config, noise, n_runs)
    jobs = [(i, s, config, params, gains, mission, noise, guards) for i, s in enumerate(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    n_t = config.n_steps
    good, failures, switches = [], [], []
    for idx, log in sorted(results, key=lambda r: r[0]):
        if log.aborted is not None or len(log) != n_t:
            failures.append((idx, str(log.aborted)))
            continue
        good.append(log.errors)
        switches.append([log.switch_time(tag) or np.nan for tag in (ModeTag.PULL, ModeTag.RAISE, ModeTag.TRACK)])
    if not good:
        raise RuntimeError("every Monte-Carlo run failed")
    stack = np.stack(good)
    time = stack[0, :, 0]
    l2 = np.stack([cumulative_l2(e[:, 1:4], config.dt) for e in stack])
    return BatchResult(time, l2, stack.mean(axis=0), n_runs, seeds, failures, np.array(switches))
