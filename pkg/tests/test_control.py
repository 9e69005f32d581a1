import numpy as np
import pytest
from hypothesis import given

from conftest import random_unit_quats, rotation_matrix, unit_quats, vec3
from dqcargo import default_gains
from dqcargo.control import (
    ControllerMemory,
    DegenerateCommandError,
    DualQuaternionController,
    LoadReference,
    SingularTiltError,
    SlackGains,
    TautGains,
    attitude_control,
    desired_attitude,
    desired_direction_rate,
    desired_force_inertial,
    desired_load_attitude,
    force_to_body,
    load_tracking_errors,
    slack_body_force,
    taut_control_step,
    thrust_extraction,
    tilt_quaternion,
)
from dqcargo.dqmath import IDENTITY, DualVector, InvalidInputError, from_position, quat_mul, quat_normalize, quat_rotate, vec_quat
from dqcargo.dynamics import E3, RigidBodyState, TautState, load_drift, taut_derivative, twist_of
from dqcargo.sim import rk4_step

G = 9.81
ZERO_DV = DualVector(np.zeros(3), np.zeros(3))


def taut(qc=E3, qc_dot=np.zeros(3), pos=np.zeros(3), vel=np.zeros(3), q=IDENTITY, w=np.zeros(3)):
    return TautState(DualVector(np.asarray(qc, float), np.asarray(pos, float)),
                     DualVector(np.asarray(qc_dot, float), np.asarray(vel, float)), q, np.asarray(w, float))


def still(pos=np.zeros(3)):
    return LoadReference(np.asarray(pos, float), np.zeros(3), np.zeros(3))


class TestThrustSynthesis:
    @given(unit_quats(), vec3)
    def test_force_to_body_is_inverse_rotation(self, q, f):
        assert np.allclose(rotation_matrix(q) @ force_to_body(q, f), f, atol=1e-9)

    def test_thrust_extraction(self):
        thrust, f = thrust_extraction(np.array([3.0, 4.0, 0.0]))
        assert f == pytest.approx(5.0)
        assert np.array_equal(thrust, [0.0, 0.0, 5.0])

    @given(vec3)
    def test_tilt_aligns_body_axis_with_force(self, f):
        if np.linalg.norm(f) < 1e-3 or np.allclose(f / np.linalg.norm(f), -E3, atol=1e-3):
            return
        q_t = tilt_quaternion(f, f)
        assert np.allclose(rotation_matrix(q_t) @ E3, f / np.linalg.norm(f), atol=1e-7)

    def test_tilt_identity_for_vertical_force(self):
        assert np.allclose(tilt_quaternion(2 * E3, 2 * E3), IDENTITY)

    def test_tilt_singular_cases(self):
        with pytest.raises(SingularTiltError):
            tilt_quaternion(np.zeros(3), np.zeros(3))
        with pytest.raises(SingularTiltError):
            tilt_quaternion(-E3, -E3)

    def test_desired_attitude_composes_yaw_then_tilt(self):
        yaw = np.array([np.cos(np.pi / 4), 0, 0, np.sin(np.pi / 4)])
        f = np.array([1.0, 0.0, 1.0])
        q = desired_attitude(yaw, tilt_quaternion(f, f))
        # yaw turns the tilted thrust axis from x towards y
        assert np.allclose(rotation_matrix(q) @ E3, np.array([0.0, 1.0, 1.0]) / np.sqrt(2), atol=1e-12)


class TestAttitudeControl:
    def test_zero_error_zero_rate(self, params):
        tau = attitude_control(params.uav, IDENTITY, np.zeros(3), IDENTITY, np.zeros(3), np.ones(3), np.ones(3))
        assert np.allclose(tau, 0.0)

    def test_cancels_gyroscopic_torque(self, params, rng):
        """At zero attitude error and zero rate gain only the gyroscopic term remains."""
        w = rng.normal(size=3)
        J = params.uav.inertia
        tau = attitude_control(params.uav, IDENTITY, w, IDENTITY, np.zeros(3), np.ones(3), np.zeros(3))
        assert np.allclose(tau, np.cross(w, J @ w), atol=1e-12)

    def test_small_angle_is_proportional(self, params):
        a = 1e-4
        q = np.array([np.cos(a / 2), np.sin(a / 2), 0.0, 0.0])
        kp = np.array([10.0, 10.0, 10.0])
        tau = attitude_control(params.uav, q, np.zeros(3), IDENTITY, np.zeros(3), kp, np.ones(3))
        assert np.allclose(tau, -params.uav.inertia @ (kp * np.array([a, 0, 0])), rtol=1e-6)

    def test_closed_loop_converges(self, params, rng):
        q = random_unit_quats(rng, 1)[0]
        w = rng.normal(size=3)
        J_inv = params.uav.inertia_inv
        x = np.concatenate([q, w])
        for _ in range(2000):
            tau = attitude_control(params.uav, quat_normalize(x[:4]), x[4:], IDENTITY, np.zeros(3), np.full(3, 10.0), np.full(3, 5.0))

            def f(x):
                qq, ww = x[:4], x[4:]
                return np.concatenate([0.5 * quat_mul(qq, vec_quat(ww)),
                                       J_inv @ (tau - np.cross(ww, params.uav.inertia @ ww))])

            x = rk4_step(f, x, 0.01)
        assert np.allclose(np.abs(quat_normalize(x[:4])[0]), 1.0, atol=1e-6)
        assert np.allclose(x[4:], 0.0, atol=1e-5)


class TestSlackControl:
    def test_hover_force_cancels_gravity(self, params, gains):
        pose = from_position(IDENTITY, np.array([0, 0, 0.3]))
        s = RigidBodyState(pose, ZERO_DV)
        f = slack_body_force(params.uav, s, pose, ZERO_DV, ZERO_DV, gains[0], G)
        assert np.allclose(f, params.uav.mass * G * E3)

    def test_vertical_offset_is_proportional(self, params, gains):
        target = from_position(IDENTITY, np.array([0, 0, 0.3]))
        s = RigidBodyState(from_position(IDENTITY, np.array([0, 0, 0.2])), ZERO_DV)
        f = slack_body_force(params.uav, s, target, ZERO_DV, ZERO_DV, gains[0], G)
        kpz = gains[0].kp.dual[2]
        assert np.allclose(f, params.uav.mass * (G + 0.1 * kpz) * E3)

    def test_velocity_is_damped(self, params, gains):
        pose = from_position(IDENTITY, np.zeros(3))
        s = RigidBodyState(pose, twist_of(np.zeros(3), np.zeros(3), np.array([0.2, 0.0, 0.0])))
        f = slack_body_force(params.uav, s, pose, ZERO_DV, ZERO_DV, gains[0], G)
        assert f[0] == pytest.approx(-params.uav.mass * gains[0].kv.dual[0] * 0.2)

    def test_controller_output_consistent(self, params, gains):
        ctrl = DualQuaternionController(params, *gains)
        target = from_position(IDENTITY, np.array([0.0, 0.0, 0.3]))
        s = RigidBodyState(from_position(IDENTITY, np.array([0.1, 0.0, 0.3])), ZERO_DV)
        out = ctrl.slack(s, target)
        assert out.f == pytest.approx(np.linalg.norm(out.force_inertial))
        # the desired attitude points thrust along the commanded force
        assert np.allclose(rotation_matrix(out.desired_attitude) @ E3, out.force_inertial / out.f)
        assert out.force_inertial[0] < 0

    def test_gain_validation(self):
        with pytest.raises(ValueError):
            SlackGains(DualVector(np.ones(3), np.zeros(3)), DualVector(np.ones(3), np.ones(3)))
        with pytest.raises(ValueError):
            TautGains(DualVector(np.ones(3), np.ones(3)), DualVector(np.ones(3), -np.ones(3)), np.ones(3), np.ones(3))


class TestLoadControl:
    def test_cable_direction_error_example(self):
        errs = load_tracking_errors(taut(E3), still(), np.array([1.0, 0.0, 0.0]), np.zeros(3))
        # e3 × (e3 × e1) = −e1
        assert np.allclose(errs[0].real, [-1.0, 0.0, 0.0])

    def test_errors_vanish_on_reference(self):
        errs = load_tracking_errors(taut(E3, pos=[1, 2, 3]), still([1, 2, 3]), E3, np.zeros(3))
        for dv in errs:
            assert np.allclose(dv.real, 0) and np.allclose(dv.dual, 0)

    def test_rejects_non_unit_direction(self):
        with pytest.raises(InvalidInputError):
            load_tracking_errors(taut(1.1 * E3), still(), E3, np.zeros(3))

    def test_desired_direction_examples(self, gains):
        t = gains[1]
        assert np.allclose(desired_load_attitude(np.zeros(3), np.zeros(3), np.zeros(3), t, G), E3)
        q = desired_load_attitude(np.zeros(3), np.zeros(3), np.array([G, 0, 0]), t, G)
        assert np.allclose(q, np.array([1.0, 0.0, 1.0]) / np.sqrt(2))
        # a load to the +x side of its target tilts the cable towards −x
        q = desired_load_attitude(np.array([0.5, 0, 0]), np.zeros(3), np.zeros(3), t, G)
        assert q[0] < 0 and np.isclose(np.linalg.norm(q), 1.0)

    def test_desired_direction_degenerate(self, gains):
        with pytest.raises(DegenerateCommandError):
            desired_load_attitude(np.zeros(3), np.zeros(3), -G * E3, gains[1], G)

    @given(vec3, vec3, vec3)
    def test_desired_direction_unit(self, e, edot, acc):
        try:
            q = desired_load_attitude(e, edot, acc, default_gains()[1], G)
        except DegenerateCommandError:
            return
        assert np.isclose(np.linalg.norm(q), 1.0)

    def test_direction_rate(self):
        assert np.array_equal(desired_direction_rate(E3, None, 0.01), np.zeros(3))
        prev = np.array([np.sin(-0.01), 0.0, np.cos(-0.01)])
        rate = desired_direction_rate(E3, prev, 0.01)
        assert np.allclose(rate, [1.0, 0.0, 0.0], atol=1e-4)
        assert abs(rate @ E3) < 1e-12

    def test_hover_force(self, params, gains):
        s = taut()
        errs = load_tracking_errors(s, still(), E3, np.zeros(3))
        f = desired_force_inertial(params, s, errs, load_drift(params, s, G), gains[1])
        assert np.allclose(f, params.total_mass * G * E3)

    def test_direction_error_adds_normal_force(self, params, gains):
        """With only a cable-direction error, F_uI − m g e3 is parallel to q_ce."""
        s = taut()
        qd = np.array([np.sin(0.1), 0.0, np.cos(0.1)])
        errs = load_tracking_errors(s, still(), qd, np.zeros(3))
        f = desired_force_inertial(params, s, errs, load_drift(params, s, G), gains[1])
        extra = f - params.total_mass * G * E3
        assert np.allclose(np.cross(extra, errs[0].real), 0.0, atol=1e-12)
        # and it pushes the UAV towards the desired side
        assert extra[0] > 0

    def test_hover_is_fixed_point(self, params, gains):
        s = taut()
        out, mem = taut_control_step(params, s, still(), gains[1], G)
        assert np.allclose(out.torque_body, 0, atol=1e-12)
        assert out.f == pytest.approx(params.total_mass * G)
        assert np.allclose(mem.prev_qc_des, E3)
        d = taut_derivative(params, s, quat_rotate(IDENTITY, out.thrust_body), out.torque_body,
                            np.zeros(3), np.zeros(3), G)
        assert np.allclose(d.to_array(), 0, atol=1e-12)


def settle_z_error(params, taut_gains, disturbance, seconds=15.0, dt=0.01):
    """Run the taut loop under a constant vertical disturbance on the load."""
    s = taut()
    mem = ControllerMemory()
    ext = np.array([0.0, 0.0, disturbance])
    for _ in range(int(seconds / dt)):
        out, mem = taut_control_step(params, s, still(), taut_gains, G, mem, dt)

        def f(x, out=out):
            st = TautState.from_array(x)
            return taut_derivative(params, st, quat_rotate(st.uav_attitude, out.thrust_body), out.torque_body,
                                   ext, np.zeros(3), G).to_array()

        s = TautState.from_array(rk4_step(f, s.to_array(), dt))
    return s.load_pos[2]


def test_stronger_position_gain_reduces_offset(params, gains):
    t = gains[1]
    stiff = TautGains(DualVector(t.kp_load.real, 2 * t.kp_load.dual), t.kv_load, t.kp_att, t.kv_att)
    e1 = abs(settle_z_error(params, t, -0.2))
    e2 = abs(settle_z_error(params, stiff, -0.2))
    assert e1 > 0.01
    # static offset F / (m k_p): doubling k_p halves it
    assert e2 == pytest.approx(e1 / 2, rel=0.05)
    assert e1 == pytest.approx(0.2 / (params.total_mass * t.kp_load.dual[2]), rel=0.05)
