import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dqcargo.dqmath import IDENTITY, DualVector, from_position, translation_inertial
from dqcargo.dynamics import E3, RigidBodyState, SlackState, TautState
from dqcargo.mission import (
    GuardConfig,
    MissionConfig,
    Mode,
    ModeTag,
    cable_gap,
    guard_pull_to_raise,
    guard_raise_to_track,
    guard_setup_to_pull,
    reference_at,
)

G = 9.81
ZERO_DV = DualVector(np.zeros(3), np.zeros(3))


@pytest.fixture
def mission():
    return MissionConfig.for_cable().resolved(0.3)


def slack(uav_pos, load_pos=np.zeros(3), twist=ZERO_DV):
    return SlackState(RigidBodyState(from_position(IDENTITY, np.asarray(uav_pos, float)), twist),
                      np.asarray(load_pos, float), np.zeros(3))


def taut_at(z, vz=0.0):
    return TautState(DualVector(E3, np.array([0.0, 0.0, z])), DualVector(np.zeros(3), np.array([0.0, 0.0, vz])),
                     IDENTITY, np.zeros(3))


class TestModes:
    def test_order(self):
        m = Mode(ModeTag.SETUP, 0.0)
        tags = []
        for t in (1.0, 2.0, 3.0):
            m = m.next(t)
            tags.append((m.tag, m.entered_at))
        assert tags == [(ModeTag.PULL, 1.0), (ModeTag.RAISE, 2.0), (ModeTag.TRACK, 3.0)]
        with pytest.raises(ValueError):
            m.next(4.0)


class TestConfig:
    def test_setup_position_defaults_above_load(self):
        m = MissionConfig(load_start=np.array([1.0, 2.0, 0.0]))
        assert m.setup_position is None
        with pytest.raises(ValueError):
            _ = m.setup_pose
        r = m.resolved(0.4)
        assert np.allclose(r.setup_position, [1.0, 2.0, 0.4])
        assert r.resolved(1.0) is r

    def test_default_values(self):
        m = MissionConfig.for_cable()
        assert m.raise_height == pytest.approx(0.9)
        assert np.allclose(m.uav_start_offset, [0.15, 0, 0])

    @pytest.mark.parametrize(
        "kw",
        [
            dict(raise_height=0.0),
            dict(raise_profile="linear"),
            dict(track_shape="cos"),
            dict(raise_speed=-1.0),
            dict(horizon=0.0),
            dict(raise_height=5.0),
        ],
    )
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            MissionConfig(**kw)

    def test_raise_duration(self):
        m = MissionConfig(raise_height=0.9, raise_speed=0.5, raise_period=3.0)
        c = 0.5 * 3.0 / np.pi
        assert m.raise_duration() == pytest.approx(3.0 / np.pi * np.arccos(1 - 0.9 / c))
        mc = MissionConfig(raise_profile="constant", raise_height=0.9, raise_speed=0.5, raise_period=3.0)
        assert mc.raise_duration() == pytest.approx(0.9 / (0.5 * np.sin(np.pi / 3)))


class TestReferences:
    def test_setup_reference(self, mission):
        ref = reference_at(mission, Mode(ModeTag.SETUP, 0.0), 0.5)
        assert np.allclose(translation_inertial(ref.uav_pose), [0, 0, 0.3])
        assert np.allclose(ref.load.pos, 0) and np.allclose(ref.load.vel, 0)

    def test_raise_starts_at_rest_and_reaches_height(self, mission):
        mode = Mode(ModeTag.RAISE, 4.0)
        r0 = reference_at(mission, mode, 4.0)
        assert np.allclose(r0.load.pos, 0) and np.allclose(r0.load.vel, 0)
        r1 = reference_at(mission, mode, 4.0 + mission.raise_duration() + 0.1)
        assert r1.load.pos[2] == pytest.approx(0.9)
        assert np.allclose(r1.load.vel, 0)

    def test_raise_profile_is_consistent(self, mission):
        """Velocity and acceleration are the time derivatives of the position."""
        mode = Mode(ModeTag.RAISE, 0.0)
        h = 1e-5
        for t in (0.3, 1.0, 1.7):
            p = [reference_at(mission, mode, t + d).load for d in (-h, 0.0, h)]
            assert (p[2].pos[2] - p[0].pos[2]) / (2 * h) == pytest.approx(p[1].vel[2], rel=1e-6)
            assert (p[2].vel[2] - p[0].vel[2]) / (2 * h) == pytest.approx(p[1].acc[2], rel=1e-5)

    @pytest.mark.parametrize("shape", ["sin", "sin2"])
    def test_track_is_continuous_with_raise(self, shape):
        m = MissionConfig.for_cable(track_shape=shape).resolved(0.3)
        r = reference_at(m, Mode(ModeTag.TRACK, 7.0), 7.0)
        assert np.allclose(r.load.pos, [0.0, 0.0, 0.9])

    def test_track_sin_example(self, mission):
        r = reference_at(mission, Mode(ModeTag.TRACK, 7.0), 10.0)
        # sin(π/6 · 3) = 1 and sin(π/3 · 3) = 0
        assert np.allclose(r.load.pos, [1.0, 0.5, 0.9], atol=1e-12)
        assert np.allclose(r.load.vel, [0.0, 0.0, -0.5 * np.pi / 3], atol=1e-12)
        # half a period later the clipped z term is flat
        r = reference_at(mission, Mode(ModeTag.TRACK, 7.0), 11.5)
        assert r.load.pos[2] == pytest.approx(0.9) and r.load.vel[2] == 0.0 and r.load.acc[2] == 0.0

    def test_track_sin2_derivatives(self):
        m = MissionConfig.for_cable(track_shape="sin2").resolved(0.3)
        mode = Mode(ModeTag.TRACK, 0.0)
        h = 1e-5
        for t in (0.4, 1.3, 2.2):
            p = [reference_at(m, mode, t + d).load for d in (-h, 0.0, h)]
            assert np.allclose((p[2].pos - p[0].pos) / (2 * h), p[1].vel, atol=1e-6)
            assert np.allclose((p[2].vel - p[0].vel) / (2 * h), p[1].acc, atol=1e-5)

    def test_track_holds_after_duration(self, mission):
        mode = Mode(ModeTag.TRACK, 0.0)
        a = reference_at(mission, mode, mission.track_duration)
        b = reference_at(mission, mode, mission.track_duration + 2.0)
        assert np.allclose(a.load.pos, b.load.pos)
        assert np.allclose(b.load.vel, 0)

    def test_z_never_below_raised_height(self, mission):
        mode = Mode(ModeTag.TRACK, 0.0)
        zs = [reference_at(mission, mode, t).load.pos[2] for t in np.linspace(0, 6, 121)]
        assert min(zs) >= 0.9 - 1e-12

    def test_time_outside_horizon(self, mission):
        with pytest.raises(ValueError):
            reference_at(mission, Mode(ModeTag.SETUP, 0.0), mission.horizon + 1.0)
        with pytest.raises(ValueError):
            reference_at(mission, Mode(ModeTag.SETUP, 0.0), -0.1)


class TestGuards:
    def test_cable_gap(self, params):
        assert cable_gap(params, np.array([0, 0, 0.5]), np.zeros(3)) == pytest.approx(0.2)

    def test_setup_to_pull_at_target(self, params, mission):
        assert guard_setup_to_pull(params, slack([0, 0, 0.3]), GuardConfig(), mission)

    def test_setup_to_pull_requires_taut_cable(self, params, mission):
        assert not guard_setup_to_pull(params, slack([0, 0, 0.29]), GuardConfig(), mission)
        assert not guard_setup_to_pull(params, slack([0, 0, 0.15]), GuardConfig(), mission)

    def test_guards_are_pure(self, params, mission):
        """Re-evaluating a guard at the state where it fired gives the same answer."""
        s = slack([0, 0, 0.3005])
        g = GuardConfig()
        first = guard_setup_to_pull(params, s, g, mission)
        assert first and guard_setup_to_pull(params, s, g, mission) == first

    def test_setup_to_pull_requires_rest(self, params, mission):
        moving = DualVector(np.zeros(3), np.array([0.1, 0.0, 0.0]))
        assert not guard_setup_to_pull(params, slack([0, 0, 0.3], twist=moving), GuardConfig(), mission)

    def test_pull_to_raise_boundary_inclusive(self, params):
        s = slack([0, 0, 0.3])
        w = params.uav.mass * G
        assert guard_pull_to_raise(params, s, w * E3, GuardConfig(), G)
        assert not guard_pull_to_raise(params, s, 0.5 * w * E3, GuardConfig(), G)
        assert not guard_pull_to_raise(params, slack([0, 0, 0.25]), 2 * w * E3, GuardConfig(), G)

    def test_raise_to_track(self, mission):
        g = GuardConfig()
        assert guard_raise_to_track(taut_at(0.9), mission, g)
        assert not guard_raise_to_track(taut_at(0.0), mission, g)
        assert not guard_raise_to_track(taut_at(0.9, vz=0.2), mission, g)
        assert guard_raise_to_track(taut_at(0.9, vz=0.2), mission, g, ref_vel=np.array([0, 0, 0.2]))

    @given(st.floats(-1.0, 1.0))
    def test_height_tolerance(self, dz):
        m = MissionConfig.for_cable().resolved(0.3)
        g = GuardConfig(height_tol=0.02)
        assert guard_raise_to_track(taut_at(0.9 + dz), m, g) == (abs(dz) < 0.02)

    def test_guard_config_validation(self):
        with pytest.raises(ValueError):
            GuardConfig(cable_tol=0.0)
