import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dqcargo import default_gains, default_params
from dqcargo.dqmath import DualQuaternion, DualVector, from_pose, quat_normalize

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)


@st.composite
def unit_quats(draw):
    q = draw(arrays(np.float64, 4, elements=st.floats(-1.0, 1.0)))
    if np.linalg.norm(q) < 1e-3:
        q = np.array([1.0, 0.0, 0.0, 0.0])
    return quat_normalize(q)


@st.composite
def poses(draw):
    return from_pose(draw(unit_quats()), draw(vec3))


@st.composite
def dual_vectors(draw):
    return DualVector(draw(vec3), draw(vec3))


def random_unit_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def random_poses(rng, n, scale=5.0):
    return from_pose(random_unit_quats(rng, n), rng.uniform(-scale, scale, size=(n, 3)))


def rotation_matrix(q):
    """Textbook rotation matrix of a unit quaternion (scalar first)."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def dq_close(a: DualQuaternion, b: DualQuaternion, tol=1e-9):
    return np.allclose(a.real, b.real, atol=tol) and np.allclose(a.dual, b.dual, atol=tol)


@pytest.fixture
def params():
    return default_params()


@pytest.fixture
def gains():
    return default_gains()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, passed: bool, detail: str) -> str:
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
