"""Dual-quaternion model and control of a quadrotor with a cable-suspended load."""

import numpy as np

from .control import DualQuaternionController, default_gains
from .dynamics import CargoParams, RigidBodyParams
from .mission import GuardConfig, MissionConfig, ModeTag
from .sim import NoiseConfig, SimConfig, monte_carlo, run

__version__ = "0.1.0"

__all__ = [
    "CargoParams",
    "DualQuaternionController",
    "GuardConfig",
    "MissionConfig",
    "ModeTag",
    "NoiseConfig",
    "RigidBodyParams",
    "SimConfig",
    "default_gains",
    "default_params",
    "monte_carlo",
    "run",
]


def default_params() -> CargoParams:
    """System parameters of the reference lifting scenario."""
    return CargoParams(RigidBodyParams(0.7, np.diag([0.005, 0.007, 0.006])), 0.05, 0.3)
