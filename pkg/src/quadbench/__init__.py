"""Desk-scale quadruped locomotion stack and benchmarks."""

from .actuator import ActuatorParams, ActuatorState
from .control import ControlMode, ImpedanceGains
from .gait import GaitParams, VelocityCommand
from .kinematics import RobotGeometry
from .logs import TrialLog
from .sim import SimState, Terrain

__version__ = "0.1.0"

__all__ = [
    "ActuatorParams",
    "ActuatorState",
    "ControlMode",
    "ImpedanceGains",
    "GaitParams",
    "VelocityCommand",
    "RobotGeometry",
    "TrialLog",
    "SimState",
    "Terrain",
    "__version__",
]
