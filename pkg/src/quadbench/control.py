"""Low-level leg control: torque passthrough, joint PD, task-space impedance.

All three modes run at the 1 kHz rate and produce per-motor current
commands through the inverted actuator friction model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .actuator import ActuatorParams, current_for_torque_vec
from .kinematics import RobotGeometry, all_feet_positions, all_leg_jacobians


class ControlMode(enum.Enum):
    TORQUE_PASSTHROUGH = "torque_passthrough"
    JOINT_PD = "joint_pd"
    TASK_SPACE_IMPEDANCE = "task_space_impedance"


class CommandModeMismatch(TypeError):
    """Raised when a leg command payload does not match the active mode."""


@dataclass(frozen=True)
class ImpedanceGains:
    """Diagonal task-space and scalar joint-space gains.

    Defaults are simulation-tuned plumbing values for the default
    geometry; nothing here is a published gain.
    """

    kp_task: np.ndarray = field(default_factory=lambda: np.array([500.0, 500.0, 500.0]))  # N/m
    kd_task: np.ndarray = field(default_factory=lambda: np.array([20.0, 20.0, 20.0]))  # Ns/m
    kp_joint: float = 4.0  # Nm/rad
    kd_joint: float = 0.1  # Nms/rad

    def __post_init__(self):
        if np.any(np.asarray(self.kp_task) < 0) or np.any(np.asarray(self.kd_task) < 0):
            raise ValueError("task gains must be nonnegative")
        if self.kp_joint < 0 or self.kd_joint < 0:
            raise ValueError("joint gains must be nonnegative")


@dataclass
class TorqueCommand:
    torques: np.ndarray  # Nm, (3,)


@dataclass
class JointCommand:
    q_ref: np.ndarray  # rad, (3,)
    qd_ref: np.ndarray  # rad/s, (3,)


@dataclass
class ImpedanceCommand:
    r_ref: np.ndarray  # m, (3,) body frame
    v_ref: np.ndarray  # m/s, (3,)
    f_ff: np.ndarray  # N, (3,)


_MODE_PAYLOAD = {
    ControlMode.TORQUE_PASSTHROUGH: TorqueCommand,
    ControlMode.JOINT_PD: JointCommand,
    ControlMode.TASK_SPACE_IMPEDANCE: ImpedanceCommand,
}


def task_impedance_force(r_ref, r, v_ref, v, f_ff, g: ImpedanceGains) -> np.ndarray:
    """Desired foot force from the spring-damper law plus feedforward."""
    r_ref, r = np.asarray(r_ref, float), np.asarray(r, float)
    v_ref, v = np.asarray(v_ref, float), np.asarray(v, float)
    return np.asarray(g.kp_task) * (r_ref - r) + np.asarray(g.kd_task) * (v_ref - v) + np.asarray(f_ff, float)


def force_to_torque(J: np.ndarray, F) -> np.ndarray:
    """Map a foot force to joint torques through the Jacobian transpose."""
    return np.asarray(J, float).T @ np.asarray(F, float)


def joint_pd(q_ref, q, qd_ref, qd, g: ImpedanceGains) -> np.ndarray:
    """Joint-space PD torque."""
    q_ref, q = np.asarray(q_ref, float), np.asarray(q, float)
    qd_ref, qd = np.asarray(qd_ref, float), np.asarray(qd, float)
    return g.kp_joint * (q_ref - q) + g.kd_joint * (qd_ref - qd)


def low_level_step(
    mode: ControlMode,
    commands,
    q12: np.ndarray,
    qd12: np.ndarray,
    geom: RobotGeometry,
    gains: ImpedanceGains,
    act: ActuatorParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One 1 kHz control tick for all four legs.

    Returns (currents A[12], desired torques Nm[12], saturation flags[12]).
    """
    expected = _MODE_PAYLOAD[mode]
    for cmd in commands:
        if not isinstance(cmd, expected):
            raise CommandModeMismatch(
                f"mode {mode.value} expects {expected.__name__}, got {type(cmd).__name__}"
            )

    q12 = np.asarray(q12, float).reshape(4, 3)
    qd12 = np.asarray(qd12, float).reshape(4, 3)
    tau = np.empty((4, 3))

    if mode is ControlMode.TORQUE_PASSTHROUGH:
        for leg, cmd in enumerate(commands):
            tau[leg] = cmd.torques
    elif mode is ControlMode.JOINT_PD:
        for leg, cmd in enumerate(commands):
            tau[leg] = joint_pd(cmd.q_ref, q12[leg], cmd.qd_ref, qd12[leg], gains)
    else:
        feet = all_feet_positions(q12, geom)
        J = all_leg_jacobians(q12, geom)
        for leg, cmd in enumerate(commands):
            v = J[leg] @ qd12[leg]
            F = task_impedance_force(cmd.r_ref, feet[leg], cmd.v_ref, v, cmd.f_ff, gains)
            tau[leg] = J[leg].T @ F

    tau_flat = tau.reshape(12)
    currents, saturated = current_for_torque_vec(tau_flat, qd12.reshape(12), act)
    return currents, tau_flat, saturated
