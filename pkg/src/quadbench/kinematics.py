"""Leg kinematics for a quadruped with four identical 3-DOF legs.

Conventions:
  - Body frame: x forward, y left, z up, origin at the body center.
  - Leg order: FR=0, FL=1, BR=2, BL=3.
  - Joint order per leg: (abduction/roll, hip pitch, knee pitch).
  - q = (0, 0, 0) points the leg straight down; the knee angle is the
    interior bend between the two links, restricted to the [0, pi]
    branch so inverse kinematics is unique.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

FR, FL, BR, BL = 0, 1, 2, 3
LEG_NAMES = ("FR", "FL", "BR", "BL")

# (fore/aft sign, left/right sign) per leg; left legs have side = +1
_LEG_SIGNS = ((1.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (-1.0, 1.0))


class Unreachable(ValueError):
    """Raised when an IK target lies outside the leg workspace."""

    def __init__(self, target, max_reach: float):
        self.target = np.asarray(target, dtype=float)
        self.max_reach = float(max_reach)
        super().__init__(
            f"target {self.target.tolist()} outside leg workspace "
            f"(max reach {self.max_reach:.4f} m)"
        )


@dataclass(frozen=True)
class RobotGeometry:
    """Hip placements and link lengths for four identical legs.

    Default values are plumbing defaults chosen for the desk-scale
    simulator; they are not measured from any physical robot.
    """

    body_length: float = 0.276  # fore-aft hip separation, m
    body_width: float = 0.10  # lateral hip separation, m
    hip_offset: float = 0.04  # abduction axis to leg plane, m
    l_upper: float = 0.08  # m
    l_lower: float = 0.11  # m
    body_mass: float = 2.1  # kg, all leg mass lumped into the base

    def __post_init__(self):
        for name in ("body_length", "body_width", "hip_offset", "l_upper", "l_lower", "body_mass"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

    def hip_origin(self, leg: int) -> np.ndarray:
        """Hip (abduction axis) position in the body frame."""
        fa, side = _LEG_SIGNS[leg]
        return np.array([fa * self.body_length / 2.0, side * self.body_width / 2.0, 0.0])

    def side_sign(self, leg: int) -> float:
        """+1 for left legs, -1 for right legs."""
        return _LEG_SIGNS[leg][1]

    @property
    def max_reach(self) -> float:
        return self.l_upper + self.l_lower

    @property
    def min_reach(self) -> float:
        return abs(self.l_upper - self.l_lower)


def _planar_foot(q_hip: float, q_knee: float, geom: RobotGeometry) -> tuple[float, float]:
    """Foot (x, z) of the 2-link chain in the leg sagittal plane."""
    l1, l2 = geom.l_upper, geom.l_lower
    x = l1 * math.sin(q_hip) + l2 * math.sin(q_hip + q_knee)
    z = -l1 * math.cos(q_hip) - l2 * math.cos(q_hip + q_knee)
    return x, z


def forward_kinematics(leg: int, q, geom: RobotGeometry) -> np.ndarray:
    """Foot position in the body frame for one leg."""
    q_ab, q_hip, q_knee = float(q[0]), float(q[1]), float(q[2])
    px, pz = _planar_foot(q_hip, q_knee, geom)
    py = geom.side_sign(leg) * geom.hip_offset
    ca, sa = math.cos(q_ab), math.sin(q_ab)
    # roll about the body x-axis through the hip
    foot = np.array([px, ca * py - sa * pz, sa * py + ca * pz])
    return geom.hip_origin(leg) + foot


def leg_jacobian(leg: int, q, geom: RobotGeometry) -> np.ndarray:
    """Analytic 3x3 Jacobian d(foot position)/dq in the body frame."""
    q_ab, q_hip, q_knee = float(q[0]), float(q[1]), float(q[2])
    l1, l2 = geom.l_upper, geom.l_lower
    s1, c1 = math.sin(q_hip), math.cos(q_hip)
    s12, c12 = math.sin(q_hip + q_knee), math.cos(q_hip + q_knee)
    ca, sa = math.cos(q_ab), math.sin(q_ab)

    py0 = geom.side_sign(leg) * geom.hip_offset
    pz0 = -l1 * c1 - l2 * c12
    py = ca * py0 - sa * pz0
    pz = sa * py0 + ca * pz0

    dxd1 = l1 * c1 + l2 * c12
    dzd1 = l1 * s1 + l2 * s12  # d(pz0)/dq_hip
    dxd2 = l2 * c12
    dzd2 = l2 * s12

    return np.array(
        [
            [0.0, dxd1, dxd2],
            [-pz, -sa * dzd1, -sa * dzd2],
            [py, ca * dzd1, ca * dzd2],
        ]
    )


def inverse_kinematics(leg: int, target, geom: RobotGeometry) -> np.ndarray:
    """Joint angles reaching ``target`` (body frame), knee-positive branch.

    Raises Unreachable when the target leaves the leg's workspace.
    """
    target = np.asarray(target, dtype=float)
    rel = target - geom.hip_origin(leg)
    x, y, z = rel
    h = geom.side_sign(leg) * geom.hip_offset

    r_sq = y * y + z * z
    if r_sq < h * h:
        raise Unreachable(target, geom.max_reach)
    # distance from the abduction axis to the foot, within the leg plane
    zp = -math.sqrt(r_sq - h * h)
    q_ab = math.atan2(y, -z) - math.atan2(h, -zp)

    d_sq = x * x + zp * zp
    l1, l2 = geom.l_upper, geom.l_lower
    cos_knee = (d_sq - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if cos_knee > 1.0 + 1e-12 or cos_knee < -1.0 - 1e-12:
        raise Unreachable(target, geom.max_reach)
    q_knee = math.acos(min(1.0, max(-1.0, cos_knee)))
    q_hip = math.atan2(x, -zp) - math.atan2(l2 * math.sin(q_knee), l1 + l2 * math.cos(q_knee))
    return np.array([q_ab, q_hip, q_knee])


def foot_velocity(leg: int, q, qdot, geom: RobotGeometry) -> np.ndarray:
    """Foot velocity J(q) qdot in the body frame."""
    return leg_jacobian(leg, q, geom) @ np.asarray(qdot, dtype=float)


def reachable(leg: int, target, geom: RobotGeometry) -> bool:
    try:
        inverse_kinematics(leg, target, geom)
        return True
    except Unreachable:
        return False


# --- vectorized helpers used by the simulator hot loop ---------------------


def all_feet_positions(q12: np.ndarray, geom: RobotGeometry) -> np.ndarray:
    """Foot positions (4, 3) in the body frame from a (4, 3) joint array."""
    q12 = np.asarray(q12, dtype=float).reshape(4, 3)
    l1, l2 = geom.l_upper, geom.l_lower
    qa, qh, qk = q12[:, 0], q12[:, 1], q12[:, 2]
    px = l1 * np.sin(qh) + l2 * np.sin(qh + qk)
    pz0 = -l1 * np.cos(qh) - l2 * np.cos(qh + qk)
    py0 = _SIDE_SIGNS * geom.hip_offset
    ca, sa = np.cos(qa), np.sin(qa)
    feet = np.stack([px, ca * py0 - sa * pz0, sa * py0 + ca * pz0], axis=1)
    return feet + _hip_origins(geom)


def all_leg_jacobians(q12: np.ndarray, geom: RobotGeometry) -> np.ndarray:
    """Jacobians (4, 3, 3) for all legs from a (4, 3) joint array."""
    q12 = np.asarray(q12, dtype=float).reshape(4, 3)
    l1, l2 = geom.l_upper, geom.l_lower
    qa, qh, qk = q12[:, 0], q12[:, 1], q12[:, 2]
    s1, c1 = np.sin(qh), np.cos(qh)
    s12, c12 = np.sin(qh + qk), np.cos(qh + qk)
    ca, sa = np.cos(qa), np.sin(qa)
    py0 = _SIDE_SIGNS * geom.hip_offset
    pz0 = -l1 * c1 - l2 * c12
    py = ca * py0 - sa * pz0
    pz = sa * py0 + ca * pz0
    dxd1 = l1 * c1 + l2 * c12
    dzd1 = l1 * s1 + l2 * s12
    dxd2 = l2 * c12
    dzd2 = l2 * s12

    J = np.zeros((4, 3, 3))
    J[:, 0, 1] = dxd1
    J[:, 0, 2] = dxd2
    J[:, 1, 0] = -pz
    J[:, 1, 1] = -sa * dzd1
    J[:, 1, 2] = -sa * dzd2
    J[:, 2, 0] = py
    J[:, 2, 1] = ca * dzd1
    J[:, 2, 2] = ca * dzd2
    return J


_SIDE_SIGNS = np.array([s for _, s in _LEG_SIGNS])


@functools.lru_cache(maxsize=8)
def _hip_origins_cached(geom: RobotGeometry) -> np.ndarray:
    signs = np.array(_LEG_SIGNS)
    hips = np.stack(
        [
            signs[:, 0] * geom.body_length / 2.0,
            signs[:, 1] * geom.body_width / 2.0,
            np.zeros(4),
        ],
        axis=1,
    )
    hips.setflags(write=False)
    return hips


def _hip_origins(geom: RobotGeometry) -> np.ndarray:
    return _hip_origins_cached(geom)
