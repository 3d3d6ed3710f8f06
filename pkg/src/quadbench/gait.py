"""Trot foot-trajectory generator.

Produces body-frame foot position/velocity targets from time and a
commanded planar velocity (v_x, v_y, omega_z).  Stance feet sweep
opposite the commanded body motion (exact rigid-motion field for the
yaw component); swing feet follow a cubic Hermite path to the predicted
touchdown with a sine-squared vertical bump, matching stance position
and velocity at both boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .control import ImpedanceCommand
from .kinematics import (
    RobotGeometry,
    Unreachable,
    inverse_kinematics,
    _hip_origins,
    _SIDE_SIGNS,
)

GRAVITY = 9.81

TROT_OFFSETS = (0.0, 0.5, 0.5, 0.0)  # FR, FL, BR, BL


class TargetUnreachable(ValueError):
    """A gait target left the leg workspace; GaitParams are inconsistent."""


@dataclass(frozen=True)
class GaitParams:
    """Trot parameters. Defaults are simulation-tuned plumbing values."""

    frequency: float = 3.0  # Hz, full gait cycles per second
    step_height: float = 0.03  # m
    stance_fraction: float = 0.55
    phase_offsets: tuple = TROT_OFFSETS
    stand_height: float = 0.12  # m, hip above ground
    stance_depth: float = 0.0  # m, push-down during stance

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if not 0.0 < self.stance_fraction < 1.0:
            raise ValueError("stance_fraction must lie in (0, 1)")
        if self.step_height < 0:
            raise ValueError("step_height must be nonnegative")
        if any(not 0.0 <= o < 1.0 for o in self.phase_offsets) or len(self.phase_offsets) != 4:
            raise ValueError("phase_offsets must be four values in [0, 1)")


@dataclass(frozen=True)
class VelocityCommand:
    v_x: float = 0.0  # m/s
    v_y: float = 0.0  # m/s
    omega_z: float = 0.0  # rad/s


def leg_phase(t: float, leg: int, gp: GaitParams) -> tuple[float, bool]:
    """Cycle phase in [0, 1) and whether the leg is in stance."""
    phase = (t * gp.frequency + gp.phase_offsets[leg]) % 1.0
    return phase, phase < gp.stance_fraction


def neutral_foothold(leg: int, gp: GaitParams, geom: RobotGeometry) -> np.ndarray:
    """Footfall directly under the hip at the stand height."""
    hips = _hip_origins(geom)
    p = hips[leg].copy()
    p[1] += _SIDE_SIGNS[leg] * geom.hip_offset
    p[2] = -gp.stand_height
    return p


def _stance_pose(t_rel: float, cmd: VelocityCommand, p0: np.ndarray, gp: GaitParams):
    """Stance foot xy and velocity at time ``t_rel`` from mid-stance.

    The foot stays fixed on the ground while the body translates at
    (v_x, v_y) and yaws at omega_z, so in the body frame it follows the
    reversed rigid motion about the neutral point.
    """
    ang = -cmd.omega_z * t_rel
    c, s = math.cos(ang), math.sin(ang)
    x0, y0 = p0[0], p0[1]
    rx = c * x0 - s * y0 - cmd.v_x * t_rel
    ry = s * x0 + c * y0 - cmd.v_y * t_rel
    # d/dt of the rotation term: -omega x (Rz p0)
    vx = -cmd.omega_z * (-(s * x0 + c * y0)) - cmd.v_x
    vy = -cmd.omega_z * (c * x0 - s * y0) - cmd.v_y
    return rx, ry, vx, vy


def stance_target(
    phase: float, cmd: VelocityCommand, leg: int, gp: GaitParams, geom: RobotGeometry
) -> tuple[np.ndarray, np.ndarray]:
    """Foot target during stance; phase must lie in [0, stance_fraction)."""
    sp = phase / gp.stance_fraction  # 0 at touchdown, 1 at liftoff
    t_st = gp.stance_fraction / gp.frequency
    t_rel = (sp - 0.5) * t_st
    p0 = neutral_foothold(leg, gp, geom)
    rx, ry, vx, vy = _stance_pose(t_rel, cmd, p0, gp)
    z = -gp.stand_height - gp.stance_depth * math.sin(math.pi * sp)
    vz = -gp.stance_depth * (math.pi / t_st) * math.cos(math.pi * sp)
    return np.array([rx, ry, z]), np.array([vx, vy, vz])


def swing_target(
    phase: float, cmd: VelocityCommand, leg: int, gp: GaitParams, geom: RobotGeometry
) -> tuple[np.ndarray, np.ndarray]:
    """Foot target during swing; phase must lie in [stance_fraction, 1)."""
    u = (phase - gp.stance_fraction) / (1.0 - gp.stance_fraction)
    t_sw = (1.0 - gp.stance_fraction) / gp.frequency
    t_st = gp.stance_fraction / gp.frequency
    p0 = neutral_foothold(leg, gp, geom)

    # boundary states from the adjacent stance segments
    r_lo, v_lo = _stance_boundary(1.0, cmd, p0, gp, t_st)
    r_td, v_td = _stance_boundary(0.0, cmd, p0, gp, t_st)

    # cubic Hermite in normalized time, velocity-matched at both ends
    h00 = 2 * u**3 - 3 * u**2 + 1
    h10 = u**3 - 2 * u**2 + u
    h01 = -2 * u**3 + 3 * u**2
    h11 = u**3 - u**2
    d00 = 6 * u**2 - 6 * u
    d10 = 3 * u**2 - 4 * u + 1
    d01 = -6 * u**2 + 6 * u
    d11 = 3 * u**2 - 2 * u

    m0 = v_lo * t_sw
    m1 = v_td * t_sw
    r = h00 * r_lo + h10 * m0 + h01 * r_td + h11 * m1
    v = (d00 * r_lo + d10 * m0 + d01 * r_td + d11 * m1) / t_sw

    bump = gp.step_height * math.sin(math.pi * u) ** 2
    dbump = gp.step_height * math.pi * math.sin(2.0 * math.pi * u) / t_sw
    r[2] += bump
    v[2] += dbump
    return r, v


def _stance_boundary(sp: float, cmd: VelocityCommand, p0: np.ndarray, gp: GaitParams, t_st: float):
    t_rel = (sp - 0.5) * t_st
    rx, ry, vx, vy = _stance_pose(t_rel, cmd, p0, gp)
    z = -gp.stand_height - gp.stance_depth * math.sin(math.pi * sp)
    vz = -gp.stance_depth * (math.pi / t_st) * math.cos(math.pi * sp)
    return np.array([rx, ry, z]), np.array([vx, vy, vz])


def foot_target(
    t: float, cmd: VelocityCommand, leg: int, gp: GaitParams, geom: RobotGeometry
) -> tuple[np.ndarray, np.ndarray, bool]:
    """(r_ref, v_ref, in_stance) for one leg at time t."""
    phase, in_stance = leg_phase(t, leg, gp)
    if in_stance:
        r, v = stance_target(phase, cmd, leg, gp, geom)
    else:
        r, v = swing_target(phase, cmd, leg, gp, geom)
    return r, v, in_stance


def controller_step(
    t: float, cmd: VelocityCommand, gp: GaitParams, geom: RobotGeometry
) -> list[ImpedanceCommand]:
    """Per-leg impedance commands for the trot at time t.

    Stance legs receive an upward feedforward force splitting the body
    weight; swing legs receive none.  With step_height = 0 the feet
    never leave the ground, so all four legs are treated as load
    bearing.
    """
    targets = []
    stance_flags = []
    for leg in range(4):
        r, v, in_stance = foot_target(t, cmd, leg, gp, geom)
        targets.append((r, v))
        stance_flags.append(in_stance or gp.step_height == 0.0)

    n_stance = sum(stance_flags)
    support = geom.body_mass * GRAVITY / n_stance if n_stance else 0.0

    commands = []
    for leg in range(4):
        r, v = targets[leg]
        try:
            inverse_kinematics(leg, r, geom)
        except Unreachable as exc:
            raise TargetUnreachable(
                f"leg {leg} target {r.tolist()} outside workspace; check GaitParams"
            ) from exc
        # F is the force the leg applies to the environment, so weight
        # support is a downward push at each stance foot.
        f_ff = np.array([0.0, 0.0, -support if stance_flags[leg] else 0.0])
        commands.append(ImpedanceCommand(r_ref=r, v_ref=v, f_ff=f_ff))
    return commands
