"""Deterministic fixed-step physics for the desk-scale quadruped.

Floating base with four massless, quasi-static legs: joints integrate
against the actuator's reflected output inertia, contact is a
spring-damper penalty against a box-obstacle heightfield, and the base
follows Newton-Euler under gravity and the foot contact forces.
Semi-implicit Euler at the 1 kHz low-level rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actuator import ActuatorParams, current_lag_step_vec, output_torque_vec
from .control import ImpedanceGains, low_level_step
from .kinematics import RobotGeometry, all_feet_positions, all_leg_jacobians
from .logs import TrialLog, empty_log, truncate_log

GRAVITY = 9.81
_G_VEC = np.array([0.0, 0.0, -GRAVITY])
# Nominal body height used only for the box inertia of the base.
_BODY_HEIGHT = 0.06
# Tangential viscous contact coefficient, capped by the friction cone.
# Kept small enough that the damping it reflects into the base rotation
# (through the foot-to-body lever arm) stays explicit-Euler stable at 1 kHz.
TANGENTIAL_DAMPING = 15.0


class NumericalDivergence(RuntimeError):
    """Simulation state left sanity bounds; gains or dt are unstable."""


@dataclass
class Terrain:
    ground_height: float = 0.0
    # obstacle boxes: (x_min, x_max, y_min, y_max, height), closed boundaries
    boxes: tuple = ()
    friction: float = 0.7
    stiffness: float = 5000.0  # N/m
    damping: float = 50.0  # Ns/m

    def __post_init__(self):
        if self.ground_height < 0 or self.friction < 0 or self.stiffness <= 0:
            raise ValueError("invalid terrain parameters")
        for b in self.boxes:
            if len(b) != 5 or b[4] < 0:
                raise ValueError(f"invalid obstacle box {b}")


@dataclass
class SimState:
    base_pos: np.ndarray = field(default_factory=lambda: np.zeros(3))
    base_quat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))  # wxyz
    base_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world
    base_angvel: np.ndarray = field(default_factory=lambda: np.zeros(3))  # body
    q: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    qd: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    i_filtered: np.ndarray = field(default_factory=lambda: np.zeros(12))
    t: float = 0.0
    base_accel: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world, last step
    # per-joint stiction disturbance fraction, redrawn per stick event
    stiction_u: np.ndarray = field(default_factory=lambda: np.zeros(12))
    stiction_mask: np.ndarray = field(default_factory=lambda: np.zeros(12, dtype=bool))

    def copy(self) -> "SimState":
        return SimState(
            base_pos=self.base_pos.copy(),
            base_quat=self.base_quat.copy(),
            base_vel=self.base_vel.copy(),
            base_angvel=self.base_angvel.copy(),
            q=self.q.copy(),
            qd=self.qd.copy(),
            i_filtered=self.i_filtered.copy(),
            t=self.t,
            base_accel=self.base_accel.copy(),
            stiction_u=self.stiction_u.copy(),
            stiction_mask=self.stiction_mask.copy(),
        )


@dataclass
class ImuSample:
    angular_rate: np.ndarray  # rad/s, body frame
    specific_force: np.ndarray  # m/s^2, body frame


@dataclass
class StepDiagnostics:
    contact_forces: np.ndarray  # (4, 3) world frame
    normal_forces: np.ndarray  # (4,)
    contact_dissipation: float  # W, >= 0
    friction_dissipation: float  # W, >= 0


# --- quaternion helpers (wxyz) ---------------------------------------------


def quat_to_mat(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_from_rotvec(v: np.ndarray) -> np.ndarray:
    angle = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if angle < 1e-12:
        return np.array([1.0, 0.5 * v[0], 0.5 * v[1], 0.5 * v[2]]) / math.sqrt(
            1.0 + 0.25 * (v @ v)
        )
    axis = v / angle
    half = 0.5 * angle
    s = math.sin(half)
    return np.array([math.cos(half), s * axis[0], s * axis[1], s * axis[2]])


def _normalize_quat(q: np.ndarray) -> np.ndarray:
    return q / math.sqrt(float(q @ q))


# --- terrain and contact ----------------------------------------------------


def terrain_height(x: float, y: float, terrain: Terrain) -> float:
    h = terrain.ground_height
    for (x0, x1, y0, y1, bh) in terrain.boxes:
        if x0 <= x <= x1 and y0 <= y <= y1:
            h = max(h, bh)
    return h


def contact_force(foot_pos, foot_vel, terrain: Terrain) -> np.ndarray:
    """Penalty contact force on one foot, world frame."""
    foot_pos = np.asarray(foot_pos, float)
    foot_vel = np.asarray(foot_vel, float)
    pen = terrain_height(foot_pos[0], foot_pos[1], terrain) - foot_pos[2]
    if pen <= 0.0:
        return np.zeros(3)
    fn = terrain.stiffness * pen + terrain.damping * max(0.0, -foot_vel[2])
    fn = max(0.0, fn)
    ft = -TANGENTIAL_DAMPING * foot_vel[:2]
    cap = terrain.friction * fn
    mag = math.sqrt(float(ft @ ft))
    if mag > cap:
        ft *= cap / mag
    return np.array([ft[0], ft[1], fn])


def _contact_forces_vec(feet_w: np.ndarray, feet_vel_w: np.ndarray, terrain: Terrain):
    """Contact forces for all four feet; returns (forces (4,3), fn (4,))."""
    heights = np.array([terrain_height(p[0], p[1], terrain) for p in feet_w])
    pen = heights - feet_w[:, 2]
    active = pen > 0.0
    fn = np.where(
        active,
        np.maximum(
            0.0,
            terrain.stiffness * pen + terrain.damping * np.maximum(0.0, -feet_vel_w[:, 2]),
        ),
        0.0,
    )
    ft = -TANGENTIAL_DAMPING * feet_vel_w[:, :2] * active[:, None]
    cap = terrain.friction * fn
    mag = np.sqrt(np.sum(ft * ft, axis=1))
    scale = np.where(mag > cap, np.divide(cap, mag, out=np.ones_like(mag), where=mag > 0), 1.0)
    ft *= scale[:, None]
    return np.concatenate([ft, fn[:, None]], axis=1), fn


def _cross_vec_rows(a: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Row-wise a x B[i] for a (3,) vector and (n, 3) rows."""
    out = np.empty_like(B)
    out[:, 0] = a[1] * B[:, 2] - a[2] * B[:, 1]
    out[:, 1] = a[2] * B[:, 0] - a[0] * B[:, 2]
    out[:, 2] = a[0] * B[:, 1] - a[1] * B[:, 0]
    return out


def _cross_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Row-wise A[i] x B[i] for matching (n, 3) arrays."""
    out = np.empty_like(A)
    out[:, 0] = A[:, 1] * B[:, 2] - A[:, 2] * B[:, 1]
    out[:, 1] = A[:, 2] * B[:, 0] - A[:, 0] * B[:, 2]
    out[:, 2] = A[:, 0] * B[:, 1] - A[:, 1] * B[:, 0]
    return out


def base_inertia(geom: RobotGeometry) -> np.ndarray:
    """Diagonal box inertia of the base (all mass lumped there)."""
    m, l, w, h = geom.body_mass, geom.body_length, geom.body_width, _BODY_HEIGHT
    return np.array(
        [m * (w * w + h * h) / 12.0, m * (l * l + h * h) / 12.0, m * (l * l + w * w) / 12.0]
    )


# --- integration ------------------------------------------------------------


def step(
    state: SimState,
    currents: np.ndarray,
    terrain: Terrain,
    geom: RobotGeometry,
    act: ActuatorParams,
    dt: float,
    rng: np.random.Generator | None = None,
) -> tuple[SimState, StepDiagnostics]:
    """Advance one low-level tick; mutates and returns ``state``.

    ``rng`` drives the zero-speed stiction disturbance; with rng=None
    the step is disturbance-free.
    """
    if not 0.0 < dt <= 2e-3:
        raise ValueError("dt must lie in (0, 2 ms]")

    # (1) current lag
    state.i_filtered = current_lag_step_vec(np.asarray(currents, float), state.i_filtered, dt, act)

    # (2) kinematics and contact
    omega = state.qd.reshape(12)
    R = quat_to_mat(state.base_quat)
    feet_b = all_feet_positions(state.q, geom)
    J = all_leg_jacobians(state.q, geom)
    feet_w = state.base_pos + feet_b @ R.T
    foot_vel_b = np.einsum("lij,lj->li", J, state.qd)
    feet_vel_w = state.base_vel + (_cross_vec_rows(state.base_angvel, feet_b) + foot_vel_b) @ R.T

    forces_w, fn = _contact_forces_vec(feet_w, feet_vel_w, terrain)
    forces_b = forces_w @ R
    tau_contact = np.einsum("lji,lj->li", J, forces_b).reshape(12)

    # (3) joint torque: the smooth friction model everywhere, plus a
    # resistive stiction band near zero speed.  A stick event draws a
    # breakaway level u in [0, 1]; stiction absorbs up to
    # u * stiction_fraction * |geared motor torque| of the net torque and
    # the joint holds still while the net stays below that.
    tau_gear = act.gear_ratio * act.k_t * state.i_filtered
    tau_net = output_torque_vec(state.i_filtered, omega, act) + tau_contact
    stuck = np.zeros(12, dtype=bool)
    if rng is not None:
        slow = np.abs(omega) < act.stiction_speed
        entered = slow & ~state.stiction_mask
        if np.any(entered):
            state.stiction_u = np.where(entered, rng.uniform(0.0, 1.0, size=12), state.stiction_u)
        state.stiction_mask = slow
        if np.any(slow):
            capacity = state.stiction_u * act.stiction_fraction * np.abs(tau_gear)
            stuck = slow & (np.abs(tau_net) <= capacity)
            absorbed = np.minimum(capacity, np.abs(tau_net))
            tau_net = np.where(slow, tau_net - np.sign(tau_net) * absorbed, tau_net)
    qdd = (tau_net / act.output_inertia).reshape(4, 3)

    # (4) base Newton-Euler
    f_total = geom.body_mass * _G_VEC + forces_w.sum(axis=0)
    accel = f_total / geom.body_mass
    torque_b = _cross_rows(feet_b, forces_b).sum(axis=0)
    inertia = base_inertia(geom)
    w = state.base_angvel
    iw = inertia * w
    gyro = np.array(
        [w[1] * iw[2] - w[2] * iw[1], w[2] * iw[0] - w[0] * iw[2], w[0] * iw[1] - w[1] * iw[0]]
    )
    angacc = (torque_b - gyro) / inertia

    # (5) semi-implicit Euler
    state.base_vel = state.base_vel + accel * dt
    state.base_pos = state.base_pos + state.base_vel * dt
    state.base_angvel = state.base_angvel + angacc * dt
    dq = quat_from_rotvec(state.base_angvel * dt)
    state.base_quat = _normalize_quat(quat_mul(state.base_quat, dq))
    qd_new = np.clip((state.qd.reshape(12) + qdd.reshape(12) * dt), -act.max_speed, act.max_speed)
    qd_new[stuck] = 0.0
    state.qd = qd_new.reshape(4, 3)
    state.q = state.q + state.qd * dt
    state.t += dt
    state.base_accel = accel

    if np.max(np.abs(state.base_pos)) > 100.0 or np.max(np.abs(state.base_vel)) > 100.0:
        raise NumericalDivergence(
            f"state out of bounds at t={state.t:.3f}s: pos={state.base_pos}, vel={state.base_vel}"
        )

    # energy bookkeeping for the audit invariant
    tau_f = tau_net - tau_gear - tau_contact  # friction part only
    slip_power = -np.einsum("li,li->", forces_w[:, :2], feet_vel_w[:, :2])
    vz_in = np.maximum(0.0, -feet_vel_w[:, 2]) * (fn > 0.0)
    normal_damp = terrain.damping * float(np.sum(vz_in * vz_in))
    diag = StepDiagnostics(
        contact_forces=forces_w,
        normal_forces=fn,
        contact_dissipation=slip_power + normal_damp,
        friction_dissipation=float(np.sum(np.maximum(0.0, -tau_f * omega))),
    )
    return state, diag


# --- IMU and orientation estimation ----------------------------------------


def imu_read(
    state: SimState, noise_std: float = 0.0, rng: np.random.Generator | None = None
) -> ImuSample:
    """Body-frame angular rate and specific force (accel minus gravity)."""
    R = quat_to_mat(state.base_quat)
    specific = R.T @ (state.base_accel - _G_VEC)
    rate = state.base_angvel.copy()
    if noise_std > 0.0 and rng is not None:
        rate = rate + rng.normal(0.0, noise_std, 3)
        specific = specific + rng.normal(0.0, noise_std, 3)
    return ImuSample(angular_rate=rate, specific_force=specific)


def estimate_orientation(
    q_est: np.ndarray, imu: ImuSample, dt: float, alpha: float = 0.005
) -> np.ndarray:
    """Complementary filter: gyro integration blended toward gravity.

    alpha is the per-step correction fraction; alpha = 0 is pure gyro
    integration.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    q_pred = quat_mul(q_est, quat_from_rotvec(imu.angular_rate * dt))
    f = imu.specific_force
    norm = math.sqrt(float(f @ f))
    if alpha > 0.0 and norm > 1e-6:
        v_meas = f / norm
        v_pred = quat_to_mat(q_pred).T @ np.array([0.0, 0.0, 1.0])
        # body-frame correction: rotate the predicted gravity direction
        # toward the measured one
        axis = np.cross(v_meas, v_pred)
        q_pred = quat_mul(q_pred, quat_from_rotvec(alpha * axis))
    return _normalize_quat(q_pred)


# --- standing initial condition --------------------------------------------


def standing_state(
    geom: RobotGeometry, stand_height: float, terrain: Terrain, feet_xy=None
) -> SimState:
    """Robot at rest, feet just touching the ground under the hips."""
    from .kinematics import inverse_kinematics, _hip_origins, _SIDE_SIGNS

    hips = _hip_origins(geom)
    q = np.zeros((4, 3))
    for leg in range(4):
        target = hips[leg] + np.array(
            [0.0, _SIDE_SIGNS[leg] * geom.hip_offset, -stand_height]
        )
        q[leg] = inverse_kinematics(leg, target, geom)
    ground = terrain.ground_height
    return SimState(base_pos=np.array([0.0, 0.0, ground + stand_height]), q=q)


# --- two-rate episode loop --------------------------------------------------

LOW_LEVEL_DT = 1e-3  # 1 kHz current/impedance loop
HIGH_LEVEL_DT = 0.01  # 100 Hz motion planning loop


def run_episode(
    controller,
    terrain: Terrain,
    duration: float,
    seed: int,
    geom: RobotGeometry,
    act: ActuatorParams,
    gains: ImpedanceGains,
    initial_state: SimState,
    meta: dict | None = None,
    dt: float = LOW_LEVEL_DT,
    high_level_dt: float = HIGH_LEVEL_DT,
    stop_condition=None,
) -> TrialLog:
    """Run the two-rate loop and log every low-level tick.

    ``controller(t, state) -> (ControlMode, commands)`` is called at the
    high-level rate.  Fully deterministic for a fixed seed; a controller
    exception records a DNF outcome, NumericalDivergence propagates.
    """
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    rng = np.random.default_rng(seed)
    state = initial_state.copy()
    n = int(round(duration / dt))
    every = max(1, int(round(high_level_dt / dt)))

    meta = dict(meta or {})
    meta.setdefault("seed", seed)
    meta.setdefault("dt", dt)
    meta.setdefault("duration", duration)
    meta.setdefault("body_mass", geom.body_mass)
    log = empty_log(n, meta)

    motor_speed_factor = act.gear_ratio
    r_winding = act.winding_resistance
    mode = None
    commands = None
    r_ref_row = np.full(12, np.nan)
    k = 0
    try:
        for k in range(n):
            if k % every == 0:
                mode, commands = controller(state.t, state)
                if commands and hasattr(commands[0], "r_ref"):
                    r_ref_row = np.concatenate([c.r_ref for c in commands])
                if stop_condition is not None and stop_condition(state):
                    return truncate_log(log, k)
            currents, tau_des, _sat = low_level_step(
                mode, commands, state.q, state.qd, geom, gains, act
            )
            # record the pre-step state with the currents applied this tick
            omega = state.qd.reshape(12)
            log.t[k] = state.t
            log.base_pos[k] = state.base_pos
            log.base_quat[k] = state.base_quat
            log.base_vel[k] = state.base_vel
            log.base_angvel[k] = state.base_angvel
            log.q[k] = state.q.reshape(12)
            log.qd[k] = omega
            log.currents[k] = currents
            log.power[k] = (
                currents * currents * r_winding
                + act.k_t * currents * motor_speed_factor * omega
            )
            log.r_ref[k] = r_ref_row
            _, diag = step(state, currents, terrain, geom, act, dt, rng)
            log.contact[k] = diag.normal_forces > 0.0
    except NumericalDivergence:
        raise
    except Exception as exc:  # controller or command construction failure
        truncate_log(log, k)
        log.outcome = ("dnf", f"{type(exc).__name__}: {exc}")
        return log
    return log

