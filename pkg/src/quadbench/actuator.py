"""Brushless gearmotor + current-mode controller model.

Current-to-torque map with Coulomb, viscous, and load-dependent gearbox
friction, a first-order current lag for the finite torque bandwidth, and
the inverted friction model used for torque control.  sgn(0) = 0 by
convention: at exactly zero speed no velocity-dependent friction is
applied; stiction is injected by the simulator as a bounded disturbance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ActuatorParams:
    k_t: float = 0.0069  # Nm/A at the gearbox input
    gear_ratio: float = 36.0
    coulomb: float = 0.021  # Nm
    damping: float = 0.0045  # Nms/rad, on output speed
    load_friction: float = 10.0  # coefficient on |tau_m|
    output_inertia: float = 0.0024  # kg m^2, reflected at the output
    max_speed: float = 60.0  # rad/s
    bandwidth_hz: float = 17.0
    # Peak current is not a published figure; 10 A reproduces the
    # 1.8 Nm positive-work peak through the friction model.
    i_max: float = 10.0
    i_continuous: float = 5.6  # ~1.0 Nm continuous; warning only
    stiction_fraction: float = 0.28  # worst-case zero-speed torque error
    stiction_speed: float = 0.05  # rad/s band where stiction applies
    winding_resistance: float = 0.1  # ohm; electrical power metric only

    def __post_init__(self):
        for name in (
            "k_t",
            "gear_ratio",
            "coulomb",
            "damping",
            "load_friction",
            "output_inertia",
            "max_speed",
            "bandwidth_hz",
            "i_max",
            "i_continuous",
        ):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        peak = (
            self.gear_ratio * self.k_t * self.i_max
            - self.coulomb
            - self.load_friction * self.k_t * self.i_max
        )
        if not (1.7 <= peak <= 1.9):
            raise ValueError(f"parameters give implausible peak torque {peak:.3f} Nm")


@dataclass
class ActuatorState:
    i_filtered: float = 0.0  # A
    omega: float = 0.0  # rad/s at the output shaft


def motor_torque(i: float, p: ActuatorParams) -> float:
    """Torque at the gearbox input."""
    return p.k_t * i


def _soft_sign(omega: float, p: ActuatorParams) -> float:
    """sgn(omega), linearly regularized inside the stiction band.

    Keeps the plant and the inverted model consistent and free of a
    torque discontinuity at the band edge; exactly sgn outside it and
    0 at zero speed.
    """
    if omega >= p.stiction_speed:
        return 1.0
    if omega <= -p.stiction_speed:
        return -1.0
    return omega / p.stiction_speed


def friction_torque(omega: float, tau_m: float, p: ActuatorParams) -> float:
    """Velocity-dependent friction at the output; zero at omega = 0."""
    s = _soft_sign(omega, p)
    return -p.coulomb * s - p.damping * omega - p.load_friction * s * abs(tau_m)


def output_torque(i: float, omega: float, p: ActuatorParams) -> float:
    """Net output-shaft torque through the reduction and friction."""
    tau_m = motor_torque(i, p)
    return p.gear_ratio * tau_m + friction_torque(omega, tau_m, p)


def current_for_torque(tau_des: float, omega: float, p: ActuatorParams) -> tuple[float, bool]:
    """Invert the friction model: current achieving ``tau_des`` at ``omega``.

    Piecewise-linear in sgn(omega) and sgn(i); the result is clamped to
    +-i_max and the second return value flags saturation.
    """
    s = _soft_sign(omega, p)
    rhs = tau_des + p.coulomb * s + p.damping * omega
    if rhs >= 0.0:
        i = rhs / ((p.gear_ratio - s * p.load_friction) * p.k_t)
    else:
        i = rhs / ((p.gear_ratio + s * p.load_friction) * p.k_t)
    if i > p.i_max:
        return p.i_max, True
    if i < -p.i_max:
        return -p.i_max, True
    return i, False


def current_lag_step(i_cmd: float, state: ActuatorState, dt: float, p: ActuatorParams) -> ActuatorState:
    """One step of the single-pole current lag modeling torque bandwidth."""
    if not 0.0 < dt <= 0.01:
        raise ValueError("dt must be in (0, 0.01] s")
    i_cmd = min(p.i_max, max(-p.i_max, i_cmd))
    alpha = 1.0 - math.exp(-2.0 * math.pi * p.bandwidth_hz * dt)
    return ActuatorState(
        i_filtered=state.i_filtered + alpha * (i_cmd - state.i_filtered),
        omega=state.omega,
    )


def dyno_torque_surface(speeds, currents, p: ActuatorParams) -> list[tuple[float, float, float]]:
    """Grid evaluation of the output torque, (speed, current, torque) rows."""
    if len(speeds) == 0 or len(currents) == 0:
        raise ValueError("speeds and currents must be non-empty")
    return [
        (float(w), float(i), output_torque(float(i), float(w), p))
        for w in speeds
        for i in currents
    ]


def frequency_response(freqs, p: ActuatorParams, dt: float = 1e-4) -> list[tuple[float, float]]:
    """Simulated gain of the current lag under a 0-5 A sinusoidal command.

    Per frequency, runs the lag to steady state and reports the output
    oscillation amplitude relative to the input amplitude.
    """
    rows = []
    for f in freqs:
        f = float(f)
        if not 0.0 < f <= 40.0:
            raise ValueError("frequencies must lie in (0, 40] Hz")
        period = 1.0 / f
        t_settle = max(10.0 * period, 0.5)
        n_settle = int(round(t_settle / dt))
        n_measure = int(round(3.0 * period / dt))
        state = ActuatorState()
        lo, hi = math.inf, -math.inf
        t = 0.0
        for k in range(n_settle + n_measure):
            i_cmd = 2.5 + 2.5 * math.sin(2.0 * math.pi * f * t)
            state = current_lag_step(i_cmd, state, dt, p)
            t += dt
            if k >= n_settle:
                lo = min(lo, state.i_filtered)
                hi = max(hi, state.i_filtered)
        rows.append((f, (hi - lo) / 2.0 / 2.5))
    return rows


# --- vectorized hot-loop helpers -------------------------------------------


def _soft_sign_vec(omega: np.ndarray, p: ActuatorParams) -> np.ndarray:
    return np.clip(omega / p.stiction_speed, -1.0, 1.0)


def output_torque_vec(i: np.ndarray, omega: np.ndarray, p: ActuatorParams) -> np.ndarray:
    tau_m = p.k_t * i
    s = _soft_sign_vec(omega, p)
    return p.gear_ratio * tau_m - p.coulomb * s - p.damping * omega - p.load_friction * s * np.abs(tau_m)


def current_for_torque_vec(tau_des: np.ndarray, omega: np.ndarray, p: ActuatorParams) -> tuple[np.ndarray, np.ndarray]:
    s = _soft_sign_vec(omega, p)
    rhs = tau_des + p.coulomb * s + p.damping * omega
    denom = np.where(rhs >= 0.0, p.gear_ratio - s * p.load_friction, p.gear_ratio + s * p.load_friction)
    i = rhs / (denom * p.k_t)
    saturated = np.abs(i) > p.i_max
    return np.clip(i, -p.i_max, p.i_max), saturated


def current_lag_step_vec(i_cmd: np.ndarray, i_filtered: np.ndarray, dt: float, p: ActuatorParams) -> np.ndarray:
    alpha = 1.0 - math.exp(-2.0 * math.pi * p.bandwidth_hz * dt)
    return i_filtered + alpha * (np.clip(i_cmd, -p.i_max, p.i_max) - i_filtered)
