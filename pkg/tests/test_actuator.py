import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadbench.actuator import (
    ActuatorParams,
    ActuatorState,
    current_for_torque,
    current_for_torque_vec,
    current_lag_step,
    current_lag_step_vec,
    dyno_torque_surface,
    frequency_response,
    friction_torque,
    motor_torque,
    output_torque,
    output_torque_vec,
)

P = ActuatorParams()


def test_motor_torque_is_linear_in_current():
    assert motor_torque(1.0, P) == pytest.approx(0.0069)
    assert motor_torque(-3.0, P) == pytest.approx(-0.0207)


def test_friction_zero_at_zero_speed():
    assert friction_torque(0.0, 0.5, P) == 0.0


def test_friction_at_ten_rad_s():
    # coulomb + viscous + load-dependent drag, all opposing motion
    tau_m = motor_torque(10.0, P)
    expected = -(0.021 + 0.0045 * 10.0 + 10.0 * abs(tau_m))
    assert friction_torque(10.0, tau_m, P) == pytest.approx(expected)


@given(omega=st.floats(0.1, 60.0), i=st.floats(-10.0, 10.0))
@settings(max_examples=100, deadline=None)
def test_friction_is_odd_in_speed(omega, i):
    tau_m = motor_torque(i, P)
    assert friction_torque(-omega, tau_m, P) == pytest.approx(
        -friction_torque(omega, tau_m, P), rel=1e-12
    )


def test_output_torque_positive_work_peak():
    # peak torque while doing positive work at full current, just above
    # the stiction band where the full kinetic friction model applies
    tau = output_torque(P.i_max, P.stiction_speed, P)
    assert 1.7 <= tau <= 1.9


def test_output_torque_negative_work_peak():
    # braking: friction and motor torque act together
    tau = output_torque(-P.i_max, 10.0, P)
    assert 3.1 <= abs(tau) <= 3.3


def test_efficiency_at_rated_point():
    # mechanical power out over ideal gearmotor power in, i = 10 A, w = 10 rad/s
    tau_out = output_torque(10.0, 10.0, P)
    tau_ideal = P.gear_ratio * motor_torque(10.0, P)
    eff = tau_out / tau_ideal
    assert eff == pytest.approx(0.696, abs=0.005)
    assert 0.68 <= eff <= 0.72


def test_inversion_round_trip_scalar():
    for tau_des in (-1.5, -0.3, 0.0, 0.2, 1.4):
        for omega in (-30.0, -5.0, -1.0, 1.0, 5.0, 30.0):
            i, sat = current_for_torque(tau_des, omega, P)
            if sat:
                continue
            assert output_torque(i, omega, P) == pytest.approx(tau_des, abs=1e-9)


def test_inversion_round_trip_grid():
    taus = np.linspace(-1.5, 1.5, 50)
    omegas = np.concatenate([np.linspace(-60, -1, 25), np.linspace(1, 60, 25)])
    worst = 0.0
    for w in omegas:
        i, sat = current_for_torque_vec(taus, np.full_like(taus, w), P)
        achieved = output_torque_vec(i, np.full_like(taus, w), P)
        ok = ~sat
        err = np.abs(achieved[ok] - taus[ok]) / np.maximum(np.abs(taus[ok]), 1e-2)
        worst = max(worst, float(err.max()))
    assert worst <= 0.01


def test_inversion_saturates_at_current_limit():
    i, sat = current_for_torque(5.0, 1.0, P)
    assert sat and i == P.i_max
    i, sat = current_for_torque(-5.0, -1.0, P)
    assert sat and i == -P.i_max


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(0)
    taus = rng.uniform(-2, 2, 64)
    omegas = rng.uniform(-60, 60, 64)
    iv, sv = current_for_torque_vec(taus, omegas, P)
    for k in range(64):
        i, s = current_for_torque(taus[k], omegas[k], P)
        assert iv[k] == pytest.approx(i, abs=1e-12)
        assert sv[k] == s
    currents = rng.uniform(-10, 10, 64)
    tv = output_torque_vec(currents, omegas, P)
    for k in range(64):
        assert tv[k] == pytest.approx(output_torque(currents[k], omegas[k], P), abs=1e-12)


def test_current_lag_step_converges_to_command():
    state = ActuatorState()
    for _ in range(1000):
        state = current_lag_step(4.0, state, 1e-3, P)
    assert state.i_filtered == pytest.approx(4.0, abs=1e-6)


def test_current_lag_single_step_fraction():
    state = current_lag_step(1.0, ActuatorState(), 1e-3, P)
    alpha = 1.0 - math.exp(-2.0 * math.pi * P.bandwidth_hz * 1e-3)
    assert state.i_filtered == pytest.approx(alpha)


def test_current_lag_clamps_command():
    state = current_lag_step(100.0, ActuatorState(), 1e-3, P)
    assert state.i_filtered <= P.i_max


def test_current_lag_rejects_bad_dt():
    with pytest.raises(ValueError):
        current_lag_step(1.0, ActuatorState(), 0.0, P)
    with pytest.raises(ValueError):
        current_lag_step(1.0, ActuatorState(), 0.5, P)


def test_lag_vec_matches_scalar():
    out = current_lag_step_vec(np.array([2.0, -3.0]), np.array([0.5, 0.1]), 1e-3, P)
    for k, (cmd, i0) in enumerate([(2.0, 0.5), (-3.0, 0.1)]):
        s = current_lag_step(cmd, ActuatorState(i_filtered=i0), 1e-3, P)
        assert out[k] == pytest.approx(s.i_filtered)


def test_frequency_response_near_unity_at_low_frequency():
    rows = frequency_response([0.5], P)
    assert rows[0][1] == pytest.approx(1.0, abs=0.01)


def test_frequency_response_half_power_at_bandwidth():
    rows = frequency_response([17.0], P)
    assert rows[0][1] == pytest.approx(0.707, abs=0.02)


def test_frequency_response_monotone_nonincreasing():
    freqs = np.linspace(0.5, 40.0, 20)
    gains = [g for _, g in frequency_response(freqs, P)]
    assert all(g1 >= g2 - 1e-6 for g1, g2 in zip(gains, gains[1:]))


def test_frequency_response_rejects_out_of_range():
    with pytest.raises(ValueError):
        frequency_response([0.0], P)
    with pytest.raises(ValueError):
        frequency_response([41.0], P)


def test_dyno_surface_shape_and_asymmetry():
    speeds = [1.0, 5.0]
    currents = [-8.0, 8.0]
    rows = dyno_torque_surface(speeds, currents, P)
    assert len(rows) == 4
    by_key = {(w, i): tau for w, i, tau in rows}
    # at fixed positive speed the braking branch is stronger than the
    # driving branch by twice the speed-dependent friction
    for w in speeds:
        assert abs(by_key[(w, -8.0)]) > abs(by_key[(w, 8.0)])


def test_dyno_surface_rejects_empty_grid():
    with pytest.raises(ValueError):
        dyno_torque_surface([], [1.0], P)


def test_params_validation():
    with pytest.raises(ValueError):
        ActuatorParams(k_t=0.0)
    with pytest.raises(ValueError):
        ActuatorParams(i_max=30.0)  # implausible peak torque
