import math

import numpy as np
import pytest

from quadbench.actuator import ActuatorParams
from quadbench.bench import (
    Dnf,
    InsufficientDisplacement,
    NotStartedAtRest,
    ScrambleCourse,
    SPRINT_DISTANCE,
    aggregate,
    cost_of_transport,
    crossing_time,
    electrical_power,
    entry_roundtrip,
    export_leaderboard,
    orientation_error,
    power_trace,
    scramble_score,
    sort_leaderboard,
    sprint_score,
    trial_metrics,
    validate_leaderboard_entry,
)
from quadbench.logs import empty_log, truncate_log

ACT = ActuatorParams()


def synthetic_log(speed, duration, dt=0.01, task="sprint", mass=2.1):
    """Straight-line constant-speed run that starts from rest at t=0."""
    n = int(round(duration / dt))
    log = empty_log(n, {"task": task, "body_mass": mass})
    t = np.arange(n) * dt
    log.t[:] = t
    log.base_pos[:, 0] = speed * t
    log.base_vel[1:, 0] = speed  # first tick at rest
    log.base_quat[:, 0] = 1.0
    log.outcome = ("completed", None)
    return log


def test_crossing_time_interpolates_between_ticks():
    t = np.array([0.0, 1.0, 2.0])
    x = np.array([0.0, 4.0, 8.0])
    assert crossing_time(t, x, 6.0) == pytest.approx(1.5)


def test_crossing_time_exact_tick_is_exact():
    t = np.array([0.0, 1.0, 2.0])
    x = np.array([0.0, 5.0, 10.0])
    assert crossing_time(t, x, 5.0) == 1.0


def test_crossing_time_dnf():
    with pytest.raises(Dnf):
        crossing_time(np.array([0.0, 1.0]), np.array([0.0, 1.0]), 5.0)


def test_sprint_score_is_distance_over_time():
    log = synthetic_log(0.5, 12.0)
    assert sprint_score(log) == pytest.approx(0.5, abs=1e-12)


def test_sprint_score_oracle_matches_published_mean():
    # crossing 5 m at exactly 5/0.66 s scores 0.66
    log = synthetic_log(0.66, 9.0)
    assert sprint_score(log) == pytest.approx(0.66, abs=1e-9)
    t_cross = SPRINT_DISTANCE / 0.66
    assert SPRINT_DISTANCE / t_cross == pytest.approx(0.66, abs=1e-12)


def test_sprint_score_requires_rest_start():
    log = synthetic_log(0.5, 12.0)
    log.base_vel[0, 0] = 0.3
    with pytest.raises(NotStartedAtRest):
        sprint_score(log)


def test_sprint_score_rejects_wrong_task():
    log = synthetic_log(0.5, 12.0, task="scramble")
    with pytest.raises(ValueError):
        sprint_score(log)


def test_sprint_dnf_outcome_raises():
    log = synthetic_log(0.1, 5.0)
    log.outcome = ("dnf", "fell over")
    with pytest.raises(Dnf):
        sprint_score(log)


def test_scramble_score_oracle_matches_published_mean():
    # finishing the course at exactly 34.6 s scores 34.6
    speed = 5.0 / 34.6
    log = synthetic_log(speed, 40.0, task="scramble")
    assert scramble_score(log, ScrambleCourse()) == pytest.approx(34.6, abs=1e-9)


def test_scramble_default_course_layout():
    course = ScrambleCourse()
    assert course.finish_x == 5.0
    assert len(course.obstacles) == 2
    for (x0, x1, y0, y1, h) in course.obstacles:
        assert x0 < x1 and y0 < y1 and h == pytest.approx(0.10)


def test_electrical_power_formula():
    # winding loss + back-EMF power at the motor shaft
    p = electrical_power([2.0], [1.0], ACT)
    assert p == pytest.approx(2.0**2 * 0.1 + 0.0069 * 2.0 * 36.0 * 1.0)


def test_power_trace_sums_motors():
    log = synthetic_log(0.5, 1.0)
    log.power[:, :] = 0.5
    assert np.allclose(power_trace(log), 6.0)


def test_cost_of_transport_hand_value():
    log = synthetic_log(0.5, 10.0)
    log.power[:, :] = 1.0  # 12 W total, flat
    d = log.base_pos[-1, 0] - log.base_pos[0, 0]
    t_span = log.t[-1] - log.t[0]
    expected = 12.0 * t_span / (2.1 * 9.81 * d)
    assert cost_of_transport(log) == pytest.approx(expected, rel=1e-9)


def test_cost_of_transport_ignores_regeneration():
    log = synthetic_log(0.5, 10.0)
    log.power[:, :] = -1.0  # pure regeneration: no positive energy spent
    assert cost_of_transport(log) == pytest.approx(0.0)


def test_cost_of_transport_needs_displacement():
    log = synthetic_log(0.001, 10.0)
    with pytest.raises(InsufficientDisplacement):
        cost_of_transport(log)


def test_orientation_error_zero_when_level():
    log = synthetic_log(0.5, 1.0)
    assert orientation_error(log) == pytest.approx(0.0)


def test_orientation_error_constant_tilt():
    log = synthetic_log(0.5, 1.0)
    ang = 0.2
    log.base_quat[:, 0] = math.cos(ang / 2)
    log.base_quat[:, 1] = math.sin(ang / 2)
    assert orientation_error(log) == pytest.approx(ang, abs=1e-9)


def test_trial_metrics_keys():
    m = trial_metrics(synthetic_log(0.5, 10.0))
    assert set(m) == {"mean_power_w", "cost_of_transport", "rms_orientation_error_rad"}


def test_aggregate_hand_statistics():
    r = aggregate("sprint", [0.63, 0.66, 0.69])
    assert r.mean == pytest.approx(0.66)
    assert r.std == pytest.approx(0.03)
    assert r.iqr == pytest.approx(0.03)
    assert not r.single_trial_std_undefined


def test_aggregate_single_trial_flags_std():
    r = aggregate("sprint", [0.5])
    assert r.std == 0.0
    assert r.single_trial_std_undefined


def test_aggregate_dnfs_reported_separately():
    r = aggregate("scramble", [30.0, 40.0], dnf_reasons=["fell", "timeout"])
    assert r.mean == pytest.approx(35.0)
    assert r.dnf_reasons == ["fell", "timeout"]


def test_aggregate_all_dnf():
    r = aggregate("sprint", [], dnf_reasons=["fell"])
    assert math.isnan(r.mean)
    assert len(r.dnf_reasons) == 1


def test_aggregate_requires_trials():
    with pytest.raises(ValueError):
        aggregate("sprint", [])


def test_leaderboard_roundtrip_and_sort():
    a = export_leaderboard(aggregate("sprint", [0.5]), "trot", "abc")
    b = export_leaderboard(aggregate("sprint", [0.7]), "trot", "def")
    assert entry_roundtrip(a) == a
    assert sort_leaderboard([a, b])[0]["mean"] == pytest.approx(0.7)
    slow = export_leaderboard(aggregate("scramble", [40.0]), "trot", "g")
    fast = export_leaderboard(aggregate("scramble", [30.0]), "trot", "h")
    assert sort_leaderboard([slow, fast])[0]["mean"] == pytest.approx(30.0)


def test_leaderboard_validation_rejects_partial():
    with pytest.raises(ValueError):
        validate_leaderboard_entry({"task": "sprint"})
