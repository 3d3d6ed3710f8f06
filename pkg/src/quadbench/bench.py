"""Benchmark scoring and offline metrics.

Two tasks: a five-meter sprint scored as average speed (5 m divided by
the crossing time), and an obstacle scramble scored as time to cross the
finish line.  Offline metrics (electrical power, cost of transport,
orientation error) are computed from the stored trial log alone, never
by re-simulating.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .actuator import ActuatorParams
from .logs import TrialLog

SPRINT_DISTANCE = 5.0  # m
GRAVITY = 9.81
REST_SPEED_TOLERANCE = 1e-3  # m/s


class Dnf(RuntimeError):
    """Trial never reached the finish condition."""


class NotStartedAtRest(ValueError):
    """Trial log begins with nonzero velocity."""


class InsufficientDisplacement(ValueError):
    """Net displacement too small for a meaningful cost of transport."""


@dataclass(frozen=True)
class ScrambleCourse:
    """Obstacle course: boxes spanning the course width, finish past the last.

    Dimensions are plumbing defaults; the physical course layout is not
    published in full.
    """

    finish_x: float = 5.0
    obstacles: tuple = (
        (1.4, 1.6, -1.0, 1.0, 0.10),
        (2.9, 3.1, -1.0, 1.0, 0.10),
    )


@dataclass
class BenchmarkResult:
    task: str
    scores: list[float]
    dnf_reasons: list[str]
    mean: float
    std: float
    iqr: float
    single_trial_std_undefined: bool = False
    metrics: list[dict] = field(default_factory=list)


def _assert_at_rest(log: TrialLog) -> None:
    v0 = float(np.linalg.norm(log.base_vel[0]))
    if v0 > REST_SPEED_TOLERANCE:
        raise NotStartedAtRest(f"initial speed {v0:.4f} m/s exceeds {REST_SPEED_TOLERANCE} m/s")


def crossing_time(t: np.ndarray, x: np.ndarray, threshold: float) -> float:
    """First time x reaches threshold, linearly interpolated between ticks."""
    above = x >= threshold
    if not np.any(above):
        raise Dnf(f"never reached {threshold}")
    k = int(np.argmax(above))
    if k == 0 or x[k] == threshold:
        return float(t[k])
    x0, x1 = x[k - 1], x[k]
    return float(t[k - 1] + (threshold - x0) / (x1 - x0) * (t[k] - t[k - 1]))


def sprint_score(log: TrialLog) -> float:
    """Average speed over the five-meter course, m/s."""
    if log.meta.get("task") not in (None, "sprint"):
        raise ValueError(f"log is for task {log.meta.get('task')!r}, not sprint")
    _assert_at_rest(log)
    if log.outcome[0] == "dnf":
        raise Dnf(log.outcome[1] or "episode did not finish")
    displacement = log.base_pos[:, 0] - log.base_pos[0, 0]
    t_cross = crossing_time(log.t, displacement, SPRINT_DISTANCE)
    return SPRINT_DISTANCE / t_cross


def scramble_score(log: TrialLog, course: ScrambleCourse = ScrambleCourse()) -> float:
    """Time to cross the course finish line, s."""
    if log.meta.get("task") not in (None, "scramble"):
        raise ValueError(f"log is for task {log.meta.get('task')!r}, not scramble")
    _assert_at_rest(log)
    if log.outcome[0] == "dnf":
        raise Dnf(log.outcome[1] or "episode did not finish")
    return crossing_time(log.t, log.base_pos[:, 0], course.finish_x)


def electrical_power(currents, output_speeds, act: ActuatorParams) -> float:
    """Total motor electrical power, W.

    Winding loss plus back-EMF power at the motor shaft (gear_ratio
    times the output speed).  Regenerative (negative) values are kept.
    """
    i = np.asarray(currents, float)
    w = np.asarray(output_speeds, float)
    return float(np.sum(i * i * act.winding_resistance + act.k_t * i * act.gear_ratio * w))


def power_trace(log: TrialLog) -> np.ndarray:
    """Per-tick total electrical power from the logged per-motor values."""
    return log.power.sum(axis=1)


def cost_of_transport(log: TrialLog) -> float:
    """Positive electrical energy per unit weight-distance, dimensionless."""
    disp = log.base_pos[-1, :2] - log.base_pos[0, :2]
    d = float(np.linalg.norm(disp))
    if d <= 0.1:
        raise InsufficientDisplacement(f"net displacement {d:.3f} m below 0.1 m")
    p = np.maximum(power_trace(log), 0.0)
    energy = float(np.trapezoid(p, log.t))
    mass = float(log.meta["body_mass"])
    return energy / (mass * GRAVITY * d)


def orientation_error(log: TrialLog) -> float:
    """RMS angle between the body z-axis and world vertical, rad."""
    if len(log) == 0:
        raise ValueError("empty log")
    qw, qx, qy, qz = log.base_quat.T
    # third diagonal entry of the rotation matrix: cos(tilt)
    cos_tilt = np.clip(1.0 - 2.0 * (qx * qx + qy * qy), -1.0, 1.0)
    ang = np.arccos(cos_tilt)
    return float(np.sqrt(np.mean(ang * ang)))


def trial_metrics(log: TrialLog) -> dict:
    """Offline metrics for one trial; CoT is None below the displacement floor."""
    try:
        cot = cost_of_transport(log)
    except InsufficientDisplacement:
        cot = None
    return {
        "mean_power_w": float(np.mean(power_trace(log))),
        "cost_of_transport": cot,
        "rms_orientation_error_rad": orientation_error(log),
    }


def aggregate(task: str, scores, dnf_reasons=(), metrics=()) -> BenchmarkResult:
    """Statistics over completed trials; DNFs are reported separately."""
    scores = [float(s) for s in scores]
    if not scores and not dnf_reasons:
        raise ValueError("at least one trial required")
    if scores:
        mean = float(np.mean(scores))
        single = len(scores) == 1
        std = 0.0 if single else float(np.std(scores, ddof=1))
        q1, q3 = np.percentile(scores, [25, 75], method="linear")
        iqr = float(q3 - q1)
    else:
        mean, std, iqr, single = math.nan, math.nan, math.nan, False
    return BenchmarkResult(
        task=task,
        scores=scores,
        dnf_reasons=list(dnf_reasons),
        mean=mean,
        std=std,
        iqr=iqr,
        single_trial_std_undefined=single,
        metrics=list(metrics),
    )


# --- leaderboard export -----------------------------------------------------

_REQUIRED_ENTRY_KEYS = ("task", "controller", "config_hash", "scores", "mean", "std", "iqr")


def export_leaderboard(result: BenchmarkResult, controller: str, config_hash: str) -> dict:
    return {
        "task": result.task,
        "controller": controller,
        "config_hash": config_hash,
        "scores": result.scores,
        "dnf_count": len(result.dnf_reasons),
        "mean": result.mean,
        "std": result.std,
        "iqr": result.iqr,
        "metrics": result.metrics,
    }


def validate_leaderboard_entry(doc: dict) -> dict:
    missing = [k for k in _REQUIRED_ENTRY_KEYS if k not in doc]
    if missing:
        raise ValueError(f"leaderboard entry missing keys: {missing}")
    return doc


def sort_leaderboard(entries: list[dict]) -> list[dict]:
    """Best first: descending mean for sprint, ascending for scramble."""
    if not entries:
        return []
    task = entries[0]["task"]
    return sorted(entries, key=lambda e: e["mean"], reverse=(task == "sprint"))


def entry_roundtrip(doc: dict) -> dict:
    return validate_leaderboard_entry(json.loads(json.dumps(doc)))
