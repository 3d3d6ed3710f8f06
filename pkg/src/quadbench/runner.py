"""Glue between config, the reference trot controller, and the simulator."""

from __future__ import annotations

import numpy as np
from dataclasses import replace

from . import bench
from .bench import ScrambleCourse
from .config import RunConfig, TOOL_VERSION
from .control import ControlMode
from .gait import GaitParams, VelocityCommand, controller_step
from .logs import TrialLog
from .sim import Terrain, run_episode, standing_state


def make_trot_controller(cmd: VelocityCommand, gp: GaitParams, geom, ramp_time: float = 0.5):
    """Reference trot: FTG targets tracked with task-space impedance.

    The commanded velocity ramps in over ``ramp_time`` so the trial
    starts from rest without a step input.
    """

    moving = cmd.v_x != 0.0 or cmd.v_y != 0.0 or cmd.omega_z != 0.0
    # zero command means stand: keep all four feet planted
    params = gp if moving else replace(gp, step_height=0.0)

    def controller(t, state):
        scale = 1.0 if ramp_time <= 0 else min(1.0, t / ramp_time)
        scaled = VelocityCommand(cmd.v_x * scale, cmd.v_y * scale, cmd.omega_z * scale)
        return ControlMode.TASK_SPACE_IMPEDANCE, controller_step(t, scaled, params, geom)

    return controller


def scramble_course(config: RunConfig) -> ScrambleCourse:
    h = config.run.scramble_obstacle_height
    default = ScrambleCourse()
    return ScrambleCourse(
        finish_x=default.finish_x,
        obstacles=tuple((x0, x1, y0, y1, h) for (x0, x1, y0, y1, _h) in default.obstacles),
    )


def terrain_for_task(config: RunConfig, task: str) -> Terrain:
    t = config.terrain
    boxes = tuple(t.boxes)
    if task == "scramble":
        boxes = boxes + scramble_course(config).obstacles
    return Terrain(
        ground_height=t.ground_height,
        boxes=boxes,
        friction=t.friction,
        stiffness=t.stiffness,
        damping=t.damping,
    )


def run_trial(
    config: RunConfig,
    task: str,
    seed: int,
    gait: GaitParams | None = None,
    duration: float | None = None,
    stop_early: bool = False,
) -> TrialLog:
    """One seeded benchmark episode; outcome is set from the task scoring."""
    gp = gait if gait is not None else config.gait
    geom = config.geometry
    terrain = terrain_for_task(config, task)
    if duration is None:
        duration = (
            config.run.sprint_duration if task == "sprint" else config.run.scramble_duration
        )
    cmd = VelocityCommand(v_x=config.run.command_speed)
    controller = make_trot_controller(cmd, gp, geom, ramp_time=config.run.ramp_time)
    init = standing_state(geom, gp.stand_height, terrain)

    finish = bench.SPRINT_DISTANCE if task == "sprint" else scramble_course(config).finish_x
    stop = None
    if stop_early:
        def stop(s):
            # margin keeps at least one logged tick past the line for interpolation
            if s.base_pos[0] - init.base_pos[0] >= finish + 0.05:
                return True
            # rolled or pitched past 90 degrees: unrecoverable, cut the episode
            w, x, y, z = s.base_quat
            return 1.0 - 2.0 * (x * x + y * y) < 0.0

    meta = {
        "task": task,
        "config_hash": config.config_hash,
        "tool_version": TOOL_VERSION,
        "controller": "reference-trot",
    }
    log = run_episode(
        controller,
        terrain,
        duration,
        seed,
        geom,
        config.actuator,
        config.gains,
        init,
        meta=meta,
        stop_condition=stop,
    )
    _finalize_outcome(log, config, task)
    return log


def _finalize_outcome(log: TrialLog, config: RunConfig, task: str) -> None:
    if log.outcome[0] == "dnf":
        return
    try:
        if task == "sprint":
            score = bench.sprint_score(log)
            displacement = log.base_pos[:, 0] - log.base_pos[0, 0]
            t_finish = bench.crossing_time(log.t, displacement, bench.SPRINT_DISTANCE)
        else:
            course = scramble_course(config)
            t_finish = bench.scramble_score(log, course)
        log.outcome = ("completed", t_finish)
    except bench.Dnf as exc:
        log.outcome = ("dnf", str(exc))


def score_trial(log: TrialLog, config: RunConfig, task: str) -> float:
    if task == "sprint":
        return bench.sprint_score(log)
    return bench.scramble_score(log, scramble_course(config))
