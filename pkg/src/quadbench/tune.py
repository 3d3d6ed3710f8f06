"""Derivative-free gait parameter tuning against the benchmark objectives.

Random search and a cross-entropy method over (frequency, step_height,
stance_fraction, stand_height).  Determinism: every candidate gets its
episode seed from a spawned seed sequence indexed by evaluation number,
never by completion order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .bench import Dnf
from .config import RunConfig
from .gait import GaitParams, TargetUnreachable
from .runner import run_trial, score_trial
from .sim import NumericalDivergence

PARAM_NAMES = ("frequency", "step_height", "stance_fraction", "stand_height")

CE_POPULATION = 16
CE_ELITE_FRACTION = 0.2


@dataclass(frozen=True)
class SearchSpace:
    frequency: tuple = (0.5, 4.0)  # Hz
    step_height: tuple = (0.0, 0.08)  # m
    stance_fraction: tuple = (0.3, 0.8)
    stand_height: tuple = (0.10, 0.17)  # m, inside the default leg workspace

    def __post_init__(self):
        for name in PARAM_NAMES:
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name}: lower bound must be below upper bound")

    def bounds_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES])

    def contains(self, gp: GaitParams) -> bool:
        return all(
            getattr(self, n)[0] <= getattr(gp, n) <= getattr(self, n)[1] for n in PARAM_NAMES
        )


@dataclass
class TuneReport:
    task: str
    method: str
    seed: int
    budget_used: int
    best_params: dict
    best_score: float
    history: list[dict] = field(default_factory=list)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.__dict__, fh, indent=2, sort_keys=True)


def _gait_from_vector(x: np.ndarray, base: GaitParams) -> GaitParams:
    return replace(base, **{n: float(v) for n, v in zip(PARAM_NAMES, x)})


def worst_score(task: str, config: RunConfig) -> float:
    # DNF penalty: zero speed for sprint, full episode time for scramble
    return 0.0 if task == "sprint" else config.run.tune_duration


def evaluate(
    gp: GaitParams, task: str, seed: int, config: RunConfig, space: SearchSpace | None = None
) -> float:
    """Score of one seeded rollout; DNF and divergence map to the worst score."""
    if space is not None and not space.contains(gp):
        raise ValueError(f"gait params outside search space: {gp}")
    try:
        log = run_trial(
            config, task, seed, gait=gp, duration=config.run.tune_duration, stop_early=True
        )
        return score_trial(log, config, task)
    except (NumericalDivergence, Dnf, TargetUnreachable):
        return worst_score(task, config)


def optimize(
    space: SearchSpace,
    task: str,
    method: str,
    budget: int,
    seed: int,
    config: RunConfig,
) -> TuneReport:
    if method not in ("random-search", "cross-entropy"):
        raise ValueError(f"unknown method {method!r}")
    if budget < 1:
        raise ValueError("budget must be at least 1")

    sign = 1.0 if task == "sprint" else -1.0
    bounds = space.bounds_array()
    lo, hi = bounds[:, 0], bounds[:, 1]
    rng = np.random.default_rng(seed)
    episode_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(budget)]

    best_score = -np.inf
    best_x = None
    history = []
    used = 0

    def run_candidate(x):
        nonlocal best_score, best_x, used
        gp = _gait_from_vector(x, config.gait)
        score = evaluate(gp, task, episode_seeds[used], config, space)
        used += 1
        if sign * score > best_score:
            best_score = sign * score
            best_x = x.copy()
        return sign * score

    if method == "random-search":
        while used < budget:
            x = rng.uniform(lo, hi)
            run_candidate(x)
            history.append({"iteration": used, "best": sign * best_score})
    else:
        pop = min(CE_POPULATION, budget)
        n_elite = max(1, int(round(CE_ELITE_FRACTION * pop)))
        mean = np.clip([getattr(config.gait, n) for n in PARAM_NAMES], lo, hi)
        std = (hi - lo) / 4.0
        iteration = 0
        while used < budget:
            size = min(pop, budget - used)
            xs = np.clip(rng.normal(mean, std, size=(size, 4)), lo, hi)
            objs = np.array([run_candidate(x) for x in xs])
            elite = xs[np.argsort(objs)[::-1][: min(n_elite, size)]]
            mean = elite.mean(axis=0)
            std = np.maximum(elite.std(axis=0), 1e-4 * (hi - lo))
            iteration += 1
            history.append(
                {
                    "iteration": iteration,
                    "population_mean": float(np.mean(sign * objs)),
                    "population_best": float(np.max(sign * objs)),
                    "best": sign * best_score,
                    "mean_params": mean.tolist(),
                    "std_params": std.tolist(),
                }
            )

    return TuneReport(
        task=task,
        method=method,
        seed=seed,
        budget_used=used,
        best_params={n: float(v) for n, v in zip(PARAM_NAMES, best_x)},
        best_score=sign * best_score,
        history=history,
    )
