"""Command-line entry point: benchmarks, dyno tables, tuning, log replay.

Exit codes: 0 success, 1 all trials DNF, 2 configuration error,
3 numerical divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bench, tune
from .actuator import dyno_torque_surface, frequency_response
from .config import ConfigError, RunConfig, TOOL_VERSION, default_config, load_config
from .logs import LogParseError, TrialLog
from .runner import run_trial, scramble_course
from .sim import NumericalDivergence

EXIT_OK = 0
EXIT_ALL_DNF = 1
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3


def _load(args) -> RunConfig:
    if args.config:
        return load_config(args.config)
    return default_config()


def _output_dir(args, config: RunConfig) -> Path:
    out = args.out or os.environ.get("QUADBENCH_OUT") or config.run.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _run_benchmark(args, task: str) -> int:
    config = _load(args)
    out = _output_dir(args, config)
    trials = args.trials if args.trials is not None else config.run.trials
    seed = args.seed if args.seed is not None else config.run.seed

    scores, dnf_reasons, metrics, rows = [], [], [], []
    for trial in range(trials):
        trial_seed = seed + trial
        try:
            log = run_trial(config, task, trial_seed)
        except NumericalDivergence as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DIVERGENCE
        log_path = out / f"trial_{task}_{trial:03d}_seed{trial_seed}.jsonl"
        log.to_jsonl(log_path)
        m = bench.trial_metrics(log)
        if log.completed:
            score = bench.sprint_score(log) if task == "sprint" else bench.scramble_score(
                log, scramble_course(config)
            )
            scores.append(score)
            metrics.append(m)
            status = f"score={score:.4f}"
        else:
            dnf_reasons.append(log.outcome[1])
            status = f"DNF ({log.outcome[1]})"
        rows.append(
            {
                "task": task,
                "trial": trial,
                "seed": trial_seed,
                "outcome": log.outcome[0],
                "score": f"{score:.6f}" if log.completed else "",
                "mean_power_w": f"{m['mean_power_w']:.4f}",
                "cost_of_transport": ""
                if m["cost_of_transport"] is None
                else f"{m['cost_of_transport']:.4f}",
                "rms_orientation_error_rad": f"{m['rms_orientation_error_rad']:.6f}",
                "config_hash": config.config_hash,
                "tool_version": TOOL_VERSION,
                "log_file": log_path.name,
            }
        )
        print(f"trial {trial} (seed {trial_seed}): {status}")

    _write_summary_csv(out / f"summary_{task}.csv", rows)
    result = bench.aggregate(task, scores, dnf_reasons, metrics)
    entry = bench.export_leaderboard(result, "reference-trot", config.config_hash)
    entry["tool_version"] = TOOL_VERSION
    with open(out / f"leaderboard_{task}.json", "w") as fh:
        json.dump(entry, fh, indent=2, sort_keys=True)

    if scores:
        print(
            f"{task}: {len(scores)}/{trials} completed, "
            f"mean={result.mean:.4f} std={result.std:.4f} iqr={result.iqr:.4f}"
        )
        return EXIT_OK
    print(f"{task}: all {trials} trials DNF:", file=sys.stderr)
    for reason in dnf_reasons:
        print(f"  - {reason}", file=sys.stderr)
    return EXIT_ALL_DNF


def _write_summary_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _cmd_dyno(args) -> int:
    config = _load(args)
    out = _output_dir(args, config)
    p = config.actuator

    speeds = np.linspace(0.1, 10.0, 25)
    currents = np.linspace(-p.i_max, p.i_max, 41)
    surface = dyno_torque_surface(speeds, currents, p)
    with open(out / "dyno_surface.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["speed_rad_s", "current_a", "torque_nm"])
        writer.writerows(surface)

    freqs = np.linspace(0.5, 40.0, 40)
    response = frequency_response(freqs, p)
    with open(out / "dyno_bode.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_hz", "gain"])
        writer.writerows(response)

    print(f"wrote {out / 'dyno_surface.csv'} and {out / 'dyno_bode.csv'}")
    return EXIT_OK


def _cmd_tune(args) -> int:
    config = _load(args)
    out = _output_dir(args, config)
    seed = args.seed if args.seed is not None else config.run.seed
    space = tune.SearchSpace()
    report = tune.optimize(space, args.task, args.method, args.budget, seed, config)
    report_path = out / f"tune_{args.task}.json"
    report.to_json(report_path)
    with open(out / f"best_gait_{args.task}.yaml", "w") as fh:
        fh.write("gait:\n")
        for k, v in report.best_params.items():
            fh.write(f"  {k}: {v}\n")
    print(
        f"tune {args.task}: best score {report.best_score:.4f} "
        f"after {report.budget_used} evaluations -> {report_path}"
    )
    return EXIT_OK


def _cmd_replay(args) -> int:
    log = TrialLog.from_jsonl(args.logfile)
    if args.config:
        config = load_config(args.config)
        if log.meta.get("config_hash") != config.config_hash:
            msg = (
                f"config hash mismatch: log has {log.meta.get('config_hash')}, "
                f"config is {config.config_hash}"
            )
            if not args.force:
                print(f"error: {msg} (use --force to override)", file=sys.stderr)
                return EXIT_CONFIG
            print(f"warning: {msg}", file=sys.stderr)

    task = log.meta.get("task", "sprint")
    try:
        score = bench.sprint_score(log) if task == "sprint" else bench.scramble_score(log)
        print(f"task: {task}")
        print(f"score: {score:.6f}")
    except bench.Dnf as exc:
        print(f"task: {task}")
        print(f"score: DNF ({exc})")
    m = bench.trial_metrics(log)
    print(f"mean_power_w: {m['mean_power_w']:.4f}")
    cot = m["cost_of_transport"]
    print(f"cost_of_transport: {'n/a' if cot is None else f'{cot:.4f}'}")
    print(f"rms_orientation_error_rad: {m['rms_orientation_error_rad']:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadbench",
        description="Desk-scale quadruped benchmarks: sprint, scramble, dyno, tune, replay.",
    )
    parser.add_argument("--config", help="YAML run configuration (defaults built in)")
    parser.add_argument("--out", help="output directory (or set QUADBENCH_OUT)")
    sub = parser.add_subparsers(dest="command", required=True)

    for task in ("sprint", "scramble"):
        sp = sub.add_parser(task, help=f"run the {task} benchmark")
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)

    sub.add_parser("dyno", help="export torque surface and frequency response tables")

    tn = sub.add_parser("tune", help="optimize gait parameters")
    tn.add_argument("--task", choices=("sprint", "scramble"), default="sprint")
    tn.add_argument("--budget", type=int, default=200)
    tn.add_argument("--seed", type=int, default=None)
    tn.add_argument("--method", choices=("random-search", "cross-entropy"), default="cross-entropy")

    rp = sub.add_parser("replay", help="recompute scores and metrics from a stored log")
    rp.add_argument("logfile")
    rp.add_argument("--force", action="store_true", help="proceed despite config hash mismatch")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("sprint", "scramble"):
            return _run_benchmark(args, args.command)
        if args.command == "dyno":
            return _cmd_dyno(args)
        if args.command == "tune":
            return _cmd_tune(args)
        return _cmd_replay(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LogParseError as exc:
        print(f"log error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalDivergence as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
