"""Run configuration: a flat YAML file mapped onto the stack's dataclasses.

Unknown keys are rejected so typos fail loudly.  The canonical form for
hashing is the fully-defaulted dict serialized as sorted compact JSON.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields

import numpy as np
import yaml

from .actuator import ActuatorParams
from .control import ImpedanceGains
from .gait import GaitParams
from .kinematics import RobotGeometry
from .sim import Terrain

CONFIG_VERSION = 1
TOOL_VERSION = "0.1.0"


class ConfigError(ValueError):
    """Malformed run configuration."""


@dataclass(frozen=True)
class RunSettings:
    command_speed: float = 0.65  # m/s forward command for both tasks
    ramp_time: float = 1.0  # s to reach the commanded speed from rest
    sprint_duration: float = 20.0  # s
    scramble_duration: float = 60.0  # s
    tune_duration: float = 12.0  # s per optimizer rollout
    scramble_obstacle_height: float = 0.10  # m
    trials: int = 5
    seed: int = 0
    output_dir: str = "out"


@dataclass(frozen=True)
class RunConfig:
    geometry: RobotGeometry
    actuator: ActuatorParams
    gains: ImpedanceGains
    gait: GaitParams
    terrain: Terrain
    run: RunSettings

    def to_dict(self) -> dict:
        def section(obj):
            out = {}
            for f in fields(obj):
                v = getattr(obj, f.name)
                if isinstance(v, np.ndarray):
                    v = v.tolist()
                elif isinstance(v, tuple):
                    v = [list(b) if isinstance(b, (tuple, list)) else b for b in v]
                out[f.name] = v
            return out

        return {
            "version": CONFIG_VERSION,
            "robot": section(self.geometry),
            "actuator": section(self.actuator),
            "gains": section(self.gains),
            "gait": section(self.gait),
            "terrain": section(self.terrain),
            "run": section(self.run),
        }

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


_SECTION_TYPES = {
    "robot": RobotGeometry,
    "actuator": ActuatorParams,
    "gains": ImpedanceGains,
    "gait": GaitParams,
    "terrain": Terrain,
    "run": RunSettings,
}

_ARRAY_FIELDS = {"kp_task", "kd_task"}
_TUPLE_FIELDS = {"phase_offsets", "boxes", "obstacles"}


def _build_section(name: str, cls, data: dict):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in section '{name}': {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _ARRAY_FIELDS:
            value = np.asarray(value, dtype=float)
        elif key in _TUPLE_FIELDS:
            value = tuple(tuple(v) if isinstance(v, (list, tuple)) else v for v in value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid section '{name}': {exc}") from exc


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = dict(data)
    version = data.pop("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version}")
    unknown = set(data) - set(_SECTION_TYPES)
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    parts = {}
    key_map = {"robot": "geometry"}
    for section, cls in _SECTION_TYPES.items():
        raw = data.get(section, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"section '{section}' must be a mapping")
        parts[key_map.get(section, section)] = _build_section(section, cls, raw)
    return RunConfig(**parts)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return config_from_dict(data or {})


def default_config() -> RunConfig:
    return config_from_dict({})


def write_config(config: RunConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=True)
