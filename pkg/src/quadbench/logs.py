"""Trial logs: columnar time-series trace of one benchmark episode.

Serialized as JSONL, one record per line: a meta header, one tick record
per low-level step, and a final outcome record.  Schema version 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1

TICK_FIELDS = (
    ("t", 1),
    ("base_pos", 3),
    ("base_quat", 4),
    ("base_vel", 3),
    ("base_angvel", 3),
    ("q", 12),
    ("qd", 12),
    ("currents", 12),
    ("power", 12),
    ("contact", 4),
    ("r_ref", 12),
)


class LogParseError(ValueError):
    """Malformed or truncated JSONL trial log."""


@dataclass
class TrialLog:
    meta: dict
    t: np.ndarray
    base_pos: np.ndarray
    base_quat: np.ndarray
    base_vel: np.ndarray
    base_angvel: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    currents: np.ndarray
    power: np.ndarray
    contact: np.ndarray
    r_ref: np.ndarray
    outcome: tuple = ("completed", None)  # ("completed", t_finish) | ("dnf", reason)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def completed(self) -> bool:
        return self.outcome[0] == "completed"

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            meta = dict(self.meta)
            meta["type"] = "meta"
            meta["version"] = SCHEMA_VERSION
            fh.write(json.dumps(meta, sort_keys=True) + "\n")
            n = len(self.t)
            cols = {name: getattr(self, name) for name, _ in TICK_FIELDS}
            for k in range(n):
                rec = {"type": "tick", "t": float(cols["t"][k])}
                for name, width in TICK_FIELDS[1:]:
                    rec[name] = np.asarray(cols[name][k]).tolist()
                fh.write(json.dumps(rec) + "\n")
            status, detail = self.outcome
            out = {"type": "outcome", "status": status}
            if status == "completed":
                out["t_finish"] = detail
            else:
                out["reason"] = detail
            fh.write(json.dumps(out, sort_keys=True) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "TrialLog":
        meta = None
        rows = []
        outcome = None
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise LogParseError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
                kind = rec.get("type")
                if kind == "meta":
                    if rec.get("version") != SCHEMA_VERSION:
                        raise LogParseError(
                            f"{path}: line {lineno}: unsupported schema version {rec.get('version')}"
                        )
                    meta = {k: v for k, v in rec.items() if k not in ("type", "version")}
                elif kind == "tick":
                    try:
                        rows.append(tuple(rec[name] for name, _ in TICK_FIELDS))
                    except KeyError as exc:
                        raise LogParseError(
                            f"{path}: line {lineno}: tick missing field {exc}"
                        ) from exc
                elif kind == "outcome":
                    if rec.get("status") == "completed":
                        outcome = ("completed", rec.get("t_finish"))
                    else:
                        outcome = ("dnf", rec.get("reason"))
                else:
                    raise LogParseError(f"{path}: line {lineno}: unknown record type {kind!r}")
        if meta is None:
            raise LogParseError(f"{path}: missing meta header")
        if outcome is None:
            raise LogParseError(f"{path}: missing outcome record (truncated log?)")
        if not rows:
            raise LogParseError(f"{path}: no tick records")
        cols = {}
        for idx, (name, width) in enumerate(TICK_FIELDS):
            arr = np.array([r[idx] for r in rows], dtype=float)
            cols[name] = arr
        return cls(meta=meta, outcome=outcome, **cols)


def empty_log(n: int, meta: dict) -> TrialLog:
    """Preallocated log buffers for an episode of up to n ticks."""
    cols = {}
    for name, width in TICK_FIELDS:
        cols[name] = np.zeros(n) if width == 1 else np.zeros((n, width))
    return TrialLog(meta=dict(meta), **cols)


def truncate_log(log: TrialLog, n: int) -> TrialLog:
    for name, _ in TICK_FIELDS:
        setattr(log, name, getattr(log, name)[:n])
    return log
