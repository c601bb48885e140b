"""Session logs: line-delimited JSON persistence, CSV export, hashing.

A log is one header object, followed by per-tick row objects interleaved
with event objects, each line carrying a "type" discriminator.  The header
embeds the config, arena and start snapshot (base64) besides their hashes,
so a log is self-contained for replay.
"""

from __future__ import annotations

import base64
import csv
import hashlib
import json
from dataclasses import dataclass, field

from .networks import SENSOR_CHANNELS
from .simulator import RobotState


class LogFormatError(ValueError):
    pass


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def config_hash(config: dict) -> str:
    return sha256_hex(json.dumps(config, sort_keys=True).encode())


def state_to_dict(s: RobotState) -> dict:
    return {
        "position": list(s.position),
        "heading": s.heading,
        "speed": s.speed,
        "heading_rate": s.heading_rate,
        "prev_velocity": list(s.prev_velocity),
        "fallen": s.fallen,
    }


def state_from_dict(d: dict) -> RobotState:
    return RobotState(
        position=tuple(d["position"]),
        heading=d["heading"],
        speed=d["speed"],
        heading_rate=d["heading_rate"],
        prev_velocity=tuple(d["prev_velocity"]),
        fallen=d["fallen"],
    )


@dataclass
class SessionLog:
    header: dict
    rows: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)

    @property
    def snapshot_bytes(self) -> bytes:
        return base64.b64decode(self.header["snapshot_b64"])

    def add_row(self, t, state, sensors, motors, diag) -> None:
        self.rows.append(
            {
                "type": "row",
                "t": t,
                "state": state_to_dict(state),
                "sensors": [float(v) for v in sensors.values],
                "motors": [motors.speed_cmd, motors.heading_rate_cmd],
                "diag": {
                    "pi_value": diag.pi_value,
                    "prediction_error_sq": diag.prediction_error_sq,
                    "controller_grad_norm": diag.controller_grad_norm,
                    "model_grad_norm": diag.model_grad_norm,
                    "update_skipped": diag.update_skipped,
                },
            }
        )

    def add_event(self, kind: str, t: float, **payload) -> None:
        self.events.append({"type": kind, "t": t, **payload})

    def interleaved(self):
        """Header first, then rows and events merged in time order."""
        merged = sorted(
            self.rows + self.events,
            key=lambda o: (o["t"], 0 if o["type"] != "row" else 1),
        )
        return [self.header] + merged

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(obj, sort_keys=True) for obj in self.interleaved()) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "SessionLog":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise LogFormatError("empty log")
        header = json.loads(lines[0])
        if header.get("type") != "header":
            raise LogFormatError("first line is not a header object")
        log = cls(header=header)
        for i, ln in enumerate(lines[1:], start=2):
            try:
                obj = json.loads(ln)
            except json.JSONDecodeError as e:
                raise LogFormatError(f"line {i}: invalid JSON: {e}") from e
            kind = obj.get("type")
            if kind == "row":
                log.rows.append(obj)
            elif kind is None:
                raise LogFormatError(f"line {i}: missing type discriminator")
            else:
                log.events.append(obj)
        return log

    @classmethod
    def load(cls, path: str) -> "SessionLog":
        with open(path) as f:
            return cls.from_jsonl(f.read())

    def to_csv(self, path: str) -> None:
        """Flattened per-tick export, one row per simulation tick."""
        cols = (
            ["t", "pos_x", "pos_y", "heading", "speed", "heading_rate", "fallen"]
            + list(SENSOR_CHANNELS)
            + ["speed_cmd", "heading_rate_cmd", "pi_value", "prediction_error_sq"]
        )
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(cols)
            for r in self.rows:
                s = r["state"]
                w.writerow(
                    [r["t"], s["position"][0], s["position"][1], s["heading"], s["speed"], s["heading_rate"], s["fallen"]]
                    + r["sensors"]
                    + r["motors"]
                    + [r["diag"]["pi_value"], r["diag"]["prediction_error_sq"]]
                )
