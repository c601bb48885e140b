"""Accessors for the packaged default arena, config and start snapshots."""

from __future__ import annotations

import json
from importlib import resources

from .arena import ArenaSpec, arena_from_dict
from .networks import LearningConfig, NetworkPair, restore
from .simulator import SimConfig


def _data(name: str) -> bytes:
    return resources.files("pisphere.data").joinpath(name).read_bytes()


def default_config() -> dict:
    return json.loads(_data("config.json"))


def default_arena_spec() -> ArenaSpec:
    return arena_from_dict(json.loads(_data("arena.json")))


def default_snapshot_bytes(index: int | None = None) -> bytes:
    """Packaged pre-adapted snapshot; the shipped default when index is None."""
    if index is None:
        return _data(default_config()["default_snapshot"])
    return _data(f"snapshot_{index}.pinw")


def default_factor_map() -> dict:
    return json.loads(_data("factors.json"))


def default_responses_csv_path():
    """Path to the packaged synthetic questionnaire fixture."""
    return resources.files("pisphere.data").joinpath("responses.csv")


def default_pair(index: int | None = None) -> NetworkPair:
    return restore(default_snapshot_bytes(index))


def learning_from_dict(d: dict) -> LearningConfig:
    return LearningConfig(
        eps_controller=float(d["eps_controller"]),
        eps_model=float(d["eps_model"]),
        noise_variance=float(d.get("noise_variance", 0.01)),
        weight_clip=float(d.get("weight_clip", 5.0)),
        gradient_clip=float(d.get("gradient_clip", 1.0)),
        adapting=bool(d.get("adapting", True)),
    )


def sim_from_dict(d: dict) -> SimConfig:
    known = {f: d[f] for f in d if f in SimConfig.__dataclass_fields__}
    return SimConfig(**known)


def default_learning() -> LearningConfig:
    """Calibrated adaptation-condition learning config."""
    return learning_from_dict(default_config()["learning"])


def default_sim() -> SimConfig:
    return sim_from_dict(default_config()["sim"])
