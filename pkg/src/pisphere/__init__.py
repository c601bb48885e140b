"""Desk-scale lab for an intrinsically motivated spherical robot.

Subpackages: networks (controller/predictor pair and the predictive
information objective), arena and simulator (the 2-D table world),
experiment (protocol, calibration, behavior metrics), stats (nonparametric
analysis), logs (session persistence), gateway and server (CLI and live
session service).
"""

__version__ = "0.1.0"

from .arena import ArenaSpec, default_arena
from .networks import (
    LearningConfig,
    MotorVector,
    NetworkPair,
    SensorVector,
    pi_objective,
    restore,
    snapshot,
    update_step,
)
from .simulator import HandWall, Nudge, RobotState, SimConfig

__all__ = [
    "ArenaSpec",
    "default_arena",
    "LearningConfig",
    "MotorVector",
    "NetworkPair",
    "SensorVector",
    "pi_objective",
    "restore",
    "snapshot",
    "update_step",
    "HandWall",
    "Nudge",
    "RobotState",
    "SimConfig",
    "__version__",
]
