"""Experiment protocol: pre-adaptation, condition runs, calibration, metrics.

A condition run is the full closed loop sense -> controller -> command ->
physics -> adaptation at 20 Hz.  REA runs the frozen pre-adapted networks;
ADA keeps adapting them online.  A scripted interactor stands in for the
human participant in headless runs: it guards the open edge with a
hand-wall and occasionally nudges the robot.
"""

from __future__ import annotations

import base64
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import networks as nets
from .arena import ArenaSpec, arena_hash, arena_to_dict
from .logs import SessionLog, config_hash, sha256_hex
from .networks import (
    LearningConfig,
    MotorVector,
    NetworkPair,
    controller_step,
    restore,
    snapshot,
    update_step,
)
from .simulator import (
    HandWall,
    InteractionEvent,
    Nudge,
    RobotState,
    SimConfig,
    check_fall,
    motor_to_command,
    sense,
    step,
)

REA = "REA"
ADA = "ADA"

DEFAULT_DURATION_S = 600.0
PREADAPT_DURATION_S = 300.0
PIT_ESCAPE_LIMIT_S = 20.0
PIT_ESCAPE_HOLDOUT_S = 5.0
CAUGHT_SPEED_THRESHOLD = 0.05  # m/s, mean over 2 s inside the pit


# rates used for the pre-adaptation trials; the fast model rate lets the
# zero-initialized predictor bootstrap the sensorimotor loop within 5 minutes
PREADAPT_LEARNING = LearningConfig(eps_controller=0.1, eps_model=0.5, adapting=True)


class ProtocolError(RuntimeError):
    pass


class CalibrationError(ProtocolError):
    pass


@dataclass(frozen=True)
class ConditionSpec:
    mode: str  # REA or ADA
    start_snapshot: bytes
    learning: LearningConfig
    duration: float = DEFAULT_DURATION_S

    def __post_init__(self):
        if self.mode not in (REA, ADA):
            raise ValueError(f"mode must be {REA} or {ADA}")
        if self.mode == REA and self.learning.adapting:
            raise ValueError("REA requires adapting = False")
        if self.mode == ADA and not self.learning.adapting:
            raise ValueError("ADA requires adapting = True")


@dataclass(frozen=True)
class ScriptedPolicy:
    """Simulated participant: guard the open edge, nudge now and then."""

    guard_distance: float = 0.15
    wall_length: float = 0.5
    wall_duration: float = 0.4
    nudge_rate_per_s: float = 1.0 / 30.0
    nudge_magnitude: tuple[float, float] = (0.2, 1.0)


class ScriptedInteractor:
    def __init__(self, policy: ScriptedPolicy | None = None):
        self.policy = policy or ScriptedPolicy()

    def events(
        self,
        t: float,
        state: RobotState,
        arena: ArenaSpec,
        cfg: SimConfig,
        rng: np.random.Generator,
    ) -> list[InteractionEvent]:
        p = self.policy
        out: list[InteractionEvent] = []
        if rng.random() < p.nudge_rate_per_s * cfg.dt:
            angle = rng.uniform(-math.pi, math.pi)
            mag = rng.uniform(*p.nudge_magnitude)
            out.append(Nudge((mag * math.cos(angle), mag * math.sin(angle)), timestamp=t))
        x, y = state.position
        vx, vy = state.velocity()
        edge = arena.open_edge
        if edge == "bottom":
            dist, approaching = y, vy < 0
            seg_center, horiz = x, True
        elif edge == "top":
            dist, approaching = arena.depth - y, vy > 0
            seg_center, horiz = x, True
        elif edge == "left":
            dist, approaching = x, vx < 0
            seg_center, horiz = y, False
        else:
            dist, approaching = arena.width - x, vx > 0
            seg_center, horiz = y, False
        if dist < p.guard_distance and approaching:
            half = p.wall_length / 2.0
            if horiz:
                line = 0.0 if edge == "bottom" else arena.depth
                lo = min(max(seg_center - half, 0.0), arena.width - p.wall_length)
                seg = ((lo, line), (lo + p.wall_length, line))
            else:
                line = 0.0 if edge == "left" else arena.width
                lo = min(max(seg_center - half, 0.0), arena.depth - p.wall_length)
                seg = ((line, lo), (line, lo + p.wall_length))
            out.append(HandWall(seg, expiry=t + p.wall_duration, timestamp=t))
        return out


class PlaybackInteractor:
    """Re-injects the events recorded in a log, keyed by timestamp."""

    def __init__(self, events: list[dict], dt: float):
        self._by_tick: dict[int, list[InteractionEvent]] = {}
        for ev in events:
            if ev["type"] == "nudge":
                item: InteractionEvent = Nudge(tuple(ev["impulse"]), timestamp=ev["t"])
            elif ev["type"] == "hand_wall":
                item = HandWall(
                    tuple(tuple(p) for p in ev["segment"]), expiry=ev["expiry"], timestamp=ev["t"]
                )
            else:
                continue  # falls/respawns are outcomes, not inputs
            self._by_tick.setdefault(round(ev["t"] / dt), []).append(item)

    def events(self, t, state, arena, cfg, rng) -> list[InteractionEvent]:
        return self._by_tick.get(round(t / cfg.dt), [])


class NullInteractor:
    def events(self, t, state, arena, cfg, rng) -> list[InteractionEvent]:
        return []


class ConditionSession:
    """Single-writer closed-loop session; tick() advances one dt.

    Fall policy: "respawn" restarts at the arena center (headless scripted
    runs), "end" terminates the episode (live runs).
    """

    def __init__(
        self,
        spec: ConditionSpec,
        arena: ArenaSpec,
        sim_cfg: SimConfig,
        interactor,
        seed: int,
        initial_position: tuple[float, float] | None = None,
        fall_policy: str = "respawn",
        extra_header: dict | None = None,
    ):
        self.spec = spec
        self.arena = arena
        self.cfg = sim_cfg
        self.interactor = interactor
        self.fall_policy = fall_policy
        ss = np.random.SeedSequence(seed)
        sim_ss, inter_ss = ss.spawn(2)
        self.sim_rng = np.random.default_rng(sim_ss)
        self.inter_rng = np.random.default_rng(inter_ss)

        self.pair = restore(spec.start_snapshot)
        self.start_pair = self.pair
        heading = float(self.sim_rng.uniform(-math.pi, math.pi))
        pos = initial_position or (arena.width / 2.0, arena.depth / 2.0)
        self.state = RobotState.at_rest(pos, heading)
        self.x_prev = sense(self.state, arena, sim_cfg, self.sim_rng)
        self.walls: list[HandWall] = []
        self.n_ticks = round(spec.duration / sim_cfg.dt)
        self.k = 0
        self.ended_early = False

        sim_dict = {k: v for k, v in vars(sim_cfg).items()}
        learn_dict = {k: v for k, v in vars(spec.learning).items()}
        self.log = SessionLog(
            header={
                "type": "header",
                "condition": spec.mode,
                "seed": seed,
                "duration_s": spec.duration,
                "dt": sim_cfg.dt,
                "initial_position": list(pos),
                "fall_policy": fall_policy,
                "config": {"sim": sim_dict, "learning": learn_dict},
                "config_hash": config_hash({"sim": sim_dict, "learning": learn_dict}),
                "arena": arena_to_dict(arena),
                "arena_hash": arena_hash(arena),
                "snapshot_b64": base64.b64encode(spec.start_snapshot).decode(),
                "snapshot_hash": sha256_hex(spec.start_snapshot),
                **(extra_header or {}),
            }
        )

    @property
    def finished(self) -> bool:
        return self.k >= self.n_ticks or self.ended_early

    @property
    def elapsed(self) -> float:
        return self.k * self.cfg.dt

    def tick(self, extra_events: list[InteractionEvent] = ()) -> dict:
        if self.finished:
            raise ProtocolError("session already finished")
        t = self.k * self.cfg.dt
        y = controller_step(self.pair.controller, self.x_prev)
        cmd = motor_to_command(y, self.cfg)

        new_events = list(self.interactor.events(t, self.state, self.arena, self.cfg, self.inter_rng))
        new_events += list(extra_events)
        self.walls = [w for w in self.walls if w.expiry > t]
        for ev in new_events:
            if isinstance(ev, HandWall):
                self.walls.append(ev)
                self.log.add_event(
                    "hand_wall", t, segment=[list(p) for p in ev.segment], expiry=ev.expiry
                )
            else:
                self.log.add_event("nudge", t, impulse=list(ev.impulse))
        nudges = [e for e in new_events if isinstance(e, Nudge)]

        new_state = step(self.state, cmd, self.arena, nudges + self.walls, self.cfg)
        if check_fall(new_state, self.arena):
            self.log.add_event("fall", t, position=list(new_state.position))
            if self.fall_policy == "respawn":
                heading = float(self.sim_rng.uniform(-math.pi, math.pi))
                new_state = RobotState.at_rest(
                    (self.arena.width / 2.0, self.arena.depth / 2.0), heading
                )
                self.log.add_event("respawn", t, heading=heading)
            else:
                self.ended_early = True

        x_cur = sense(new_state, self.arena, self.cfg, self.sim_rng)
        self.pair, diag = update_step(self.pair, self.x_prev, x_cur, self.spec.learning)
        t_row = (self.k + 1) * self.cfg.dt
        self.log.add_row(t_row, new_state, x_cur, y, diag)
        self.state, self.x_prev = new_state, x_cur
        self.k += 1
        return self.log.rows[-1]

    def run(self) -> SessionLog:
        while not self.finished:
            self.tick()
        return self.log


def run_condition(
    spec: ConditionSpec,
    arena: ArenaSpec,
    interactor,
    seed: int,
    sim_cfg: SimConfig | None = None,
    initial_position: tuple[float, float] | None = None,
    fall_policy: str = "respawn",
    extra_header: dict | None = None,
) -> tuple[SessionLog, NetworkPair]:
    """Run one full condition; returns the log and the final networks."""
    session = ConditionSession(
        spec, arena, sim_cfg or SimConfig(), interactor, seed,
        initial_position=initial_position, fall_policy=fall_policy,
        extra_header=extra_header,
    )
    log = session.run()
    return log, session.pair


def replay_condition(log: SessionLog, arena: ArenaSpec | None = None) -> tuple[bool, str]:
    """Re-execute a log's inputs and compare states; returns (ok, message)."""
    from .arena import arena_from_dict

    hdr = log.header
    arena = arena or arena_from_dict(hdr["arena"])
    sim_cfg = SimConfig(**hdr["config"]["sim"])
    learning = LearningConfig(**hdr["config"]["learning"])
    spec = ConditionSpec(
        mode=hdr["condition"],
        start_snapshot=log.snapshot_bytes,
        learning=learning,
        duration=hdr["duration_s"],
    )
    interactor = PlaybackInteractor(log.events, sim_cfg.dt)
    relog, _ = run_condition(
        spec, arena, interactor, hdr["seed"], sim_cfg,
        initial_position=tuple(hdr["initial_position"]),
        fall_policy=hdr.get("fall_policy", "respawn"),
    )
    if len(relog.rows) != len(log.rows):
        return False, f"row count mismatch: {len(relog.rows)} vs {len(log.rows)}"
    for i, (a, b) in enumerate(zip(relog.rows, log.rows)):
        if a != b:
            return False, f"row {i} differs: {a} vs {b}"
    return True, f"replay matched {len(log.rows)} rows"


def preadapt(
    arena: ArenaSpec,
    learning: LearningConfig,
    seed: int,
    sim_cfg: SimConfig | None = None,
    duration_s: float = PREADAPT_DURATION_S,
    policy: ScriptedPolicy | None = None,
) -> list[NetworkPair]:
    """Three independent adapting trials from fresh nets; returns the final pairs."""
    if not learning.adapting:
        raise ValueError("pre-adaptation requires an adapting configuration")
    sim_cfg = sim_cfg or SimConfig()
    out = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(3)):
        init_rng = np.random.default_rng(child)
        fresh = NetworkPair.fresh(init_rng)
        run_seed = int(init_rng.integers(0, 2**63 - 1))
        spec = ConditionSpec(ADA, snapshot(fresh), learning, duration=duration_s)
        log, pair = run_condition(spec, arena, ScriptedInteractor(policy), run_seed, sim_cfg)
        skipped = sum(1 for r in log.rows if r["diag"]["update_skipped"])
        if skipped > 0.1 * len(log.rows):
            raise CalibrationError(
                f"pre-adaptation trial {i}: {skipped}/{len(log.rows)} updates skipped"
            )
        out.append(pair)
    return out


def pick_start(snapshots: list[bytes], rng: np.random.Generator) -> tuple[NetworkPair, int]:
    """Uniformly choose the starting configuration; the index goes in the header."""
    if len(snapshots) != 3:
        raise ValueError("expected exactly 3 pre-adaptation snapshots")
    idx = int(rng.integers(0, len(snapshots)))
    return restore(snapshots[idx]), idx


def assign_groups(n: int, rng: np.random.Generator) -> dict[int, str]:
    """Balanced random assignment to orders A (ADA first) and B (REA first)."""
    if n < 2:
        raise ValueError("need at least 2 participants")
    labels = ["A"] * (n // 2) + ["B"] * (n // 2)
    if n % 2:
        labels.append("A" if rng.integers(0, 2) else "B")
    perm = rng.permutation(n)
    return {int(pid): labels[i] for i, pid in enumerate(perm)}


@dataclass(frozen=True)
class BehaviorMetrics:
    pit_escape_time: float | None
    turn_bias: float
    edge_approaches: int
    coverage: float
    mean_speed: float


def _escape_time(rows, arena: ArenaSpec, dt: float) -> float | None:
    cx, cy = arena.pit.center
    R = arena.pit.radius
    inside = [
        math.hypot(r["state"]["position"][0] - cx, r["state"]["position"][1] - cy) <= R
        for r in rows
    ]
    if not inside or not inside[0]:
        return None
    hold = round(PIT_ESCAPE_HOLDOUT_S / dt)
    i = 0
    n = len(inside)
    while i < n:
        if not inside[i]:
            j = i
            while j < n and not inside[j]:
                j += 1
            if j - i >= hold or j == n:
                return rows[i]["t"]
            i = j
        else:
            i += 1
    return None


def behavior_metrics(log: SessionLog, arena: ArenaSpec, omega_min: float = 0.1) -> BehaviorMetrics:
    rows = log.rows
    if not rows:
        raise ValueError("empty session log")
    dt = log.header["dt"]
    left = sum(1 for r in rows if r["state"]["heading_rate"] > omega_min)
    right = sum(1 for r in rows if r["state"]["heading_rate"] < -omega_min)
    turn_bias = (left - right) / (left + right) if (left + right) else 0.0

    band = 0.10
    edge = arena.open_edge
    def in_band(p):
        x, y = p
        if edge == "bottom":
            return y <= band
        if edge == "top":
            return y >= arena.depth - band
        if edge == "left":
            return x <= band
        return x >= arena.width - band
    approaches = 0
    prev = in_band(rows[0]["state"]["position"])
    for r in rows[1:]:
        cur = in_band(r["state"]["position"])
        if cur and not prev:
            approaches += 1
        prev = cur

    cell = 0.10
    nx = int(math.ceil(arena.width / cell))
    ny = int(math.ceil(arena.depth / cell))
    visited = {
        (min(int(r["state"]["position"][0] / cell), nx - 1),
         min(int(r["state"]["position"][1] / cell), ny - 1))
        for r in rows
    }
    coverage = len(visited) / (nx * ny)

    mean_speed = float(np.mean([abs(r["state"]["speed"]) for r in rows]))
    return BehaviorMetrics(
        pit_escape_time=_escape_time(rows, arena, dt),
        turn_bias=turn_bias,
        edge_approaches=approaches,
        coverage=coverage,
        mean_speed=mean_speed,
    )


def run_pit_trial(
    arena: ArenaSpec,
    snapshot_bytes: bytes,
    eps_controller: float,
    seed: int,
    sim_cfg: SimConfig | None = None,
    learning_base: LearningConfig | None = None,
    horizon_s: float = PIT_ESCAPE_LIMIT_S + PIT_ESCAPE_HOLDOUT_S,
) -> float | None:
    """One pit-start run; returns escape time (s) or None if still caught."""
    base = learning_base or LearningConfig()
    learning = replace(base, eps_controller=eps_controller, eps_model=eps_controller / 10.0, adapting=True)
    spec = ConditionSpec(ADA, snapshot_bytes, learning, duration=horizon_s)
    log, _ = run_condition(
        spec, arena, NullInteractor(), seed, sim_cfg or SimConfig(),
        initial_position=arena.pit.center,
    )
    return _escape_time(log.rows, arena, log.header["dt"])


DEFAULT_RATE_GRID = tuple(0.0125 * 2**k for k in range(10))  # 0.0125 .. 6.4


def calibrate_ada_rate(
    arena: ArenaSpec,
    snapshot_bytes: bytes,
    seeds: list[int],
    sim_cfg: SimConfig | None = None,
    learning_base: LearningConfig | None = None,
    grid: tuple[float, ...] = DEFAULT_RATE_GRID,
    success_fraction: float = 0.9,
) -> float:
    """Smallest grid rate whose pit escape beats 20 s in >= 90% of seeded runs."""
    if len(seeds) < 20:
        raise ValueError("calibration needs at least 20 seeds")
    report = {}
    for rate in grid:
        escapes = 0
        for s in seeds:
            t = run_pit_trial(arena, snapshot_bytes, rate, s, sim_cfg, learning_base)
            if t is not None and t < PIT_ESCAPE_LIMIT_S:
                escapes += 1
        report[rate] = escapes / len(seeds)
        if report[rate] >= success_fraction:
            return rate
    raise CalibrationError(f"no rate in grid met the pit constraint; success rates: {report}")
