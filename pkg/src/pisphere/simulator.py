"""Kinematic 2-D simulation of the balanced spherical robot.

The sphere's internal balancing vehicle is abstracted into first-order
speed and heading-rate responses to the commanded targets.  Terrain slopes
act as a velocity bias (gravity), walls and temporary hand-walls stop the
inward velocity component inelastically, and crossing the open edge marks
the robot as fallen.  Proprioceptive sensors are synthesized from the
kinematic state with per-channel Gaussian noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arena import ArenaSpec, terrain_gradient
from .networks import MotorVector, SensorVector

MAX_NUDGE_SPEED = 1.0  # m/s, impulse clamp
MAX_HANDWALL_LENGTH = 0.5  # m


class SimulationError(RuntimeError):
    pass


def wrap_angle(a: float) -> float:
    """Normalize to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.05
    tau_speed: float = 0.3
    tau_heading: float = 0.15
    max_speed: float = 1.0
    omega_max: float = math.pi
    gravity_gain: float = 5.5
    sensor_noise_sigma: float = 0.15
    pitch_scale: float = 0.4  # slope (rad) mapping to full channel deflection
    acc_scale: float = 4.0  # m/s^2 mapping to full channel deflection
    rng_seed: int = 0

    def __post_init__(self):
        if self.dt <= 0 or self.tau_speed <= 0 or self.tau_heading <= 0:
            raise ValueError("dt and time constants must be positive")


@dataclass(frozen=True)
class RobotState:
    position: tuple[float, float]
    heading: float  # (-pi, pi]
    speed: float  # m/s, signed along heading
    heading_rate: float  # rad/s
    prev_velocity: tuple[float, float]  # velocity before the last step, for accel synthesis
    fallen: bool = False

    @classmethod
    def at_rest(cls, position: tuple[float, float], heading: float = 0.0) -> "RobotState":
        return cls(position, wrap_angle(heading), 0.0, 0.0, (0.0, 0.0), False)

    def velocity(self) -> tuple[float, float]:
        return (self.speed * math.cos(self.heading), self.speed * math.sin(self.heading))


@dataclass(frozen=True)
class Nudge:
    impulse: tuple[float, float]  # m/s, magnitude clamped to MAX_NUDGE_SPEED
    timestamp: float = 0.0

    def clamped(self) -> tuple[float, float]:
        vx, vy = self.impulse
        m = math.hypot(vx, vy)
        if m > MAX_NUDGE_SPEED:
            s = MAX_NUDGE_SPEED / m
            return (vx * s, vy * s)
        return (vx, vy)


@dataclass(frozen=True)
class HandWall:
    segment: tuple[tuple[float, float], tuple[float, float]]
    expiry: float  # absolute sim time, s
    timestamp: float = 0.0

    def __post_init__(self):
        (x1, y1), (x2, y2) = self.segment
        if math.hypot(x2 - x1, y2 - y1) > MAX_HANDWALL_LENGTH + 1e-9:
            raise ValueError(f"hand-wall segment longer than {MAX_HANDWALL_LENGTH} m")


InteractionEvent = Nudge | HandWall


def motor_to_command(y: MotorVector, cfg: SimConfig) -> tuple[float, float]:
    """Linear scaling of the normalized commands into physical targets."""
    return (y.speed_cmd * cfg.max_speed, y.heading_rate_cmd * cfg.omega_max)


def _open_edge_crossed(arena: ArenaSpec, x: float, y: float) -> bool:
    e = arena.open_edge
    if e == "bottom":
        return y < 0.0
    if e == "top":
        return y > arena.depth
    if e == "left":
        return x < 0.0
    return x > arena.width


def check_fall(state: RobotState, arena: ArenaSpec) -> bool:
    """True iff the robot center lies beyond the open edge line."""
    x, y = state.position
    return _open_edge_crossed(arena, x, y)


def _segment_block(p0, p1, v, wall: HandWall):
    """If motion p0->p1 crosses the wall segment, return (stop point, filtered v)."""
    (ax, ay), (bx, by) = wall.segment
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    ex, ey = bx - ax, by - ay
    denom = dx * ey - dy * ex
    if abs(denom) < 1e-15:
        return None
    t = ((ax - p0[0]) * ey - (ay - p0[1]) * ex) / denom
    u = ((ax - p0[0]) * dy - (ay - p0[1]) * dx) / denom
    if not (0.0 <= t <= 1.0 and -1e-9 <= u <= 1.0 + 1e-9):
        return None
    # unit normal of the wall
    elen = math.hypot(ex, ey)
    nx, ny = -ey / elen, ex / elen
    vn = v[0] * nx + v[1] * ny
    if vn == 0.0:
        return None
    # stop just on the incoming side of the wall
    hitx, hity = p0[0] + t * dx, p0[1] + t * dy
    eps = 1e-6
    side = -1.0 if vn > 0 else 1.0
    stop = (hitx + side * eps * nx, hity + side * eps * ny)
    filtered = (v[0] - vn * nx, v[1] - vn * ny)
    return stop, filtered


def step(
    state: RobotState,
    cmd: tuple[float, float],
    arena: ArenaSpec,
    events: list[InteractionEvent],
    cfg: SimConfig,
) -> RobotState:
    """Advance one tick of dt under the given command and active events.

    Nudges in `events` fire once this step; hand-walls in `events` are the
    ones active this step (the caller filters by expiry).
    """
    if state.fallen:
        raise SimulationError("cannot step a fallen robot; handle the fall first")

    target_speed, target_rate = cmd
    x0, y0 = state.position
    f = arena.friction_at(x0, y0)

    speed = state.speed + (f * target_speed - state.speed) * cfg.dt / cfg.tau_speed
    rate = state.heading_rate + (target_rate - state.heading_rate) * cfg.dt / cfg.tau_heading
    heading = wrap_angle(state.heading + rate * cfg.dt)
    ux, uy = math.cos(heading), math.sin(heading)

    gx, gy = terrain_gradient(arena, (x0, y0))
    vx = speed * ux - cfg.gravity_gain * gx * cfg.dt
    vy = speed * uy - cfg.gravity_gain * gy * cfg.dt
    for ev in events:
        if isinstance(ev, Nudge):
            ix, iy = ev.clamped()
            vx += ix
            vy += iy

    nx, ny = x0 + vx * cfg.dt, y0 + vy * cfg.dt

    # fixed walls on the three closed edges: clamp and zero the inward component
    e = arena.open_edge
    if e != "left" and nx < 0.0:
        nx, vx = 0.0, max(vx, 0.0)
    if e != "right" and nx > arena.width:
        nx, vx = arena.width, min(vx, 0.0)
    if e != "bottom" and ny < 0.0:
        ny, vy = 0.0, max(vy, 0.0)
    if e != "top" and ny > arena.depth:
        ny, vy = arena.depth, min(vy, 0.0)

    for ev in events:
        if isinstance(ev, HandWall):
            hit = _segment_block((x0, y0), (nx, ny), (vx, vy), ev)
            if hit is not None:
                (nx, ny), (vx, vy) = hit

    fallen = _open_edge_crossed(arena, nx, ny)
    if not fallen:
        # numerical guard: keep the center on the table
        nx = min(max(nx, 0.0), arena.width)
        ny = min(max(ny, 0.0), arena.depth)
    new_speed = vx * ux + vy * uy

    return RobotState(
        position=(nx, ny),
        heading=heading,
        speed=new_speed,
        heading_rate=rate,
        prev_velocity=state.velocity(),
        fallen=fallen,
    )


def sense(
    state: RobotState,
    arena: ArenaSpec,
    cfg: SimConfig,
    rng: np.random.Generator | None = None,
) -> SensorVector:
    """Synthesize the five proprioceptive channels from the kinematic state.

    pitch/roll: terrain slope projected into the heading frame; acc_x:
    longitudinal acceleration over the last step; acc_y: centripetal
    v * heading_rate; gyro_z: heading rate.  Each channel gets Gaussian
    noise and is clamped to [-1, 1].
    """
    x, y = state.position
    gx, gy = terrain_gradient(arena, (x, y)) if arena.inside(x, y) else (0.0, 0.0)
    ux, uy = math.cos(state.heading), math.sin(state.heading)
    # left-hand perpendicular: positive roll = tilted toward the robot's left
    px, py = -uy, ux
    pitch = math.atan(gx * ux + gy * uy)
    roll = math.atan(gx * px + gy * py)

    vx, vy = state.velocity()
    ax = ((vx - state.prev_velocity[0]) * ux + (vy - state.prev_velocity[1]) * uy) / cfg.dt
    ay = state.speed * state.heading_rate

    raw = np.array(
        [
            pitch / cfg.pitch_scale,
            roll / cfg.pitch_scale,
            ax / cfg.acc_scale,
            ay / cfg.acc_scale,
            state.heading_rate / cfg.omega_max,
        ]
    )
    if rng is not None and cfg.sensor_noise_sigma > 0:
        raw = raw + rng.normal(0.0, cfg.sensor_noise_sigma, size=raw.shape)
    return SensorVector.from_raw(raw)
