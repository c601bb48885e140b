"""Kinematic stepping, sensing, walls, falls and interaction events."""

import math

import numpy as np
import pytest

from pisphere.arena import default_arena
from pisphere.networks import MotorVector
from pisphere.simulator import (
    MAX_HANDWALL_LENGTH,
    MAX_NUDGE_SPEED,
    HandWall,
    Nudge,
    RobotState,
    SimConfig,
    SimulationError,
    check_fall,
    motor_to_command,
    sense,
    step,
    wrap_angle,
)


@pytest.fixture
def arena():
    return default_arena()


@pytest.fixture
def cfg():
    return SimConfig(sensor_noise_sigma=0.0)


class TestMotorToCommand:
    def test_zero(self, cfg):
        assert motor_to_command(MotorVector(0.0, 0.0), cfg) == (0.0, 0.0)

    def test_scaling(self, cfg):
        v, w = motor_to_command(MotorVector(0.999999, 0.0), cfg)
        assert abs(v - 0.999999 * cfg.max_speed) < 1e-12 and w == 0.0

    def test_arithmetic_oracle(self, cfg):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b = rng.uniform(-1, 1, 2)
            v, w = motor_to_command(MotorVector(a, b), cfg)
            assert abs(v - a * cfg.max_speed) < 1e-12
            assert abs(w - b * cfg.omega_max) < 1e-12


class TestWrapAngle:
    def test_range(self):
        for a in np.linspace(-20, 20, 400):
            w = wrap_angle(a)
            assert -math.pi < w <= math.pi
            assert abs(math.sin(w) - math.sin(a)) < 1e-12


class TestStep:
    def test_equilibrium_on_flat_wood(self, arena, cfg):
        s0 = RobotState.at_rest((0.3, 0.6))
        s1 = step(s0, (0.0, 0.0), arena, [], cfg)
        assert s1.position == s0.position
        assert s1.speed == 0.0 and s1.heading_rate == 0.0
        assert not s1.fallen

    def test_wall_clamps_inward_velocity(self, arena, cfg):
        # heading straight at the left wall from 1 cm inside at 0.5 m/s
        s0 = RobotState((0.01, 0.6), math.pi, 0.5, 0.0, (0.0, 0.0), False)
        s1 = step(s0, (0.5, 0.0), arena, [], cfg)
        assert s1.position[0] == 0.0
        vx, _ = s1.velocity()
        assert vx >= -1e-12

    def test_pit_captures_slow_robot(self, arena, cfg):
        s = RobotState.at_rest(arena.pit.center, heading=0.3)
        cx, cy = arena.pit.center
        for _ in range(200):
            s = step(s, (0.0, 0.0), arena, [], cfg)
            assert math.hypot(s.position[0] - cx, s.position[1] - cy) <= arena.pit.radius

    def test_nudge_adds_clamped_impulse(self, arena, cfg):
        s0 = RobotState.at_rest((0.9, 0.6))
        big = Nudge((5.0, 0.0))
        assert math.hypot(*big.clamped()) == MAX_NUDGE_SPEED
        s1 = step(s0, (0.0, 0.0), arena, [big], cfg)
        assert s1.position[0] > 0.9

    def test_speed_decays_after_nudge(self, arena, cfg):
        s = RobotState.at_rest((0.9, 0.6))
        s = step(s, (0.0, 0.0), arena, [Nudge((1.0, 0.0))], cfg)
        ticks = round(5 * cfg.tau_speed / cfg.dt)
        for _ in range(ticks):
            s = step(s, (0.0, 0.0), arena, [], cfg)
        assert abs(s.speed) < cfg.max_speed

    def test_fallen_state_rejected(self, arena, cfg):
        s = RobotState((0.9, -0.01), 0.0, 0.0, 0.0, (0.0, 0.0), True)
        with pytest.raises(SimulationError):
            step(s, (0.0, 0.0), arena, [], cfg)

    def test_crossing_open_edge_sets_fallen(self, arena, cfg):
        s = RobotState((0.9, 0.005), -math.pi / 2, 0.5, 0.0, (0.0, 0.0), False)
        s1 = step(s, (0.5, 0.0), arena, [], cfg)
        assert s1.fallen

    def test_hand_wall_blocks_fall(self, arena, cfg):
        wall = HandWall(((0.7, 0.0), (1.1, 0.0)), expiry=100.0)
        s = RobotState((0.9, 0.005), -math.pi / 2, 0.5, 0.0, (0.0, 0.0), False)
        for _ in range(40):
            s = step(s, (0.5, 0.0), arena, [wall], cfg)
            assert not s.fallen
            assert s.position[1] >= 0.0

    def test_hand_wall_length_limit(self):
        with pytest.raises(ValueError):
            HandWall(((0.0, 0.0), (MAX_HANDWALL_LENGTH + 0.01, 0.0)), expiry=1.0)

    def test_containment_with_covered_open_edge(self, arena, cfg):
        # four adjacent hand-walls fence the open bottom edge completely
        walls = [
            HandWall(((x, 0.0), (x + 0.45, 0.0)), expiry=1e9)
            for x in (0.0, 0.45, 0.90, 1.35)
        ]
        rng = np.random.default_rng(1)
        s = RobotState.at_rest((0.9, 0.6))
        for _ in range(500):
            cmd = (rng.uniform(-1, 1), rng.uniform(-math.pi, math.pi))
            s = step(s, cmd, arena, list(walls), cfg)
            assert not s.fallen
            x, y = s.position
            assert -1e-9 <= x <= arena.width + 1e-9
            assert -1e-6 <= y <= arena.depth + 1e-9

    def test_heading_normalized(self, arena, cfg):
        s = RobotState.at_rest((0.9, 0.6))
        for _ in range(300):
            s = step(s, (0.2, math.pi), arena, [], cfg)
            assert -math.pi < s.heading <= math.pi

    def test_deterministic(self, arena, cfg):
        def run():
            s = RobotState.at_rest((0.9, 0.6), 0.4)
            out = []
            for k in range(100):
                s = step(s, (0.3 * math.sin(k * 0.1), 0.5), arena, [], cfg)
                out.append(s)
            return out

        for a, b in zip(run(), run()):
            assert a == b


class TestSense:
    def test_flat_rest_zero_noise(self, arena, cfg):
        v = sense(RobotState.at_rest((0.3, 0.6)), arena, cfg)
        assert np.array_equal(v.values, np.zeros(5))

    def test_uphill_pitch_positive(self, arena, cfg):
        # west slope of the hill, heading east means climbing
        pos = (arena.hill.center[0] - 0.08, arena.hill.center[1])
        v = sense(RobotState.at_rest(pos, heading=0.0), arena, cfg)
        assert v.pitch > 0.0
        assert abs(v.roll) < 1e-9

    def test_centripetal_circle(self, arena, cfg):
        speed, rate = 0.4, 1.0
        s = RobotState((0.9, 0.6), 0.0, speed, rate,
                       (speed * math.cos(-rate * cfg.dt), speed * math.sin(-rate * cfg.dt)),
                       False)
        v = sense(s, arena, cfg)
        assert abs(v.acc_x) < 0.05
        assert v.acc_y > 0.0
        assert abs(v.gyro_z - rate / cfg.omega_max) < 1e-9

    def test_noise_is_seeded(self, arena):
        noisy = SimConfig(sensor_noise_sigma=0.1)
        s = RobotState.at_rest((0.3, 0.6))
        a = sense(s, arena, noisy, np.random.default_rng(5))
        b = sense(s, arena, noisy, np.random.default_rng(5))
        assert np.array_equal(a.values, b.values)
        c = sense(s, arena, noisy, np.random.default_rng(6))
        assert not np.array_equal(a.values, c.values)


class TestCheckFall:
    def test_center_is_safe(self, arena):
        assert not check_fall(RobotState.at_rest((0.9, 0.6)), arena)

    def test_beyond_open_edge(self, arena):
        s = RobotState((0.9, -0.01), 0.0, 0.0, 0.0, (0.0, 0.0), False)
        assert check_fall(s, arena)
