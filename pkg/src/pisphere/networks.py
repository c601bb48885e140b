"""Controller/predictor network pair and the information-maximizing update rule.

The robot carries two tiny linear-tanh networks: a controller mapping the
five proprioceptive sensor channels to two motor commands, and a predictor
mapping the motor commands back to the next sensor reading.  The controller
is adapted online by gradient ascent on a time-local information surrogate
(the log-volume amplification of the sensor-to-sensor loop Jacobian under
Gaussian channel noise); the predictor by gradient descent on the squared
one-step prediction error.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

SENSOR_DIM = 5
MOTOR_DIM = 2

SENSOR_CHANNELS = ("pitch", "roll", "acc_x", "acc_y", "gyro_z")

SNAPSHOT_MAGIC = b"PINW"
SNAPSHOT_VERSION = 1


class NetworkCorruptError(RuntimeError):
    """A network produced a non-finite value: the weights are unusable."""


class SnapshotDecodeError(ValueError):
    """Malformed snapshot bytes; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SensorVector:
    """Five normalized proprioceptive channels, fixed order.

    Channels: pitch, roll, acc_x, acc_y, gyro_z -- each clamped to [-1, 1].
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (SENSOR_DIM,):
            raise ValueError(f"sensor vector must have shape ({SENSOR_DIM},), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("sensor vector has non-finite channels")
        if np.any(np.abs(v) > 1.0):
            raise ValueError("sensor vector channels must lie in [-1, 1]")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_raw(cls, raw: np.ndarray) -> "SensorVector":
        """Clamp an unnormalized reading into the valid range."""
        raw = np.nan_to_num(np.asarray(raw, dtype=np.float64), nan=0.0, posinf=1.0, neginf=-1.0)
        return cls(np.clip(raw, -1.0, 1.0))

    @property
    def pitch(self) -> float:
        return float(self.values[0])

    @property
    def roll(self) -> float:
        return float(self.values[1])

    @property
    def acc_x(self) -> float:
        return float(self.values[2])

    @property
    def acc_y(self) -> float:
        return float(self.values[3])

    @property
    def gyro_z(self) -> float:
        return float(self.values[4])


@dataclass(frozen=True)
class MotorVector:
    """Speed and heading-rate commands, each in (-1, 1) when tanh-produced."""

    speed_cmd: float
    heading_rate_cmd: float

    @property
    def values(self) -> np.ndarray:
        return np.array([self.speed_cmd, self.heading_rate_cmd])


@dataclass(frozen=True)
class ControllerNet:
    """Sensor-to-motor map y = tanh(C x + h)."""

    C: np.ndarray  # (2, 5)
    h: np.ndarray  # (2,)

    def __post_init__(self):
        C = np.asarray(self.C, dtype=np.float64)
        h = np.asarray(self.h, dtype=np.float64)
        if C.shape != (MOTOR_DIM, SENSOR_DIM) or h.shape != (MOTOR_DIM,):
            raise ValueError("controller weight shapes must be (2,5) and (2,)")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(h))):
            raise NetworkCorruptError("controller weights non-finite")
        object.__setattr__(self, "C", _frozen(C))
        object.__setattr__(self, "h", _frozen(h))

    @classmethod
    def zeros(cls) -> "ControllerNet":
        return cls(np.zeros((MOTOR_DIM, SENSOR_DIM)), np.zeros(MOTOR_DIM))


@dataclass(frozen=True)
class PredictorNet:
    """Motor-to-next-sensor map x' = A y + b."""

    A: np.ndarray  # (5, 2)
    b: np.ndarray  # (5,)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if A.shape != (SENSOR_DIM, MOTOR_DIM) or b.shape != (SENSOR_DIM,):
            raise ValueError("predictor weight shapes must be (5,2) and (5,)")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise NetworkCorruptError("predictor weights non-finite")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))

    @classmethod
    def zeros(cls) -> "PredictorNet":
        return cls(np.zeros((SENSOR_DIM, MOTOR_DIM)), np.zeros(SENSOR_DIM))


@dataclass(frozen=True)
class NetworkPair:
    """Controller + predictor with a step counter; the unit of snapshotting."""

    controller: ControllerNet
    predictor: PredictorNet
    step_count: int = 0

    def __post_init__(self):
        if self.step_count < 0:
            raise ValueError("step_count must be nonnegative")

    @classmethod
    def fresh(cls, rng: np.random.Generator, init_scale: float = 0.1) -> "NetworkPair":
        """Small random controller, zero predictor: the pre-adaptation start."""
        C = rng.uniform(-init_scale, init_scale, size=(MOTOR_DIM, SENSOR_DIM))
        return cls(ControllerNet(C, np.zeros(MOTOR_DIM)), PredictorNet.zeros(), 0)

    def equals_exactly(self, other: "NetworkPair") -> bool:
        return (
            self.step_count == other.step_count
            and np.array_equal(self.controller.C, other.controller.C)
            and np.array_equal(self.controller.h, other.controller.h)
            and np.array_equal(self.predictor.A, other.predictor.A)
            and np.array_equal(self.predictor.b, other.predictor.b)
        )


@dataclass(frozen=True)
class LearningConfig:
    eps_controller: float = 0.05
    eps_model: float = 0.005
    noise_variance: float = 0.01
    weight_clip: float = 5.0
    gradient_clip: float = 1.0
    adapting: bool = True

    def __post_init__(self):
        if self.noise_variance <= 0:
            raise ValueError("noise_variance must be positive")
        if self.weight_clip <= 0 or self.gradient_clip <= 0:
            raise ValueError("clips must be positive")
        if self.eps_controller < 0 or self.eps_model < 0:
            raise ValueError("learning rates must be nonnegative")


@dataclass(frozen=True)
class StepDiagnostics:
    pi_value: float
    prediction_error_sq: float
    controller_grad_norm: float
    model_grad_norm: float
    update_skipped: bool = False


def controller_step(net: ControllerNet, x: SensorVector) -> MotorVector:
    """y = tanh(C x + h); both components strictly inside (-1, 1)."""
    y = np.tanh(net.C @ x.values + net.h)
    if not np.all(np.isfinite(y)):
        raise NetworkCorruptError("controller produced non-finite output")
    return MotorVector(float(y[0]), float(y[1]))


def predict(net: PredictorNet, y: MotorVector) -> np.ndarray:
    """Predicted next sensor reading A y + b (unclamped)."""
    xhat = net.A @ y.values + net.b
    if not np.all(np.isfinite(xhat)):
        raise NetworkCorruptError("predictor produced non-finite output")
    return xhat


def _loop_jacobian(pair: NetworkPair, y: np.ndarray) -> np.ndarray:
    # Sensor-to-sensor Jacobian through the current operating point:
    # L = A diag(1 - y^2) C.
    d = 1.0 - y * y
    return (pair.predictor.A * d) @ pair.controller.C


def _objective_from_jacobian(L: np.ndarray, sigma2: float) -> float:
    M = L @ L.T + sigma2 * np.eye(SENSOR_DIM)
    chol = np.linalg.cholesky(M)
    J = float(np.sum(np.log(np.diag(chol))) * 2.0 * 0.5 - (SENSOR_DIM / 2.0) * np.log(sigma2))
    if not np.isfinite(J):
        raise NetworkCorruptError("objective non-finite")
    # positive semidefinite L L^T makes J >= 0 exactly; guard rounding only
    return max(J, 0.0)


def pi_objective(pair: NetworkPair, x: SensorVector, cfg: LearningConfig) -> float:
    """Information surrogate J = 1/2 ln det(L L^T + s^2 I) - (5/2) ln s^2, nats."""
    y = controller_step(pair.controller, x)
    L = _loop_jacobian(pair, y.values)
    return _objective_from_jacobian(L, cfg.noise_variance)


def pi_gradients(pair: NetworkPair, x: SensorVector, cfg: LearningConfig):
    """Analytic gradient of the surrogate w.r.t. controller weights.

    Returns (J, dJ/dC, dJ/dh).  With M = L L^T + s^2 I and G = M^{-1} L the
    differential is dJ = tr(G^T dL); the explicit-C part gives D A^T G and
    the dependence of D = diag(1 - y^2) on the pre-activation adds a
    rank-one term through s_k = (C G^T A)_kk (-2 y_k)(1 - y_k^2).
    """
    xv = x.values
    z = pair.controller.C @ xv + pair.controller.h
    y = np.tanh(z)
    d = 1.0 - y * y
    A = pair.predictor.A
    C = pair.controller.C
    L = (A * d) @ C
    sigma2 = cfg.noise_variance
    M = L @ L.T + sigma2 * np.eye(SENSOR_DIM)
    chol = np.linalg.cholesky(M)
    J = float(np.sum(np.log(np.diag(chol))) - (SENSOR_DIM / 2.0) * np.log(sigma2))
    G = np.linalg.solve(M, L)
    s = np.einsum("ij,ji->i", C @ G.T, A) * (-2.0 * y) * d
    gC = d[:, None] * (A.T @ G) + np.outer(s, xv)
    gh = s
    return max(J, 0.0), gC, gh


def _clip_norm(g: np.ndarray, limit: float) -> np.ndarray:
    n = float(np.linalg.norm(g))
    if n > limit:
        return g * (limit / n)
    return g


def update_step(
    pair: NetworkPair,
    x_t: SensorVector,
    x_next: SensorVector,
    cfg: LearningConfig,
) -> tuple[NetworkPair, StepDiagnostics]:
    """One online adaptation tick.

    Diagnostics always come from the pre-update networks.  When adapting,
    the predictor descends the squared one-step error and the controller
    ascends the information surrogate; gradients are norm-clipped, weights
    clamped.  A non-finite gradient skips the update and flags it rather
    than corrupting the networks.
    """
    y = controller_step(pair.controller, x_t)
    xi = x_next.values - predict(pair.predictor, y)
    pe = float(xi @ xi)

    try:
        J, gC, gh = pi_gradients(pair, x_t, cfg)
    except np.linalg.LinAlgError:
        diag = StepDiagnostics(0.0, pe, float("nan"), float("nan"), update_skipped=True)
        if cfg.adapting and (cfg.eps_controller or cfg.eps_model):
            return replace(pair, step_count=pair.step_count + 1), diag
        return pair, diag
    gA = np.outer(xi, y.values)
    gb = xi
    ctrl_norm = float(np.sqrt(np.sum(gC * gC) + np.sum(gh * gh)))
    model_norm = float(np.sqrt(np.sum(gA * gA) + np.sum(gb * gb)))

    diag = StepDiagnostics(
        pi_value=J,
        prediction_error_sq=pe,
        controller_grad_norm=ctrl_norm,
        model_grad_norm=model_norm,
    )

    if not cfg.adapting:
        return pair, diag
    if cfg.eps_controller == 0.0 and cfg.eps_model == 0.0:
        return pair, diag

    finite = all(
        np.all(np.isfinite(g)) for g in (gC, gh, gA, gb)
    )
    if not finite:
        return replace(pair, step_count=pair.step_count + 1), replace(diag, update_skipped=True)

    gc = cfg.gradient_clip
    wc = cfg.weight_clip
    newC = np.clip(pair.controller.C + cfg.eps_controller * _clip_norm(gC, gc), -wc, wc)
    newh = np.clip(pair.controller.h + cfg.eps_controller * _clip_norm(gh, gc), -wc, wc)
    newA = np.clip(pair.predictor.A + cfg.eps_model * _clip_norm(gA, gc), -wc, wc)
    newb = np.clip(pair.predictor.b + cfg.eps_model * _clip_norm(gb, gc), -wc, wc)
    out = NetworkPair(ControllerNet(newC, newh), PredictorNet(newA, newb), pair.step_count + 1)
    return out, diag


_HEADER = struct.Struct("<4sHHH")
_COUNT = struct.Struct("<Q")


def snapshot(pair: NetworkPair) -> bytes:
    """Versioned little-endian binary encoding; round-trips bit-exactly."""
    buf = bytearray()
    buf += _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, SENSOR_DIM, MOTOR_DIM)
    for arr in (pair.controller.C, pair.controller.h, pair.predictor.A, pair.predictor.b):
        buf += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    buf += _COUNT.pack(pair.step_count)
    return bytes(buf)


def restore(data: bytes) -> NetworkPair:
    if len(data) < _HEADER.size:
        raise SnapshotDecodeError("truncated header", len(data))
    magic, version, sdim, mdim = _HEADER.unpack_from(data, 0)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotDecodeError(f"bad magic {magic!r}", 0)
    if version != SNAPSHOT_VERSION:
        raise SnapshotDecodeError(f"unsupported version {version}", 4)
    if (sdim, mdim) != (SENSOR_DIM, MOTOR_DIM):
        raise SnapshotDecodeError(f"unsupported dimensions {sdim}x{mdim}", 6)
    offset = _HEADER.size
    arrays = []
    for shape in ((mdim, sdim), (mdim,), (sdim, mdim), (sdim,)):
        n = int(np.prod(shape))
        end = offset + 8 * n
        if len(data) < end:
            raise SnapshotDecodeError("truncated weight block", offset)
        arrays.append(np.frombuffer(data, dtype="<f8", count=n, offset=offset).reshape(shape))
        offset = end
    if len(data) < offset + _COUNT.size:
        raise SnapshotDecodeError("truncated step count", offset)
    (step_count,) = _COUNT.unpack_from(data, offset)
    offset += _COUNT.size
    if len(data) != offset:
        raise SnapshotDecodeError(f"{len(data) - offset} trailing bytes", offset)
    C, h, A, b = arrays
    return NetworkPair(ControllerNet(C, h), PredictorNet(A, b), int(step_count))
