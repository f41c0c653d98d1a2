"""Quaternion attitude tracking and body-to-earth frame conversion.

A multiplicative (error-state) Kalman filter integrates the gyro and
corrects tilt/heading against the accelerometer and magnetometer. The
earth frame is (north, east, down) with the at-rest accelerometer reading
mapping onto +down, so a flat, motionless device has the identity attitude
and pitch = roll = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from . import quat
from ._kernels import PARAMS_LEN, P_ACCEL_GATE, P_ACCEL_VAR, P_GRAVITY, P_GYRO_BIAS, P_GYRO_VAR, P_MAG_REF, P_MAG_VAR, ekf_run
from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import EmptyTrace, NonIncreasingTime, NotStatic
from .trace_io import SensorSample, Trace


@dataclass(frozen=True)
class OrientationState:
    """Unit quaternion (body to earth) plus 3x3 error-state covariance."""

    q: np.ndarray
    P: np.ndarray
    t_ms: int


@dataclass(frozen=True)
class EulerAngles:
    pitch: float
    roll: float
    yaw: float


@dataclass(frozen=True)
class EfcSample:
    """Earth-frame sample: gravity-free acceleration (n, e, d) and magnetics."""

    t_ms: int
    linear_accel_efc: np.ndarray
    mag_efc: np.ndarray


class EfcStream:
    """Column-oriented EFC series produced by filtering a trace."""

    def __init__(self, t_ms, lin_accel, mag_efc, euler, q_hist=None):
        self.t_ms = np.asarray(t_ms, dtype=np.int64)
        self.lin_accel = np.asarray(lin_accel)
        self.mag_efc = np.asarray(mag_efc)
        self.euler = np.asarray(euler)  # columns: pitch, roll, yaw
        self.q_hist = q_hist

    def __len__(self) -> int:
        return self.t_ms.shape[0]

    def sample(self, i: int) -> EfcSample:
        return EfcSample(int(self.t_ms[i]), self.lin_accel[i], self.mag_efc[i])

    @property
    def pitch(self) -> np.ndarray:
        return self.euler[:, 0]

    @property
    def roll(self) -> np.ndarray:
        return self.euler[:, 1]

    def mag_magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.mag_efc * self.mag_efc, axis=1))


def params_vector(config: PipelineConfig = DEFAULT_CONFIG) -> np.ndarray:
    p = np.empty(PARAMS_LEN)
    p[P_GYRO_VAR] = config.gyro_var
    p[P_ACCEL_VAR] = config.accel_corr_var
    p[P_MAG_VAR] = config.mag_corr_var
    p[P_GRAVITY] = config.gravity
    p[P_MAG_REF : P_MAG_REF + 3] = config.mag_reference
    p[P_ACCEL_GATE] = config.accel_gate
    p[P_GYRO_BIAS : P_GYRO_BIAS + 3] = config.gyro_bias
    return p


def _window_arrays(samples) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(samples, Trace):
        return samples.t_ms, samples.accel, samples.mag, samples.gyro
    samples = list(samples)
    if not samples:
        raise EmptyTrace("empty init window")
    t = np.array([s.t_ms for s in samples], dtype=np.int64)
    accel = np.array([s.accel for s in samples])
    mag = np.array([s.mag for s in samples])
    gyro = np.array([s.gyro for s in samples])
    return t, accel, mag, gyro


def ekf_init(
    samples: Iterable[SensorSample] | Trace,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> OrientationState:
    """Align the attitude with the mean gravity and magnetic directions.

    The window must be approximately static (mean gyro magnitude below the
    configured limit) and span at least config.init_window_s.
    """
    t, accel, mag, gyro = _window_arrays(samples)
    gyro_mean = float(np.mean(np.sqrt(np.sum(gyro * gyro, axis=1))))
    if gyro_mean >= config.static_gyro_limit:
        raise NotStatic(f"mean gyro magnitude {gyro_mean:.3f} rad/s too large to initialize")
    a = accel.mean(axis=0)
    m = mag.mean(axis=0)
    an = float(np.linalg.norm(a))
    if an < 1e-6:
        raise NotStatic("zero mean accelerometer reading")
    down_b = a / an
    m_h = m - float(m @ down_b) * down_b
    mn = float(np.linalg.norm(m_h))
    if mn < 1e-9:
        raise NotStatic("magnetic field parallel to gravity; heading unobservable")
    north_b = m_h / mn
    east_b = np.cross(down_b, north_b)
    # rows of the body-to-earth rotation matrix
    R = np.vstack([north_b, east_b, down_b])
    q = quat.from_matrix(R)
    P = np.eye(3) * config.init_att_var
    return OrientationState(q=q, P=P, t_ms=int(t[-1]))


def ekf_init_coarse(
    samples: Iterable[SensorSample] | Trace,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> OrientationState:
    """Alignment without the static check, for traces that start in motion.

    Uses the same mean-direction alignment but with a wide initial
    covariance; the filter converges once the motion quiets down.
    """
    relaxed = config.with_overrides(
        static_gyro_limit=math.inf, init_att_var=math.radians(15.0) ** 2
    )
    return ekf_init(samples, relaxed)


def estimate_mag_reference(samples: Iterable[SensorSample] | Trace) -> Tuple[float, float, float]:
    """Earth-frame unit magnetic reference implied by a static window."""
    t, accel, mag, gyro = _window_arrays(samples)
    a = accel.mean(axis=0)
    m = mag.mean(axis=0)
    down_b = a / float(np.linalg.norm(a))
    m_unit = m / float(np.linalg.norm(m))
    dip = float(m_unit @ down_b)
    horiz = math.sqrt(max(0.0, 1.0 - dip * dip))
    return (horiz, 0.0, dip)


def ekf_step(
    state: OrientationState,
    sample: SensorSample,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> OrientationState:
    """Advance the filter by one sample (gyro predict, accel/mag correct)."""
    if sample.t_ms <= state.t_ms:
        raise NonIncreasingTime(f"sample at {sample.t_ms} ms <= state at {state.t_ms} ms")
    dt = (sample.t_ms - state.t_ms) / 1000.0
    q_hist, P, _, _, _ = ekf_run(
        state.q,
        state.P,
        np.asarray(sample.gyro)[None, :],
        np.asarray(sample.accel)[None, :],
        np.asarray(sample.mag)[None, :],
        np.array([dt]),
        params_vector(config),
    )
    return OrientationState(q=q_hist[0], P=P, t_ms=sample.t_ms)


def filter_trace(
    state: OrientationState,
    trace: Trace,
    config: PipelineConfig = DEFAULT_CONFIG,
    start: int = 0,
    stop: int | None = None,
) -> Tuple[OrientationState, EfcStream]:
    """Run the filter over trace[start:stop]; returns final state + EFC stream."""
    stop = len(trace) if stop is None else stop
    t = trace.t_ms[start:stop]
    if t.shape[0] == 0:
        raise EmptyTrace("empty filter slice")
    if t[0] <= state.t_ms:
        raise NonIncreasingTime(f"slice starts at {t[0]} ms <= state at {state.t_ms} ms")
    dt = np.diff(np.concatenate(([state.t_ms], t))) / 1000.0
    q_hist, P, lin, mag_e, euler = ekf_run(
        state.q,
        state.P,
        trace.gyro[start:stop],
        trace.accel[start:stop],
        trace.mag[start:stop],
        dt,
        params_vector(config),
    )
    new_state = OrientationState(q=q_hist[-1], P=P, t_ms=int(t[-1]))
    return new_state, EfcStream(t, lin, mag_e, euler, q_hist)


def to_euler(q: np.ndarray) -> EulerAngles:
    """Pitch/roll/yaw; flat device is (0, 0, 0), yaw positive about body z."""
    w, x, y, z = q
    sp = max(-1.0, min(1.0, 2.0 * (w * y - z * x)))
    pitch = math.asin(sp)
    roll = -math.atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    yaw = math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
    return EulerAngles(pitch=pitch, roll=roll, yaw=yaw)


def to_efc(
    state: OrientationState,
    sample: SensorSample,
    gravity: float = DEFAULT_CONFIG.gravity,
) -> EfcSample:
    """Rotate one body-frame sample into (north, east, down), gravity removed."""
    accel_e = quat.rotate(state.q, np.asarray(sample.accel, dtype=float))
    mag_e = quat.rotate(state.q, np.asarray(sample.mag, dtype=float))
    lin = accel_e - np.array([0.0, 0.0, gravity])
    return EfcSample(t_ms=sample.t_ms, linear_accel_efc=lin, mag_efc=mag_e)


EFC_HEADER = "t_ms,n,e,d,mn,me,md,pitch,roll,yaw"


def serialize_efc_stream(stream: EfcStream) -> bytes:
    """Earth-frame CSV: the trace layout with the channels renamed."""
    out = [EFC_HEADER]
    for i in range(len(stream)):
        row = [str(int(stream.t_ms[i]))]
        row += [repr(float(v)) for v in stream.lin_accel[i]]
        row += [repr(float(v)) for v in stream.mag_efc[i]]
        row += [repr(float(v)) for v in stream.euler[i]]
        out.append(",".join(row))
    return ("\n".join(out) + "\n").encode("utf-8")


def parse_efc_stream(data: bytes) -> EfcStream:
    from .errors import MalformedRecord

    lines = data.decode("utf-8").split("\n")
    if not lines or lines[0].strip("\r") != EFC_HEADER:
        raise MalformedRecord(1, f"expected header {EFC_HEADER!r}")
    rows = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip("\r")
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 10:
            raise MalformedRecord(line_no, f"expected 10 fields, got {len(parts)}")
        rows.append([float(v) for v in parts])
    arr = np.array(rows)
    return EfcStream(arr[:, 0].astype(np.int64), arr[:, 1:4], arr[:, 4:7], arr[:, 7:10])
