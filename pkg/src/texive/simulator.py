"""Deterministic synthetic trace and keystroke generation.

Each scenario is a seeded list of activity segments. Segments are built in
the earth frame (orientation track + linear acceleration + magnetic field),
converted to body-frame sensor channels, and noised from per-segment,
per-channel RNG streams so appending a segment never perturbs earlier
samples. Right-side vehicle entries are exact left-right mirrors of the
corresponding left-side entry (same seed), which is what the side detector
has to overcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from . import quat
from .activity import ActivityLabel
from .config import DEFAULT_CONFIG, NOMINAL_MAG_FIELD, STANDARD_GRAVITY
from .errors import InvalidScenario
from .trace_io import KeystrokeLog, LabelSpan, Trace

SEGMENT_KINDS = (
    "Walk",
    "Stairs",
    "SitDown",
    "EnterVehicleLeft",
    "EnterVehicleRight",
    "Idle",
    "EngineStart",
    "Drive",
    "BusBoard",
)

_SEGMENT_LABEL = {
    "Walk": ActivityLabel.Walking,
    "Stairs": ActivityLabel.Stairs,
    "SitDown": ActivityLabel.SittingDown,
    "EnterVehicleLeft": ActivityLabel.EnteringVehicle,
    "EnterVehicleRight": ActivityLabel.EnteringVehicle,
    "Idle": ActivityLabel.Standing,
    "EngineStart": ActivityLabel.Other,
    "Drive": ActivityLabel.Other,
    "BusBoard": ActivityLabel.GettingOnBus,
}

POCKETS = ("LeftPocket", "RightPocket")


@dataclass(frozen=True)
class Segment:
    kind: str
    duration_s: float
    params: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    seed: int
    segments: Tuple[Segment, ...]
    pocket: str = "LeftPocket"
    noise_accel: float = 0.12
    noise_mag: float = 0.2
    noise_gyro: float = 0.01
    rate_hz: float = DEFAULT_CONFIG.rate_hz
    mag_field: Tuple[float, float, float] = NOMINAL_MAG_FIELD

    def __post_init__(self):
        if self.pocket not in POCKETS:
            raise InvalidScenario(f"unknown pocket {self.pocket!r}")
        if not self.segments:
            raise InvalidScenario("scenario has no segments")
        for seg in self.segments:
            if seg.kind not in SEGMENT_KINDS:
                raise InvalidScenario(f"unknown segment kind {seg.kind!r}")
            if not seg.duration_s > 0:
                raise InvalidScenario(f"segment duration must be positive, got {seg.duration_s}")


@dataclass(frozen=True)
class GroundTruth:
    """Noise-free earth-frame truth channels for detector tests."""

    q: np.ndarray            # (n, 4) body-to-earth attitude
    lin_accel_efc: np.ndarray  # (n, 3)
    euler: np.ndarray        # (n, 3) pitch, roll, yaw
    mag_efc: np.ndarray      # (n, 3)
    bump_times_s: Tuple[float, ...] = ()  # trace-relative first-axle hits


def _pulse(tau: np.ndarray, t0: float, t1: float) -> np.ndarray:
    """Raised-cosine bump: 0 outside [t0, t1], peaking at 1 mid-interval."""
    x = (tau - t0) / (t1 - t0)
    out = 0.5 * (1.0 - np.cos(2.0 * math.pi * np.clip(x, 0.0, 1.0)))
    out[(x < 0) | (x > 1)] = 0.0
    return out


def _smooth_plateau(tau: np.ndarray, t0: float, t1: float, edge: float) -> np.ndarray:
    up = np.clip((tau - t0) / edge, 0.0, 1.0)
    down = np.clip((t1 - tau) / edge, 0.0, 1.0)
    s = lambda x: x * x * (3.0 - 2.0 * x)
    return s(up) * s(down)


class _SegmentTracks:
    """Earth-frame tracks for one segment, all arrays of length n."""

    def __init__(self, n: int):
        self.pitch = np.zeros(n)
        self.roll = np.zeros(n)
        self.yaw = np.zeros(n)
        self.a_e = np.zeros((n, 3))
        self.m_e = np.zeros((n, 3))
        self.mirror = False
        self.bump_times: Tuple[float, ...] = ()


def _walk_tracks(tau, rng, amp=2.0, freq=2.0, horiz=0.8):
    n = tau.shape[0]
    tr = _SegmentTracks(n)
    p0, p1, p2 = rng.uniform(0.0, 2.0 * math.pi, 3)
    tr.a_e[:, 2] = amp * np.sin(2 * math.pi * freq * tau + p0)
    tr.a_e[:, 0] = horiz * np.sin(2 * math.pi * freq * tau + p1)
    tr.pitch = 0.05 * np.sin(2 * math.pi * freq * tau + p2)
    tr.roll = 0.035 * np.sin(2 * math.pi * (freq / 2.0) * tau + p1)
    return tr


def _stairs_tracks(tau, rng):
    n = tau.shape[0]
    tr = _SegmentTracks(n)
    p0, p1, p2 = rng.uniform(0.0, 2.0 * math.pi, 3)
    f = 1.4
    tr.a_e[:, 2] = 2.6 * np.sin(2 * math.pi * f * tau + p0) + 0.9 * np.sin(
        2 * math.pi * 2 * f * tau + p1
    )
    tr.a_e[:, 0] = 0.35 * np.sin(2 * math.pi * f * tau + p2)
    tr.pitch = 0.09 * np.sin(2 * math.pi * f * tau + p2)
    tr.roll = 0.03 * np.sin(2 * math.pi * (f / 2.0) * tau + p0)
    return tr


def _sitdown_tracks(tau, rng, mag_fluct: float = 0.0):
    n = tau.shape[0]
    tr = _SegmentTracks(n)
    tr.a_e[:, 2] = -1.3 * _pulse(tau, 0.4, 1.2) + 3.0 * _pulse(tau, 1.2, 1.7)
    tr.a_e[:, 0] = 0.5 * _pulse(tau, 0.2, 1.2)
    tr.pitch = -0.18 * _pulse(tau, 0.3, 1.7)
    tr.roll = 0.05 * _pulse(tau, 0.5, 1.5)
    if mag_fluct > 0.0:
        # mild ambient fluctuation (indoor electronics), well under an
        # approach-to-vehicle signature
        ph = rng.uniform(0.0, 2.0 * math.pi, 3)
        tr.m_e[:, 0] = mag_fluct * np.sin(2 * math.pi * 0.9 * tau + ph[0])
        tr.m_e[:, 1] = mag_fluct * np.sin(2 * math.pi * 1.2 * tau + ph[1])
        tr.m_e[:, 2] = mag_fluct * np.sin(2 * math.pi * 0.6 * tau + ph[2])
    return tr


def _idle_tracks(tau, rng):
    # perfectly still; any body sway comes in through the channel noise
    return _SegmentTracks(tau.shape[0])


def _enter_tracks(tau, rng, pocket: str, mag_fluct_amp: float):
    """Left-side entry; the right-side variant mirrors the finished samples.

    The leg nearest the vehicle steps in first; a phone in that pocket sees
    the large rotation transient first, the other pocket sees it second.
    For a left-side entry the inner leg is the right one.
    """
    n = tau.shape[0]
    tr = _SegmentTracks(n)
    inner = pocket == "RightPocket"
    # walk-up
    p0 = rng.uniform(0.0, 2.0 * math.pi)
    gait = np.where(tau < 1.5, 1.5 * np.sin(2 * math.pi * 2.0 * tau + p0), 0.0)
    tr.a_e[:, 2] = gait
    tr.a_e[:, 0] = np.where(tau < 1.5, 0.6 * np.sin(2 * math.pi * 2.0 * tau + p0 + 1.1), 0.0)
    # door + step-in rotation signature
    if inner:
        tr.roll = -0.55 * _pulse(tau, 1.6, 2.5) + 0.18 * _pulse(tau, 2.7, 3.6)
        tr.pitch = 0.30 * _pulse(tau, 1.9, 3.0)
    else:
        tr.roll = -0.20 * _pulse(tau, 1.6, 2.6) + 0.50 * _pulse(tau, 2.8, 3.8)
        tr.pitch = 0.26 * _pulse(tau, 2.2, 3.3)
    tr.a_e[:, 0] += -0.8 * _pulse(tau, 1.5, 2.5)
    # sit-down at the end
    tr.a_e[:, 2] += -1.2 * _pulse(tau, 3.5, 4.4) + 2.8 * _pulse(tau, 4.4, 4.9)
    tr.pitch += -0.15 * _pulse(tau, 3.5, 5.0)
    # magnetic fluctuation ramps up while approaching the vehicle
    ramp = np.clip(tau / 1.0, 0.0, 1.0) * np.where(tau > 4.5, 0.3, 1.0)
    ph = rng.uniform(0.0, 2.0 * math.pi, 3)
    tr.m_e[:, 0] = mag_fluct_amp * ramp * np.sin(2 * math.pi * 1.1 * tau + ph[0])
    tr.m_e[:, 1] = mag_fluct_amp * ramp * np.sin(2 * math.pi * 0.7 * tau + ph[1])
    tr.m_e[:, 2] = mag_fluct_amp * ramp * np.sin(2 * math.pi * 1.4 * tau + ph[2])
    return tr


def _engine_tracks(tau, rng, amplitude: float, mag_field):
    n = tau.shape[0]
    tr = _SegmentTracks(n)
    unit = np.asarray(mag_field) / np.linalg.norm(mag_field)
    spike = amplitude * _pulse(tau, 0.5, 1.1)
    tr.m_e = spike[:, None] * unit[None, :]
    return tr


def _bump_burst(tau, t0: float, amp: float) -> np.ndarray:
    """One wheel pass: 0.3 s damped oscillation with peak magnitude ~amp."""
    x = (tau - t0) / 0.3
    env = np.where((x >= 0) & (x <= 1), 0.5 * (1 - np.cos(2 * math.pi * np.clip(x, 0, 1))), 0.0)
    return amp * env * np.sin(2 * math.pi * 5.0 * (tau - t0) + 0.5 * math.pi)


def _drive_tracks(tau, rng, duration, bump_rate, seat, lag_s, driveaway):
    n = tau.shape[0]
    tr = _SegmentTracks(n)
    p0 = rng.uniform(0.0, 2.0 * math.pi)
    if driveaway:
        tr.a_e[:, 0] = 1.6 * _smooth_plateau(tau, 0.3, 3.6, 0.5)
    tr.a_e[:, 2] = 0.12 * np.sin(2 * math.pi * 7.0 * tau + p0)
    # Poisson bump arrivals, each observed once per axle
    t = 5.0
    bumps = []
    while True:
        t += rng.exponential(1.0 / bump_rate)
        if t >= duration - lag_s - 1.0:
            break
        bumps.append(t)
    for tb in bumps:
        a1 = rng.uniform(2.0, 2.6)
        if seat == "Back":
            ratio = rng.uniform(2.9, 3.5)
        else:
            ratio = rng.uniform(1.05, 1.25)
        tr.a_e[:, 2] += _bump_burst(tau, tb, a1)
        tr.a_e[:, 2] += _bump_burst(tau, tb + lag_s, a1 * ratio)
    tr.bump_times = tuple(bumps)
    return tr


def _busboard_tracks(tau, rng):
    n = tau.shape[0]
    tr = _SegmentTracks(n)
    p0, p1 = rng.uniform(0.0, 2.0 * math.pi, 2)
    walk1 = (tau < 3.0) | ((tau >= 4.2) & (tau < 6.5))
    tr.a_e[:, 2] = np.where(walk1, 1.8 * np.sin(2 * math.pi * 2.0 * tau + p0), 0.0)
    tr.a_e[:, 2] += -2.0 * _pulse(tau, 3.1, 3.7) + 3.5 * _pulse(tau, 3.6, 4.1)
    tr.a_e[:, 2] += -1.0 * _pulse(tau, 6.6, 7.6) + 2.2 * _pulse(tau, 7.6, 8.1)
    tr.a_e[:, 0] = np.where(walk1, 0.5 * np.sin(2 * math.pi * 2.0 * tau + p1), 0.0)
    tr.pitch = 0.2 * _pulse(tau, 3.1, 4.1) - 0.12 * _pulse(tau, 6.6, 8.0)
    tr.roll = 0.04 * np.sin(2 * math.pi * 1.0 * tau + p1)
    ramp = np.clip(tau / 3.0, 0.0, 1.0) * np.where(tau > 4.5, 0.2, 1.0)
    tr.m_e[:, 0] = 1.2 * ramp * np.sin(2 * math.pi * 0.9 * tau + p0)
    tr.m_e[:, 2] = 1.2 * ramp * np.sin(2 * math.pi * 1.2 * tau + p1)
    return tr


def _segment_tracks(seg: Segment, tau: np.ndarray, rng, scenario: Scenario) -> _SegmentTracks:
    kind = seg.kind
    p = seg.params
    if kind == "Walk":
        return _walk_tracks(tau, rng, amp=float(p.get("amp", 2.0)), freq=float(p.get("freq", 2.0)))
    if kind == "Stairs":
        return _stairs_tracks(tau, rng)
    if kind == "SitDown":
        return _sitdown_tracks(tau, rng, float(p.get("mag_fluct", 0.0)))
    if kind == "Idle":
        return _idle_tracks(tau, rng)
    if kind == "EngineStart":
        return _engine_tracks(tau, rng, float(p.get("amplitude", 3.0)), scenario.mag_field)
    if kind == "BusBoard":
        return _busboard_tracks(tau, rng)
    if kind == "Drive":
        return _drive_tracks(
            tau,
            rng,
            duration=seg.duration_s,
            bump_rate=float(p.get("bump_rate", DEFAULT_CONFIG.bump_rate_per_s)),
            seat=str(p.get("seat", "Front")),
            lag_s=float(p.get("lag_s", 0.6)),
            driveaway=bool(p.get("driveaway", True)),
        )
    if kind in ("EnterVehicleLeft", "EnterVehicleRight"):
        pocket = scenario.pocket
        if kind == "EnterVehicleRight":
            # build the mirrored-left twin, then flip the finished samples
            pocket = "LeftPocket" if pocket == "RightPocket" else "RightPocket"
        tr = _enter_tracks(tau, rng, pocket, float(p.get("mag_fluct", 2.8)))
        tr.mirror = kind == "EnterVehicleRight"
        return tr
    raise InvalidScenario(f"unknown segment kind {kind!r}")


def _gyro_from_quats(qs: np.ndarray, dt: float) -> np.ndarray:
    """Body rates that rotate q[i] into q[i+1] over dt (last repeats)."""
    return quat.body_rates(qs, dt)


def generate(scenario: Scenario, with_truth: bool = False):
    """Build (Trace, labels) for a scenario; optionally append GroundTruth."""
    rate = scenario.rate_hz
    step_ms = round(1000.0 / rate)
    dt = step_ms / 1000.0
    field_vec = np.asarray(scenario.mag_field, dtype=float)

    pitches: List[np.ndarray] = []
    rolls: List[np.ndarray] = []
    yaws: List[np.ndarray] = []
    a_es: List[np.ndarray] = []
    m_es: List[np.ndarray] = []
    mirrors: List[np.ndarray] = []
    spans: List[Tuple[int, int, ActivityLabel]] = []

    bump_times: List[float] = []
    offset = 0
    for idx, seg in enumerate(scenario.segments):
        n = round(seg.duration_s * rate)
        if n < 1:
            raise InvalidScenario(f"segment {idx} too short at {rate} Hz")
        tau = np.arange(n) / rate
        rng = np.random.default_rng([scenario.seed, idx, 3])
        tr = _segment_tracks(seg, tau, rng, scenario)
        pitches.append(tr.pitch)
        rolls.append(tr.roll)
        yaws.append(tr.yaw)
        a_es.append(tr.a_e)
        m_es.append(tr.m_e + field_vec[None, :])
        mirrors.append(np.full(n, tr.mirror))
        spans.append((offset * step_ms, (offset + n) * step_ms, _SEGMENT_LABEL[seg.kind]))
        bump_times.extend(offset / rate + tb for tb in tr.bump_times)
        offset += n

    pitch = np.concatenate(pitches)
    roll = np.concatenate(rolls)
    yaw = np.concatenate(yaws)
    a_e = np.vstack(a_es)
    m_e = np.vstack(m_es)
    mirror = np.concatenate(mirrors)
    total = pitch.shape[0]
    t_ms = np.arange(total, dtype=np.int64) * step_ms

    qs = quat.from_zyx_many(yaw, pitch, -roll)
    gyro = _gyro_from_quats(qs, dt)

    gravity = np.array([0.0, 0.0, STANDARD_GRAVITY])
    accel = quat.rotate_inverse_many(qs, a_e + gravity[None, :])
    mag = quat.rotate_inverse_many(qs, m_e)

    # per-segment channel noise from independent streams
    offset = 0
    for idx, seg in enumerate(scenario.segments):
        n = round(seg.duration_s * rate)
        sl = slice(offset, offset + n)
        if scenario.noise_accel > 0:
            accel[sl] += np.random.default_rng([scenario.seed, idx, 0]).normal(
                0.0, scenario.noise_accel, (n, 3)
            )
        if scenario.noise_mag > 0:
            mag[sl] += np.random.default_rng([scenario.seed, idx, 1]).normal(
                0.0, scenario.noise_mag, (n, 3)
            )
        if scenario.noise_gyro > 0:
            gyro[sl] += np.random.default_rng([scenario.seed, idx, 2]).normal(
                0.0, scenario.noise_gyro, (n, 3)
            )
        offset += n

    # mirror the finished right-side entry samples (lateral flip; gyro is axial)
    flip = mirror.astype(bool)
    accel[flip, 1] *= -1.0
    mag[flip, 1] *= -1.0
    gyro[flip, 0] *= -1.0
    gyro[flip, 2] *= -1.0

    last_t = int(t_ms[-1])
    labels = tuple(
        LabelSpan(start, min(end, last_t), label)
        for start, end, label in spans
        if start < last_t
    )
    trace = Trace(t_ms, accel, mag, gyro, rate, labels)
    if not with_truth:
        return trace, labels

    euler = np.column_stack([pitch, roll, yaw])
    q_truth = qs.copy()
    # mirrored rotation axis is axial: (x, y, z) -> (-x, y, -z)
    q_truth[flip, 1] *= -1.0
    q_truth[flip, 3] *= -1.0
    euler_t = euler.copy()
    euler_t[flip, 1] *= -1.0
    euler_t[flip, 2] *= -1.0
    a_e_t = a_e.copy()
    a_e_t[flip, 1] *= -1.0
    m_e_t = m_e.copy()
    m_e_t[flip, 1] *= -1.0
    truth = GroundTruth(
        q=q_truth,
        lin_accel_efc=a_e_t,
        euler=euler_t,
        mag_efc=m_e_t,
        bump_times_s=tuple(bump_times),
    )
    return trace, labels, truth


def mirror_body_channels(trace: Trace) -> Trace:
    """Left-right mirror of a trace: flip lateral polar and axial gyro channels."""
    accel = trace.accel.copy()
    mag = trace.mag.copy()
    gyro = trace.gyro.copy()
    accel[:, 1] *= -1.0
    mag[:, 1] *= -1.0
    gyro[:, 0] *= -1.0
    gyro[:, 2] *= -1.0
    return Trace(trace.t_ms.copy(), accel, mag, gyro, trace.nominal_rate_hz, trace.labels)


def tumbling_trace(
    seed: int,
    duration_s: float = 60.0,
    rate_hz: float = DEFAULT_CONFIG.rate_hz,
    noise_accel: float = 0.05,
    noise_mag: float = 0.1,
    noise_gyro: float = 0.005,
    mag_field: Tuple[float, float, float] = NOMINAL_MAG_FIELD,
) -> Tuple[Trace, np.ndarray]:
    """Slow random attitude motion with exact truth, for filter accuracy tests.

    Returns (trace, q_truth[n, 4]); no linear acceleration, so the gravity
    direction stays observable throughout.
    """
    rng = np.random.default_rng([seed, 101])
    n = round(duration_s * rate_hz)
    dt = 1.0 / rate_hz
    tau = np.arange(n) * dt
    def track(scale, count=3):
        out = np.zeros(n)
        for _ in range(count):
            f = rng.uniform(0.02, 0.15)
            ph = rng.uniform(0, 2 * math.pi)
            out += rng.uniform(0.3, 1.0) * np.sin(2 * math.pi * f * tau + ph)
        return scale * out / count
    pitch = track(0.45)
    roll = track(0.45)
    yaw = track(0.9)
    qs = quat.from_zyx_many(yaw, pitch, -roll)
    gyro = _gyro_from_quats(qs, dt)
    gravity = np.array([0.0, 0.0, STANDARD_GRAVITY])
    field_vec = np.asarray(mag_field, dtype=float)
    accel = quat.rotate_inverse_many(qs, np.tile(gravity, (n, 1)))
    mag = quat.rotate_inverse_many(qs, np.tile(field_vec, (n, 1)))
    accel += np.random.default_rng([seed, 102]).normal(0, noise_accel, (n, 3))
    mag += np.random.default_rng([seed, 103]).normal(0, noise_mag, (n, 3))
    gyro += np.random.default_rng([seed, 104]).normal(0, noise_gyro, (n, 3))
    t_ms = np.arange(n, dtype=np.int64) * round(1000.0 / rate_hz)
    return Trace(t_ms, accel, mag, gyro, rate_hz), qs


# ---------------------------------------------------------------------------
# keystroke logs

# Two-component gamma mixtures matched to published inter-key statistics:
# normal mean 536.55 / SD 327.03 ms with ~90% of intervals under 800 ms,
# distracted mean 742.42 / SD 528.68 ms with fewer than 70% under 800 ms
# (word bursts separated by watch-the-road pauses).
_KEY_MIX = {
    "Normal": {"p_fast": 0.88, "fast": (450.0, 150.0), "slow": (1171.25, 518.1325), "typo": 50},
    "Distracted": {"p_fast": 0.7, "fast": (450.0, 200.0), "slow": (1424.7333, 416.2574), "typo": 30},
}


def _gamma_params(mean: float, sd: float) -> Tuple[float, float]:
    shape = (mean / sd) ** 2
    scale = sd * sd / mean
    return shape, scale


def generate_keystrokes(kind: str, n_letters: int, seed: int) -> KeystrokeLog:
    """Synthetic typing log for one session; deterministic given the seed."""
    if kind not in _KEY_MIX:
        raise InvalidScenario(f"unknown keystroke class {kind!r}")
    mix = _KEY_MIX[kind]
    rng = np.random.default_rng([seed, 7])
    k_fast, th_fast = _gamma_params(*mix["fast"])
    k_slow, th_slow = _gamma_params(*mix["slow"])
    events: List[Tuple[int, str]] = []
    t = 0.0
    events.append((0, "letter"))
    for _ in range(n_letters - 1):
        if rng.uniform() < mix["p_fast"]:
            gap = rng.gamma(k_fast, th_fast)
        else:
            gap = rng.gamma(k_slow, th_slow)
        # a typo correction lands between letters without moving the letters
        if rng.uniform() < 1.0 / mix["typo"]:
            events.append((round(t + 0.3 * gap), "backspace"))
        t += gap
        events.append((round(t), "letter"))
    return KeystrokeLog(tuple(events))


# ---------------------------------------------------------------------------
# scenario files and presets


def scenario_to_bytes(scenario: Scenario) -> bytes:
    from .trace_io import write_sections

    header = {
        "seed": str(scenario.seed),
        "pocket": scenario.pocket,
        "noise_accel": repr(scenario.noise_accel),
        "noise_mag": repr(scenario.noise_mag),
        "noise_gyro": repr(scenario.noise_gyro),
        "rate_hz": repr(scenario.rate_hz),
        "mag_field": " ".join(repr(v) for v in scenario.mag_field),
    }
    sections = []
    for i, seg in enumerate(scenario.segments):
        fields = {"kind": seg.kind, "duration_s": repr(seg.duration_s)}
        for key in sorted(seg.params):
            fields[key] = str(seg.params[key])
        sections.append((f"segment {i}", fields))
    return write_sections("scenario", header, sections)


def scenario_from_bytes(data: bytes) -> Scenario:
    from .errors import SchemaVersionMismatch
    from .trace_io import read_sections

    kind, header, sections = read_sections(data)
    if kind != "scenario":
        raise SchemaVersionMismatch(f"expected kind 'scenario', got {kind!r}")
    segments = []
    for name, fields in sections:
        params: Dict[str, object] = {}
        for key, value in fields.items():
            if key in ("kind", "duration_s"):
                continue
            try:
                params[key] = float(value) if "." in value or "e" in value else int(value)
            except ValueError:
                params[key] = value
        segments.append(Segment(fields["kind"], float(fields["duration_s"]), params))
    mf = tuple(float(v) for v in header.get("mag_field", "30.0 0.0 40.0").split())
    return Scenario(
        seed=int(header["seed"]),
        segments=tuple(segments),
        pocket=header.get("pocket", "LeftPocket"),
        noise_accel=float(header.get("noise_accel", 0.12)),
        noise_mag=float(header.get("noise_mag", 0.2)),
        noise_gyro=float(header.get("noise_gyro", 0.01)),
        rate_hz=float(header.get("rate_hz", 20.0)),
        mag_field=mf,
    )


def activity_scenario(kind: str, seed: int, duration_s: float | None = None) -> Scenario:
    """Single-segment scenario at the kind's typical duration."""
    durations = {
        "Walk": 12.0,
        "Stairs": 12.0,
        "SitDown": 4.0,
        "Idle": 12.0,
        "BusBoard": 10.0,
        "EnterVehicleLeft": 5.5,
        "EnterVehicleRight": 5.5,
    }
    dur = duration_s if duration_s is not None else durations[kind]
    return Scenario(seed=seed, segments=(Segment(kind, dur),))


def walk_and_sit_scenario(seed: int, mag_fluct: float = 0.9) -> Scenario:
    """Indoor walk-to-a-chair-and-sit; the classic vehicle-entry confusable."""
    return Scenario(
        seed=seed,
        segments=(
            Segment("Idle", 1.5),
            Segment("Walk", 3.0),
            Segment("SitDown", 3.5, {"mag_fluct": mag_fluct}),
            Segment("Idle", 2.0),
        ),
    )


def entry_scenario(side: str, pocket: str, seed: int, walk_s: float = 5.0) -> Scenario:
    kind = "EnterVehicleLeft" if side == "Left" else "EnterVehicleRight"
    return Scenario(
        seed=seed,
        segments=(
            Segment("Idle", 1.5),
            Segment("Walk", walk_s),
            Segment(kind, 5.5),
            Segment("Idle", 3.0),
        ),
        pocket=pocket,
    )


def ride_scenario(
    seed: int,
    side: str,
    seat: str,
    pocket: str = "LeftPocket",
    engine_amplitude: float | None = None,
    drive_s: float = 90.0,
    bump_rate: float = 0.05,
) -> Scenario:
    """Walk up, enter, idle, engine start, drive; the full ride template."""
    if engine_amplitude is None:
        engine_amplitude = 3.0 if seat == "Front" else 0.3
    kind = "EnterVehicleLeft" if side == "Left" else "EnterVehicleRight"
    return Scenario(
        seed=seed,
        segments=(
            Segment("Idle", 2.0),
            Segment("Walk", 6.0),
            Segment(kind, 5.5),
            Segment("Idle", 5.0),
            Segment("EngineStart", 2.0, {"amplitude": engine_amplitude}),
            Segment("Drive", drive_s, {"seat": seat, "bump_rate": bump_rate}),
        ),
        pocket=pocket,
    )
