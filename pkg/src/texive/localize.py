"""Seat localization: entry side from rotation signatures, row from the
engine-start magnetic spike or the double-bump amplitude ratio.

Side detection is a learned classifier over DCT features of the pitch and
roll series spanning the entry. Training is mirror-augmented: every example
also contributes its left-right mirror with flipped labels, so mirrored
signatures classify to mirrored verdicts exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import activity, features, trace_io
from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import EmptyEvidence, ModelNotTrained, SchemaVersionMismatch

SIDES = ("Left", "Right")
POCKETS = ("LeftPocket", "RightPocket")


@dataclass(frozen=True)
class SideVerdict:
    side: str
    confidence: float
    pocket: str = "Unknown"


@dataclass(frozen=True)
class RowVerdict:
    row: str                # Front | Back
    source: str             # EngineSpike | Bump | None
    confidence: float


@dataclass(frozen=True)
class SpikeDetection:
    detected: bool
    amplitude: float
    t_ms: int


@dataclass(frozen=True)
class BumpEvent:
    t_front_ms: int
    t_back_ms: int
    amp_first: float
    amp_second: float

    @property
    def ratio(self) -> float:
        return self.amp_second / self.amp_first


# ---------------------------------------------------------------------------
# side detection


def _case_label(side: str, pocket: str) -> str:
    return f"{side}|{pocket}"


def _mirror_case(side: str, pocket: str) -> Tuple[str, str]:
    return (
        "Right" if side == "Left" else "Left",
        "RightPocket" if pocket == "LeftPocket" else "LeftPocket",
    )


@dataclass(frozen=True, eq=False)
class SideModel:
    """Naive Bayes over concatenated pitch/roll DCT features."""

    gnb: activity.ActivityModel
    k: int

    def __eq__(self, other) -> bool:
        if not isinstance(other, SideModel):
            return NotImplemented
        return self.k == other.k and self.gnb == other.gnb


def train_side_model(
    examples: Sequence[Tuple[Sequence[float], Sequence[float], str, str]],
    k: int = DEFAULT_CONFIG.dct_coeffs,
    augment_mirror: bool = True,
) -> SideModel:
    """Fit the four side-by-pocket entry cases.

    examples: (pitch_series, roll_series, side, pocket) per observed entry.
    With augment_mirror every example is also used as its mirror twin, which
    both doubles the data and makes the model exactly mirror-symmetric.
    """
    rows = []
    for pitch, roll, side, pocket in examples:
        fv = features.euler_features(pitch, roll, k)
        rows.append((fv, _case_label(side, pocket)))
        if augment_mirror:
            mfv = features.euler_features(pitch, -np.asarray(roll, dtype=float), k)
            rows.append((mfv, _case_label(*_mirror_case(side, pocket))))
    gnb = activity.train(rows)
    return SideModel(gnb=gnb, k=k)


def detect_side(
    pitch: Sequence[float],
    roll: Sequence[float],
    model: Optional[SideModel],
) -> SideVerdict:
    """Classify the entry side from the window's rotation signature."""
    if model is None:
        raise ModelNotTrained("side model required")
    fv = features.euler_features(pitch, roll, model.k)
    label, posterior = activity.classify(model.gnb, fv)
    side, pocket = str(label).split("|")
    side_mass = sum(p for lbl, p in posterior.items() if str(lbl).startswith(side + "|"))
    return SideVerdict(side=side, confidence=float(side_mass), pocket=pocket)


def serialize_side_model(model: SideModel) -> bytes:
    sections = []
    for cls in sorted(model.gnb.classes, key=lambda c: c.label):
        sections.append(
            (
                f"class {cls.label}",
                {
                    "count": str(cls.count),
                    "prior": repr(cls.prior),
                    "mean": trace_io.format_vector(cls.mean),
                    "var": trace_io.format_vector(cls.var),
                },
            )
        )
    header = {"feature_dim": str(model.gnb.feature_dim), "k": str(model.k)}
    return trace_io.write_sections("side", header, sections)


def parse_side_model(data: bytes) -> SideModel:
    kind, header, sections = trace_io.read_sections(data)
    if kind != "side":
        raise SchemaVersionMismatch(f"expected kind 'side', got {kind!r}")
    classes = []
    for name, fields in sections:
        classes.append(
            activity.ClassStats(
                label=name[len("class "):],
                count=int(fields["count"]),
                prior=float(fields["prior"]),
                mean=trace_io.parse_vector(fields["mean"]),
                var=trace_io.parse_vector(fields["var"]),
            )
        )
    gnb = activity.ActivityModel(tuple(classes), int(header["feature_dim"]))
    return SideModel(gnb=gnb, k=int(header["k"]))


# ---------------------------------------------------------------------------
# engine-start magnetic spike


class SpikeScanner:
    """Streaming spike detector over a |mag| series.

    Fires when a value exceeds the trailing baseline (mean over the oldest
    baseline span in the buffer) by the threshold and decays back within the
    decay span; latches after the first detection.
    """

    def __init__(self, rate_hz: float, config: PipelineConfig = DEFAULT_CONFIG):
        self.threshold = config.spike_threshold
        self.baseline_n = max(1, round(config.spike_baseline_s * rate_hz))
        self.decay_n = max(1, round(config.spike_decay_s * rate_hz))
        size = self.baseline_n + 2 * self.decay_n
        self.buf: deque = deque(maxlen=size)
        self.times: deque = deque(maxlen=size)
        self.result: Optional[SpikeDetection] = None

    def push(self, t_ms: int, value: float) -> Optional[SpikeDetection]:
        self.buf.append(float(value))
        self.times.append(int(t_ms))
        if self.result is not None or len(self.buf) < self.buf.maxlen:
            return None
        vals = list(self.buf)
        baseline = sum(vals[: self.baseline_n]) / self.baseline_n
        lo = self.baseline_n
        hi = self.baseline_n + self.decay_n
        peak_i = lo + int(np.argmax(vals[lo:hi]))
        amplitude = vals[peak_i] - baseline
        if amplitude < self.threshold:
            return None
        tail = vals[peak_i + 1 : peak_i + 1 + self.decay_n]
        if not tail or max(tail) > vals[peak_i]:
            return None  # still rising; wait until the crest is in view
        if min(tail) > baseline + 0.5 * amplitude:
            return None
        self.result = SpikeDetection(True, amplitude, int(list(self.times)[peak_i]))
        return self.result


def detect_engine_spike(
    mag_magnitude: Sequence[float],
    rate_hz: float = DEFAULT_CONFIG.rate_hz,
    config: PipelineConfig = DEFAULT_CONFIG,
    t_ms: Optional[Sequence[int]] = None,
) -> SpikeDetection:
    """Batch spike scan; returns a non-detection when nothing qualifies."""
    scanner = SpikeScanner(rate_hz, config)
    step = round(1000.0 / rate_hz)
    for i, v in enumerate(mag_magnitude):
        t = int(t_ms[i]) if t_ms is not None else i * step
        hit = scanner.push(t, float(v))
        if hit is not None:
            return hit
    return SpikeDetection(False, 0.0, -1)


def classify_row_by_spike(
    detection: Optional[SpikeDetection],
    window_observed: bool,
) -> RowVerdict:
    """Spike seen -> Front; clean observed window -> Back; no window -> unknown."""
    if not window_observed:
        return RowVerdict(row="Back", source="None", confidence=0.0)
    if detection is not None and detection.detected:
        return RowVerdict(row="Front", source="EngineSpike", confidence=0.9)
    return RowVerdict(row="Back", source="EngineSpike", confidence=0.6)


# ---------------------------------------------------------------------------
# bumps and potholes


class BumpTracker:
    """Group vertical-acceleration excursions into per-axle passes and pair
    consecutive passes (front wheel, back wheel) into bump events."""

    def __init__(self, config: PipelineConfig = DEFAULT_CONFIG):
        self.threshold = config.bump_peak_min
        self.merge_ms = round(config.bump_merge_gap_s * 1000)
        self.pair_min_ms = round(config.bump_pair_min_s * 1000)
        self.pair_max_ms = round(config.bump_pair_max_s * 1000)
        self._cur: Optional[List] = None            # [peak_t, peak_amp]
        self._last_active: Optional[int] = None
        self._pending: Optional[Tuple[int, float]] = None

    def _close_region(self) -> Optional[BumpEvent]:
        region = (self._cur[0], self._cur[1])
        self._cur = None
        if self._pending is None:
            self._pending = region
            return None
        lag = region[0] - self._pending[0]
        if lag < self.pair_min_ms:
            if region[1] > self._pending[1]:
                self._pending = (self._pending[0], region[1])
            return None
        if lag > self.pair_max_ms:
            self._pending = region
            return None
        event = BumpEvent(
            t_front_ms=self._pending[0],
            t_back_ms=region[0],
            amp_first=self._pending[1],
            amp_second=region[1],
        )
        self._pending = None
        return event

    def push(self, t_ms: int, vert: float) -> Optional[BumpEvent]:
        mag = abs(float(vert))
        event = None
        if mag >= self.threshold:
            if self._cur is None:
                self._cur = [t_ms, mag]
            elif t_ms - self._last_active > self.merge_ms:
                event = self._close_region()
                self._cur = [t_ms, mag]
            elif mag > self._cur[1]:
                self._cur = [t_ms, mag]
            self._last_active = t_ms
        elif self._cur is not None and t_ms - self._last_active > self.merge_ms:
            event = self._close_region()
        return event

    def flush(self) -> Optional[BumpEvent]:
        if self._cur is not None:
            return self._close_region()
        return None


def detect_bumps(
    vert_accel: Sequence[float],
    t_ms: Optional[Sequence[int]] = None,
    rate_hz: float = DEFAULT_CONFIG.rate_hz,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> List[BumpEvent]:
    """Batch pairing of wheel-pass excursions into BumpEvents."""
    tracker = BumpTracker(config)
    step = round(1000.0 / rate_hz)
    events = []
    for i, v in enumerate(vert_accel):
        t = int(t_ms[i]) if t_ms is not None else i * step
        ev = tracker.push(t, float(v))
        if ev is not None:
            events.append(ev)
    ev = tracker.flush()
    if ev is not None:
        events.append(ev)
    return events


def classify_row_by_bump(
    events: Sequence[BumpEvent],
    config: PipelineConfig = DEFAULT_CONFIG,
) -> RowVerdict:
    """Majority vote over per-event amplitude ratios."""
    if not events:
        raise EmptyEvidence("no bump events")
    back = sum(1 for e in events if e.ratio >= config.bump_ratio_threshold)
    front = len(events) - back
    row = "Back" if back > front else "Front"
    margin = abs(back - front) / len(events)
    return RowVerdict(row=row, source="Bump", confidence=margin)
