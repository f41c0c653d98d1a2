"""Trace, keystroke, and model file parsing/serialization.

All serializers round-trip bit-exactly: floats are written with repr() so
that parse(serialize(x)) == x, and model files are canonical (equal models
produce identical bytes).

Formats:
  trace CSV   header "t_ms,ax,ay,az,mx,my,mz,gx,gy,gz"; trailing comment
              block carries "# rate_hz,<hz>" and "# label,<start>,<end>,<name>".
  trace JSONL one flat object per sample plus a final meta object with
              "rate_hz" and "labels".
  keystrokes  CSV header "t_ms,kind", kind in {letter, backspace}.
  models      versioned text, first line "texive-model/1".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .activity import ActivityLabel, ActivityModel, ClassStats
from .errors import (
    EmptyTrace,
    MalformedRecord,
    NonFiniteValue,
    NonMonotonicTimestamp,
    SchemaVersionMismatch,
)

TRACE_HEADER = "t_ms,ax,ay,az,mx,my,mz,gx,gy,gz"
KEYSTROKE_HEADER = "t_ms,kind"
MODEL_VERSION = "texive-model/1"
KEYSTROKE_KINDS = ("letter", "backspace")


@dataclass(frozen=True)
class SensorSample:
    """One timestamped 9-axis reading in the body frame."""

    t_ms: int
    accel: tuple  # m/s^2
    mag: tuple    # uT
    gyro: tuple   # rad/s


@dataclass(frozen=True)
class LabelSpan:
    start_ms: int
    end_ms: int
    label: ActivityLabel


class Trace:
    """Array-backed sensor trace with optional ground-truth label spans."""

    def __init__(
        self,
        t_ms: np.ndarray,
        accel: np.ndarray,
        mag: np.ndarray,
        gyro: np.ndarray,
        nominal_rate_hz: float = 20.0,
        labels: Sequence[LabelSpan] = (),
    ):
        self.t_ms = np.ascontiguousarray(t_ms, dtype=np.int64)
        self.accel = np.ascontiguousarray(accel, dtype=np.float64)
        self.mag = np.ascontiguousarray(mag, dtype=np.float64)
        self.gyro = np.ascontiguousarray(gyro, dtype=np.float64)
        self.nominal_rate_hz = float(nominal_rate_hz)
        self.labels = tuple(labels)
        self._validate()

    def _validate(self) -> None:
        n = self.t_ms.shape[0]
        if n == 0:
            raise EmptyTrace("trace has no samples")
        for arr, name in ((self.accel, "accel"), (self.mag, "mag"), (self.gyro, "gyro")):
            if arr.shape != (n, 3):
                raise MalformedRecord(0, f"{name} shape {arr.shape} != ({n}, 3)")
            if not np.all(np.isfinite(arr)):
                raise NonFiniteValue(f"non-finite value in {name}")
        if self.t_ms[0] < 0:
            raise NonMonotonicTimestamp(f"negative timestamp {self.t_ms[0]}")
        if n > 1 and not np.all(np.diff(self.t_ms) > 0):
            bad = int(np.argmin(np.diff(self.t_ms) > 0))
            raise NonMonotonicTimestamp(
                f"t_ms not strictly increasing at sample {bad + 1}"
            )
        if not (self.nominal_rate_hz > 0):
            raise MalformedRecord(0, "nominal_rate_hz must be positive")
        prev_end = None
        for span in sorted(self.labels, key=lambda s: s.start_ms):
            if not (0 <= span.start_ms < span.end_ms):
                raise MalformedRecord(0, f"bad label span {span}")
            if span.start_ms < self.t_ms[0] or span.end_ms > self.t_ms[-1]:
                raise MalformedRecord(0, f"label span {span} outside trace")
            if prev_end is not None and span.start_ms < prev_end:
                raise MalformedRecord(0, f"overlapping label span {span}")
            prev_end = span.end_ms

    def __len__(self) -> int:
        return self.t_ms.shape[0]

    def sample(self, i: int) -> SensorSample:
        return SensorSample(
            int(self.t_ms[i]),
            tuple(self.accel[i]),
            tuple(self.mag[i]),
            tuple(self.gyro[i]),
        )

    @property
    def samples(self) -> Iterator[SensorSample]:
        return (self.sample(i) for i in range(len(self)))

    def duration_ms(self) -> int:
        return int(self.t_ms[-1] - self.t_ms[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            np.array_equal(self.t_ms, other.t_ms)
            and np.array_equal(self.accel, other.accel)
            and np.array_equal(self.mag, other.mag)
            and np.array_equal(self.gyro, other.gyro)
            and self.nominal_rate_hz == other.nominal_rate_hz
            and self.labels == other.labels
        )


@dataclass(frozen=True)
class KeystrokeLog:
    """Ordered (t_ms, kind) typing events; kind is 'letter' or 'backspace'."""

    events: tuple

    def __post_init__(self):
        prev = None
        for t, kind in self.events:
            if kind not in KEYSTROKE_KINDS:
                raise MalformedRecord(0, f"unknown keystroke kind {kind!r}")
            if prev is not None and t < prev:
                raise NonMonotonicTimestamp(f"keystroke time {t} < {prev}")
            prev = t

    def letters(self) -> list:
        return [t for t, kind in self.events if kind == "letter"]

    def backspaces(self) -> list:
        return [t for t, kind in self.events if kind == "backspace"]


# ---------------------------------------------------------------------------
# trace parsing / serialization


def _parse_float(text: str, line_no: int, col: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRecord(line_no, f"bad float {text!r} in column {col}") from None
    if not math.isfinite(value):
        raise NonFiniteValue(f"line {line_no}: non-finite {col}={text}")
    return value


def _parse_int(text: str, line_no: int, col: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise MalformedRecord(line_no, f"bad integer {text!r} in column {col}") from None


def _label_from_name(name: str, line_no: int) -> ActivityLabel:
    try:
        return ActivityLabel[name]
    except KeyError:
        raise MalformedRecord(line_no, f"unknown activity label {name!r}") from None


def parse_trace(data: bytes, fmt: str = "csv") -> Trace:
    """Parse a trace from CSV or JSONL bytes."""
    if fmt == "csv":
        return _parse_trace_csv(data)
    if fmt == "jsonl":
        return _parse_trace_jsonl(data)
    raise MalformedRecord(0, f"unknown trace format {fmt!r}")


def _parse_trace_csv(data: bytes) -> Trace:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(0, f"not UTF-8: {exc}") from None
    lines = text.split("\n")
    if not lines or lines[0].strip("\r") != TRACE_HEADER:
        raise MalformedRecord(1, f"expected header {TRACE_HEADER!r}")

    rows = []
    labels = []
    rate_hz = 20.0
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip("\r")
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("label,"):
                parts = body.split(",")
                if len(parts) != 4:
                    raise MalformedRecord(line_no, f"bad label comment {line!r}")
                labels.append(
                    LabelSpan(
                        _parse_int(parts[1], line_no, "start_ms"),
                        _parse_int(parts[2], line_no, "end_ms"),
                        _label_from_name(parts[3], line_no),
                    )
                )
            elif body.startswith("rate_hz,"):
                rate_hz = _parse_float(body.split(",", 1)[1], line_no, "rate_hz")
            continue
        parts = line.split(",")
        if len(parts) != 10:
            raise MalformedRecord(line_no, f"expected 10 fields, got {len(parts)}")
        t = _parse_int(parts[0], line_no, "t_ms")
        vals = [_parse_float(p, line_no, col) for p, col in zip(parts[1:], TRACE_HEADER.split(",")[1:])]
        rows.append((t, vals))

    if not rows:
        raise EmptyTrace("no samples in CSV")
    t_ms = np.array([r[0] for r in rows], dtype=np.int64)
    chans = np.array([r[1] for r in rows])
    return Trace(t_ms, chans[:, 0:3], chans[:, 3:6], chans[:, 6:9], rate_hz, labels)


def _parse_trace_jsonl(data: bytes) -> Trace:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(0, f"not UTF-8: {exc}") from None
    rows = []
    labels = []
    rate_hz = 20.0
    cols = TRACE_HEADER.split(",")[1:]
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"bad JSON: {exc}") from None
        if "t_ms" in obj:
            try:
                vals = [float(obj[c]) for c in cols]
            except KeyError as exc:
                raise MalformedRecord(line_no, f"missing field {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise NonFiniteValue(f"line {line_no}: non-finite channel value")
            rows.append((int(obj["t_ms"]), vals))
        else:
            rate_hz = float(obj.get("rate_hz", rate_hz))
            for item in obj.get("labels", []):
                labels.append(
                    LabelSpan(int(item[0]), int(item[1]), _label_from_name(item[2], line_no))
                )
    if not rows:
        raise EmptyTrace("no samples in JSONL")
    t_ms = np.array([r[0] for r in rows], dtype=np.int64)
    chans = np.array([r[1] for r in rows])
    return Trace(t_ms, chans[:, 0:3], chans[:, 3:6], chans[:, 6:9], rate_hz, labels)


def serialize_trace(trace: Trace, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        out = [TRACE_HEADER]
        for i in range(len(trace)):
            row = [str(int(trace.t_ms[i]))]
            row += [repr(float(v)) for v in trace.accel[i]]
            row += [repr(float(v)) for v in trace.mag[i]]
            row += [repr(float(v)) for v in trace.gyro[i]]
            out.append(",".join(row))
        out.append(f"# rate_hz,{trace.nominal_rate_hz!r}")
        for span in trace.labels:
            out.append(f"# label,{span.start_ms},{span.end_ms},{span.label.name}")
        return ("\n".join(out) + "\n").encode("utf-8")
    if fmt == "jsonl":
        cols = TRACE_HEADER.split(",")[1:]
        lines = []
        for i in range(len(trace)):
            vals = list(trace.accel[i]) + list(trace.mag[i]) + list(trace.gyro[i])
            obj = {"t_ms": int(trace.t_ms[i])}
            obj.update({c: float(v) for c, v in zip(cols, vals)})
            lines.append(json.dumps(obj, sort_keys=True))
        meta = {
            "rate_hz": trace.nominal_rate_hz,
            "labels": [[s.start_ms, s.end_ms, s.label.name] for s in trace.labels],
        }
        lines.append(json.dumps(meta, sort_keys=True))
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise MalformedRecord(0, f"unknown trace format {fmt!r}")


def resample(trace: Trace, rate_hz: float) -> Trace:
    """Linearly interpolate onto a uniform grid of round(1000/rate_hz) ms."""
    if len(trace) < 2:
        raise EmptyTrace("resample needs at least 2 samples")
    if not rate_hz > 0:
        raise MalformedRecord(0, "rate_hz must be positive")
    step = round(1000.0 / rate_hz)
    if step < 1:
        raise MalformedRecord(0, f"rate {rate_hz} Hz finer than 1 ms resolution")
    t0 = int(trace.t_ms[0])
    t1 = int(trace.t_ms[-1])
    grid = np.arange(t0, t1 + 1, step, dtype=np.int64)
    src_t = trace.t_ms.astype(np.float64)
    dst_t = grid.astype(np.float64)

    def interp(arr: np.ndarray) -> np.ndarray:
        return np.column_stack([np.interp(dst_t, src_t, arr[:, j]) for j in range(3)])

    last = int(grid[-1])
    labels = []
    for span in trace.labels:
        if span.start_ms >= last:
            continue
        labels.append(LabelSpan(span.start_ms, min(span.end_ms, last), span.label))
    return Trace(grid, interp(trace.accel), interp(trace.mag), interp(trace.gyro), rate_hz, labels)


# ---------------------------------------------------------------------------
# keystroke logs


def parse_keystrokes(data: bytes) -> KeystrokeLog:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(0, f"not UTF-8: {exc}") from None
    lines = text.split("\n")
    if not lines or lines[0].strip("\r") != KEYSTROKE_HEADER:
        raise MalformedRecord(1, f"expected header {KEYSTROKE_HEADER!r}")
    events = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip("\r")
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedRecord(line_no, f"expected 2 fields, got {len(parts)}")
        t = _parse_int(parts[0], line_no, "t_ms")
        kind = parts[1]
        if kind not in KEYSTROKE_KINDS:
            raise MalformedRecord(line_no, f"unknown kind {kind!r}")
        events.append((t, kind))
    return KeystrokeLog(tuple(events))


def serialize_keystrokes(log: KeystrokeLog) -> bytes:
    out = [KEYSTROKE_HEADER]
    out += [f"{t},{kind}" for t, kind in log.events]
    return ("\n".join(out) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# model files: generic section format


def format_vector(vec) -> str:
    return " ".join(repr(float(v)) for v in vec)


def parse_vector(text: str) -> np.ndarray:
    if not text.strip():
        return np.empty(0)
    return np.array([float(v) for v in text.split()])


def write_sections(kind: str, header: dict, sections: Iterable) -> bytes:
    """Render the versioned model text: header key/values then [section] blocks."""
    out = [MODEL_VERSION, f"kind = {kind}"]
    for key, value in header.items():
        out.append(f"{key} = {value}")
    for name, fields in sections:
        out.append(f"[{name}]")
        for key, value in fields.items():
            out.append(f"{key} = {value}")
    return ("\n".join(out) + "\n").encode("utf-8")


def read_sections(data: bytes):
    """Parse the model text; returns (kind, header_dict, [(name, fields_dict)])."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(0, f"not UTF-8: {exc}") from None
    lines = text.split("\n")
    if not lines or lines[0].strip() != MODEL_VERSION:
        raise SchemaVersionMismatch(
            f"expected version tag {MODEL_VERSION!r}, got {lines[0].strip()!r}"
        )
    header: dict = {}
    sections: list = []
    current = header
    kind = None
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = {}
            sections.append((line[1:-1], current))
            continue
        if "=" not in line:
            raise MalformedRecord(line_no, f"expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if current is header and key == "kind":
            kind = value
        else:
            current[key] = value
    if kind is None:
        raise MalformedRecord(2, "missing 'kind' header")
    return kind, header, sections


def serialize_model(model: ActivityModel) -> bytes:
    """Canonical bytes for a trained classifier (classes sorted by label)."""
    sections = []
    for cls in sorted(model.classes, key=lambda c: c.label):
        sections.append(
            (
                f"class {cls.label}",
                {
                    "count": str(cls.count),
                    "prior": repr(cls.prior),
                    "mean": format_vector(cls.mean),
                    "var": format_vector(cls.var),
                },
            )
        )
    return write_sections("activity", {"feature_dim": str(model.feature_dim)}, sections)


def parse_model(data: bytes) -> ActivityModel:
    kind, header, sections = read_sections(data)
    if kind != "activity":
        raise SchemaVersionMismatch(f"expected kind 'activity', got {kind!r}")
    try:
        dim = int(header["feature_dim"])
    except KeyError:
        raise MalformedRecord(2, "missing feature_dim header") from None
    classes = []
    for name, fields in sections:
        if not name.startswith("class "):
            raise MalformedRecord(0, f"unexpected section {name!r}")
        classes.append(
            ClassStats(
                label=name[len("class "):],
                count=int(fields["count"]),
                prior=float(fields["prior"]),
                mean=parse_vector(fields["mean"]),
                var=parse_vector(fields["var"]),
            )
        )
    return ActivityModel(tuple(classes), dim)
