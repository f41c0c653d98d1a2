"""Gaussian naive Bayes activity recognition with online updates.

Also houses the vehicle-confirmation filters (magnetic fluctuation during
the approach, sustained horizontal acceleration afterwards) that separate
entering a vehicle from an ordinary indoor sit-down, and the consecutive-
label latch that turns window classifications into activity events.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import DimensionMismatch, InsufficientExamples, UnknownLabel


class ActivityLabel(enum.Enum):
    """Closed activity vocabulary; definition order is the canonical order."""

    Walking = "Walking"
    EnteringVehicle = "EnteringVehicle"
    SittingDown = "SittingDown"
    Stairs = "Stairs"
    Standing = "Standing"
    GettingOnBus = "GettingOnBus"
    Other = "Other"


_CANONICAL = {label.name: i for i, label in enumerate(ActivityLabel)}

LabelLike = Union[ActivityLabel, str]


def label_name(label: LabelLike) -> str:
    return label.name if isinstance(label, ActivityLabel) else str(label)


def label_sort_key(name: str) -> Tuple[int, str]:
    """Known activity labels first (enum order), then any other label."""
    return (_CANONICAL.get(name, len(_CANONICAL)), name)


def _reify(name: str) -> LabelLike:
    return ActivityLabel[name] if name in ActivityLabel.__members__ else name


def _vec(fv) -> np.ndarray:
    if hasattr(fv, "as_array"):
        return np.asarray(fv.as_array(), dtype=np.float64)
    return np.asarray(fv, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class ClassStats:
    label: str
    count: int
    prior: float
    mean: np.ndarray
    var: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassStats):
            return NotImplemented
        return (
            self.label == other.label
            and self.count == other.count
            and self.prior == other.prior
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.var, other.var)
        )


@dataclass(frozen=True, eq=False)
class ActivityModel:
    """Per-class Gaussian parameters; classes stored sorted by label name."""

    classes: Tuple[ClassStats, ...]
    feature_dim: int

    def __post_init__(self):
        total = sum(c.prior for c in self.classes)
        if self.classes and abs(total - 1.0) > 1e-9:
            raise InsufficientExamples(f"priors sum to {total}, not 1")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ActivityModel):
            return NotImplemented
        return self.feature_dim == other.feature_dim and self.classes == other.classes

    def labels(self) -> List[str]:
        return [c.label for c in self.classes]

    def class_for(self, label: LabelLike) -> Optional[ClassStats]:
        name = label_name(label)
        for c in self.classes:
            if c.label == name:
                return c
        return None


Posterior = Dict[LabelLike, float]


def train(
    examples: Iterable[Tuple[object, LabelLike]],
    variance_floor: float = DEFAULT_CONFIG.variance_floor,
) -> ActivityModel:
    """Fit per-class Gaussians (population variance, floored) and priors."""
    groups: Dict[str, List[np.ndarray]] = {}
    for fv, label in examples:
        groups.setdefault(label_name(label), []).append(_vec(fv))
    if len(groups) < 2:
        raise InsufficientExamples(f"need >= 2 classes, got {len(groups)}")
    for name, vecs in groups.items():
        if len(vecs) < 2:
            raise InsufficientExamples(f"class {name!r} has {len(vecs)} examples, need >= 2")
    dims = {v.shape[0] for vecs in groups.values() for v in vecs}
    if len(dims) != 1:
        raise DimensionMismatch(f"inconsistent feature lengths {sorted(dims)}")
    dim = dims.pop()
    total = sum(len(v) for v in groups.values())
    classes = []
    for name in sorted(groups):
        stack = np.vstack(groups[name])
        mean = stack.mean(axis=0)
        var = np.maximum(stack.var(axis=0), variance_floor)
        classes.append(ClassStats(name, len(groups[name]), len(groups[name]) / total, mean, var))
    return ActivityModel(tuple(classes), dim)


def _log_likelihoods(model: ActivityModel, x: np.ndarray) -> np.ndarray:
    out = np.empty(len(model.classes))
    for i, c in enumerate(model.classes):
        d = x - c.mean
        out[i] = math.log(c.prior) - 0.5 * float(
            np.sum(np.log(2.0 * math.pi * c.var) + d * d / c.var)
        )
    return out


def classify(model: ActivityModel, fv) -> Tuple[LabelLike, Posterior]:
    """Return (argmax label, normalized posterior); ties break canonically."""
    x = _vec(fv)
    if x.shape[0] != model.feature_dim:
        raise DimensionMismatch(f"feature length {x.shape[0]} != model {model.feature_dim}")
    logs = _log_likelihoods(model, x)
    peak = float(np.max(logs))
    weights = np.exp(logs - peak)
    probs = weights / float(np.sum(weights))
    posterior: Posterior = {
        _reify(c.label): float(p) for c, p in zip(model.classes, probs)
    }
    order = sorted(range(len(model.classes)), key=lambda i: label_sort_key(model.classes[i].label))
    best = order[0]
    for i in order[1:]:
        if logs[i] > logs[best]:
            best = i
    return _reify(model.classes[best].label), posterior


def update(
    model: ActivityModel,
    fv,
    label: LabelLike,
    allow_new_class: bool = False,
    variance_floor: float = DEFAULT_CONFIG.variance_floor,
) -> ActivityModel:
    """Count-weighted streaming mean/variance update; returns a new model."""
    x = _vec(fv)
    if x.shape[0] != model.feature_dim:
        raise DimensionMismatch(f"feature length {x.shape[0]} != model {model.feature_dim}")
    name = label_name(label)
    if model.class_for(name) is None:
        if not allow_new_class:
            raise UnknownLabel(f"label {name!r} not in model")
        stats = [c for c in model.classes]
        stats.append(ClassStats(name, 1, 0.0, x.copy(), np.full_like(x, variance_floor)))
        stats.sort(key=lambda c: c.label)
    else:
        stats = []
        for c in model.classes:
            if c.label != name:
                stats.append(c)
                continue
            n1 = c.count + 1
            delta = x - c.mean
            mean = c.mean + delta / n1
            m2 = c.var * c.count + delta * (x - mean)
            var = np.maximum(m2 / n1, variance_floor)
            stats.append(ClassStats(name, n1, 0.0, mean, var))
    total = sum(c.count for c in stats)
    stats = [
        ClassStats(c.label, c.count, c.count / total, c.mean, c.var) for c in stats
    ]
    return ActivityModel(tuple(stats), model.feature_dim)


# ---------------------------------------------------------------------------
# vehicle confirmation filters


def sustained_horizontal_run_ms(post_accel: Sequence, threshold: float) -> int:
    """Longest stretch (ms) where horizontal EFC acceleration stays above threshold."""
    best = 0
    run_start = None
    for s in post_accel:
        t = s.t_ms
        a = s.linear_accel_efc
        horiz = math.hypot(float(a[0]), float(a[1]))
        if horiz >= threshold:
            if run_start is None:
                run_start = t
            best = max(best, t - run_start)
        else:
            run_start = None
    return best


def confirm_in_vehicle(
    window_mag_var: float,
    post_accel: Sequence,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> bool:
    """True when the approach magnetics fluctuated or the vehicle drove away.

    window_mag_var is the variance of |mag| (uT^2) over the approach window;
    post_accel is the EFC stream following the candidate sit-down.
    """
    if window_mag_var > config.mag_var_threshold:
        return True
    run = sustained_horizontal_run_ms(post_accel, config.drive_accel_threshold)
    return run >= config.drive_sustain_s * 1000.0


class EventLatch:
    """Turn per-window labels into events after k consecutive identical labels."""

    def __init__(self, k: int = DEFAULT_CONFIG.consecutive_labels):
        self.k = k
        self._streak_label: Optional[str] = None
        self._streak = 0
        self._latched: Optional[str] = None

    def push(self, label: LabelLike) -> Optional[LabelLike]:
        """Feed one window label; returns the label when a new event fires."""
        name = label_name(label)
        if name == self._streak_label:
            self._streak += 1
        else:
            self._streak_label = name
            self._streak = 1
            if name != self._latched:
                self._latched = None
        if self._streak >= self.k and self._latched != name:
            self._latched = name
            return _reify(name)
        return None
