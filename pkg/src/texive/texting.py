"""Texting-while-driving classification from inter-key timing and typo rate.

Distracted typing shows longer, burstier inter-letter intervals (type a
word, watch the road, type again) and more frequent corrections. The
decision threshold sits midway between the published class means, 536.55 ms
(normal) and 742.42 ms (distracted): 639.485 ms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import TooFewEvents
from .trace_io import KeystrokeLog


class TextingClass(enum.Enum):
    Normal = "Normal"
    Distracted = "Distracted"


@dataclass(frozen=True)
class TypingStats:
    mean_interval_ms: float
    sd_interval_ms: float
    frac_under_800ms: float
    inputs_per_typo: float  # letters between consecutive corrections; inf if none
    n_intervals: int


@dataclass(frozen=True)
class TextingVerdict:
    label: TextingClass
    confidence: float


def compute_stats(log: KeystrokeLog) -> TypingStats:
    """Interval statistics over letters; backspaces only feed the typo rate."""
    letters = log.letters()
    if len(letters) < 2:
        raise TooFewEvents(f"need >= 2 letter events, got {len(letters)}")
    iv = np.diff(np.asarray(letters, dtype=np.float64))
    typos = 0
    prev_backspace = False
    for _, kind in log.events:
        if kind == "backspace":
            if not prev_backspace:
                typos += 1
            prev_backspace = True
        else:
            prev_backspace = False
    return TypingStats(
        mean_interval_ms=float(iv.mean()),
        sd_interval_ms=float(iv.std()),
        frac_under_800ms=float(np.mean(iv <= 800.0)),
        inputs_per_typo=len(letters) / typos if typos else math.inf,
        n_intervals=int(iv.shape[0]),
    )


def classify_texting(
    stats: TypingStats,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> TextingVerdict:
    """Mean-interval threshold with a typo-rate tiebreak near the boundary."""
    if stats.n_intervals < 10:
        raise TooFewEvents(f"need >= 10 intervals, got {stats.n_intervals}")
    distance = stats.mean_interval_ms - config.texting_threshold_ms
    distracted = distance > 0.0
    if abs(distance) <= config.texting_border_ms and stats.inputs_per_typo < config.typo_flip_threshold:
        distracted = True
    confidence = min(1.0, abs(distance) / config.texting_conf_scale_ms)
    label = TextingClass.Distracted if distracted else TextingClass.Normal
    return TextingVerdict(label=label, confidence=confidence)
