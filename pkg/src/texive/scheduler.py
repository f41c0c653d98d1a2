"""Duty-cycle planning: daily activity transition model, geometric-halving
entry sampling, and the Poisson bump-detection probability/cost model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .activity import LabelLike, label_name, label_sort_key
from .config import DEFAULT_CONFIG
from .errors import EmptyData, InvalidParams, SchemaVersionMismatch
from . import trace_io


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Observable Markov chain over activity labels (row-stochastic)."""

    states: Tuple[str, ...]
    initial: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        if abs(float(self.initial.sum()) - 1.0) > 1e-9:
            raise InvalidParams("initial probabilities must sum to 1")
        if np.max(np.abs(self.T.sum(axis=1) - 1.0)) > 1e-9:
            raise InvalidParams("transition rows must sum to 1")

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransitionModel):
            return NotImplemented
        return (
            self.states == other.states
            and np.array_equal(self.initial, other.initial)
            and np.array_equal(self.T, other.T)
        )


def fit_transitions(sequences: Iterable[Sequence[LabelLike]]) -> TransitionModel:
    """Count transitions with add-one smoothing; initial vector from first events."""
    seqs = [[label_name(x) for x in seq] for seq in sequences]
    seqs = [s for s in seqs if s]
    if not seqs or not any(len(s) >= 2 for s in seqs):
        raise EmptyData("need at least one sequence with >= 2 events")
    states = sorted({x for s in seqs for x in s}, key=label_sort_key)
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    counts = np.zeros((n, n))
    first = np.zeros(n)
    for seq in seqs:
        first[index[seq[0]]] += 1
        for a, b in zip(seq, seq[1:]):
            counts[index[a], index[b]] += 1
    T = (counts + 1.0) / (counts.sum(axis=1, keepdims=True) + n)
    initial = first / first.sum()
    return TransitionModel(tuple(states), initial, T)


@dataclass(frozen=True)
class SamplingPlan:
    """Adaptive duty-cycle plan: entry-check intervals plus commute windows.

    commute_windows entries are (time_of_day_s, variance_s, alpha): high-rate
    sampling begins at time_of_day - alpha * variance.
    """

    intervals_s: Tuple[float, ...]
    commute_windows: Tuple[Tuple[float, float, float], ...] = ()
    f_commute_hz: float = DEFAULT_CONFIG.rate_hz
    f_idle_hz: float = 1.0 / 300.0  # one walking check every five minutes

    def __post_init__(self):
        if any(b >= a for a, b in zip(self.intervals_s, self.intervals_s[1:])):
            raise InvalidParams("plan intervals must be strictly decreasing")

    def commute_start_s(self, window: int = 0) -> float:
        t_day, t_var, alpha = self.commute_windows[window]
        return t_day - alpha * t_var


def make_sampling_plan(
    t_mean_s: float,
    sigma_s: float,
    commute_windows: Iterable[Tuple[float, float, float]] = (),
    rate_hz: float = DEFAULT_CONFIG.rate_hz,
    f_idle_hz: float = 1.0 / 300.0,
) -> SamplingPlan:
    return SamplingPlan(
        intervals_s=tuple(plan_entry_sampling(t_mean_s, sigma_s, rate_hz)),
        commute_windows=tuple(commute_windows),
        f_commute_hz=rate_hz,
        f_idle_hz=f_idle_hz,
    )


def plan_entry_sampling(
    t_mean_s: float,
    sigma_s: float,
    rate_hz: float = DEFAULT_CONFIG.rate_hz,
) -> List[float]:
    """Geometric-halving check schedule: t_i = (T - sigma) / 2^i.

    Stops once an interval falls below one sample period; the sum of the
    schedule never exceeds (T - sigma), so checks always finish before the
    expected entry with margin sigma.
    """
    if not (t_mean_s > sigma_s >= 0.0):
        raise InvalidParams(f"need T > sigma >= 0, got T={t_mean_s}, sigma={sigma_s}")
    period = 1.0 / rate_hz
    intervals = []
    t = (t_mean_s - sigma_s) * 0.5
    while t >= period:
        intervals.append(t)
        t *= 0.5
    return intervals


def poisson_pk(lam: float, tau: float, k: int) -> float:
    """P(k arrivals in tau) for rate lam, evaluated in log space."""
    if lam <= 0 or tau <= 0:
        raise InvalidParams("lam and tau must be positive")
    if k < 0:
        raise InvalidParams("k must be a non-negative integer")
    lt = lam * tau
    if k == 0:
        return math.exp(-lt)
    return math.exp(k * math.log(lt) - lt - math.lgamma(k + 1))


@dataclass(frozen=True)
class BumpModel:
    """Duty-cycled bump watch: on for w seconds, asleep for s, rate lam."""

    lam: float       # bumps per second
    on_s: float      # detection window w
    sleep_s: float   # sleep window s
    power: float     # energy per unit time while sampling, C

    def __post_init__(self):
        if not (self.lam > 0 and self.on_s > 0 and self.sleep_s > 0 and self.power > 0):
            raise InvalidParams("all BumpModel parameters must be positive")


def detection_cycle_prob(model: BumpModel) -> float:
    """(1 - e^{-w lam}) * s / (s + w), exactly as published."""
    return (1.0 - math.exp(-model.on_s * model.lam)) * model.sleep_s / (
        model.sleep_s + model.on_s
    )


def expected_cost(model: BumpModel, i: int, t_s: float) -> float:
    """Cycle-probability-weighted energy C((i-1)(w+s) + t)."""
    if i < 1:
        raise InvalidParams("cycle index starts at 1")
    return detection_cycle_prob(model) * model.power * (
        (i - 1) * (model.on_s + model.sleep_s) + t_s
    )


def simulate_cycle_detection(model: BumpModel, n_cycles: int, seed: int) -> float:
    """Monte-Carlo companion to detection_cycle_prob.

    Empirical fraction of duty cycles whose on-window contains at least one
    Poisson arrival. This converges to 1 - e^{-w lam}, which differs from
    the closed-form cycle probability by the s/(s+w) factor; both numbers
    are reported side by side rather than asserted equal.
    """
    rng = np.random.default_rng([seed, 13])
    hits = rng.poisson(model.lam * model.on_s, n_cycles)
    return float(np.mean(hits >= 1))


def serialize_transitions(model: TransitionModel) -> bytes:
    header = {"states": " ".join(model.states)}
    fields = {"initial": trace_io.format_vector(model.initial)}
    for i, state in enumerate(model.states):
        fields[f"row {state}"] = trace_io.format_vector(model.T[i])
    return trace_io.write_sections("transitions", header, [("transitions", fields)])


def parse_transitions(data: bytes) -> TransitionModel:
    kind, header, sections = trace_io.read_sections(data)
    if kind != "transitions":
        raise SchemaVersionMismatch(f"expected kind 'transitions', got {kind!r}")
    states = tuple(header["states"].split())
    fields = dict(sections[0][1]) if sections else {}
    initial = trace_io.parse_vector(fields["initial"])
    T = np.vstack([trace_io.parse_vector(fields[f"row {s}"]) for s in states])
    return TransitionModel(states, initial, T)
