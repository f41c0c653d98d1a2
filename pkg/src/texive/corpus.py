"""Standard synthetic corpora: model training and evaluation harnesses.

Everything here is seeded and deterministic; the same builders back the
CLI's synthetic training/evaluation paths and the verification suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import features as feat
from . import simulator as sim
from .activity import ActivityLabel, ActivityModel, EventLatch, classify, train
from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import NotStatic
from .localize import SideModel, train_side_model
from .orientation import EfcStream, ekf_init, ekf_init_coarse, estimate_mag_reference, filter_trace
from .pipeline import MetricsReport, Models, RoleVerdict, compute_metrics, run_pipeline
from .trace_io import Trace

SIDE_CASES = (
    ("Left", "LeftPocket"),
    ("Left", "RightPocket"),
    ("Right", "LeftPocket"),
    ("Right", "RightPocket"),
)


def filter_whole_trace(trace: Trace, config: PipelineConfig = DEFAULT_CONFIG) -> EfcStream:
    """Initialize on the leading window and filter the remainder."""
    init_n = min(len(trace), max(2, round(config.init_window_s * config.rate_hz)))
    init_samples = [trace.sample(i) for i in range(init_n)]
    try:
        state = ekf_init(init_samples, config)
    except NotStatic:
        state = ekf_init_coarse(init_samples, config)
    config = config.with_overrides(mag_reference=estimate_mag_reference(init_samples))
    _, stream = filter_trace(state, trace, config, start=init_n)
    return stream


def window_features(
    trace: Trace,
    config: PipelineConfig = DEFAULT_CONFIG,
    step_s: Optional[float] = None,
):
    """(t_end_ms, FeatureVector, Window) per sliding window of a trace."""
    stream = filter_whole_trace(trace, config)
    step = step_s if step_s is not None else config.step_s
    out = []
    for w in feat.sliding_windows(
        stream,
        duration_ms=round(config.window_s * 1000),
        step_ms=round(step * 1000),
        rate_hz=config.rate_hz,
    ):
        out.append((int(w.t_ms[-1]), feat.extract_features(w, config.dct_coeffs), w))
    return out


def _overlap_ms(w_start: int, w_end: int, s_start: int, s_end: int) -> int:
    return max(0, min(w_end, s_end) - max(w_start, s_start))


def training_windows(
    trace: Trace,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> List[Tuple[feat.FeatureVector, ActivityLabel]]:
    """Feature/label pairs for windows dominated by one ground-truth span.

    A window trains as the span covering the most of it, provided that
    coverage reaches 60% of the window; boundary windows with no dominant
    activity are skipped.
    """
    rows = []
    window_ms = round(config.window_s * 1000)
    for t_end, fv, w in window_features(trace, config):
        w_start = int(w.t_ms[0])
        best_span = None
        best_ov = 0
        for span in trace.labels:
            ov = _overlap_ms(w_start, w_start + window_ms, span.start_ms, span.end_ms)
            if ov > best_ov:
                best_ov = ov
                best_span = span
        if best_span is not None and best_ov >= 0.6 * window_ms:
            rows.append((fv, best_span.label))
    return rows


# ---------------------------------------------------------------------------
# activity model


def activity_training_scenarios(seed: int, per_class: int = 10) -> List[sim.Scenario]:
    scens = []
    base = seed * 10_000
    for i in range(per_class):
        scens.append(sim.activity_scenario("Walk", base + 10 + i))
        scens.append(sim.activity_scenario("Stairs", base + 200 + i))
        scens.append(
            sim.Scenario(
                seed=base + 300 + i,
                segments=(
                    sim.Segment("Idle", 2.5),
                    sim.Segment("SitDown", 4.0),
                    sim.Segment("Idle", 2.5),
                ),
            )
        )
        scens.append(sim.activity_scenario("Idle", base + 400 + i))
        scens.append(sim.activity_scenario("BusBoard", base + 500 + i))
    # entries cover both sides and pockets
    for i in range(per_class):
        side = "Left" if i % 2 == 0 else "Right"
        pocket = sim.POCKETS[(i // 2) % 2]
        scens.append(sim.entry_scenario(side, pocket, base + 600 + i))
    return scens


def build_activity_model(
    seed: int,
    config: PipelineConfig = DEFAULT_CONFIG,
    per_class: int = 10,
) -> ActivityModel:
    rows = []
    for sc in activity_training_scenarios(seed, per_class):
        trace, _ = sim.generate(sc)
        rows.extend(training_windows(trace, config))
    return train(rows, config.variance_floor)


def classify_trace(
    trace: Trace,
    model: ActivityModel,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> Tuple[Optional[ActivityLabel], List[Tuple[int, ActivityLabel, float]], List[Tuple[int, ActivityLabel]]]:
    """Majority window label, per-window labels, and latched events."""
    votes: Dict[ActivityLabel, int] = {}
    per_window = []
    latched = []
    latch = EventLatch(config.consecutive_labels)
    for t_end, fv, w in window_features(trace, config):
        label, posterior = classify(model, fv)
        per_window.append((t_end, label, fv.mag_var))
        votes[label] = votes.get(label, 0) + 1
        fired = latch.push(label)
        if fired is not None:
            latched.append((t_end, fired))
    if not per_window:
        return None, [], []
    best = max(sorted(votes, key=lambda l: str(l)), key=lambda l: votes[l])
    return best, per_window, latched


@dataclass(frozen=True)
class ActivityEvalResult:
    accuracy: float
    n_total: int
    n_correct: int
    entry_fp_unfiltered: int
    entry_fp_filtered: int
    entry_tp_unfiltered: int
    entry_tp_filtered: int


def eval_activity_corpus(
    model: ActivityModel,
    seed: int,
    config: PipelineConfig = DEFAULT_CONFIG,
    n_primary: int = 20,
    n_other: int = 100,
    n_enter: int = 20,
) -> ActivityEvalResult:
    """Scenario-level recognition accuracy plus the confirmation-filter effect.

    Corpus: n_primary each of walking / sitting-down / stairs, n_other mixed
    other behaviors, and n_enter vehicle entries used to check that the
    magnetic/acceleration filter removes entry false positives without
    losing true positives.
    """
    base = seed * 100_000
    cases: List[Tuple[sim.Scenario, ActivityLabel]] = []
    for i in range(n_primary):
        cases.append((sim.activity_scenario("Walk", base + i), ActivityLabel.Walking))
        cases.append(
            (
                sim.Scenario(
                    seed=base + 1000 + i,
                    segments=(
                        sim.Segment("Idle", 2.5),
                        sim.Segment("SitDown", 4.0),
                        sim.Segment("Idle", 2.5),
                    ),
                ),
                ActivityLabel.SittingDown,
            )
        )
        cases.append((sim.activity_scenario("Stairs", base + 2000 + i), ActivityLabel.Stairs))
    for i in range(n_other):
        slot = i % 5
        if slot in (0, 1):
            cases.append((sim.activity_scenario("Idle", base + 3000 + i), ActivityLabel.Standing))
        elif slot in (2, 3):
            cases.append(
                (sim.activity_scenario("BusBoard", base + 4000 + i), ActivityLabel.GettingOnBus)
            )
        else:
            cases.append(
                (sim.walk_and_sit_scenario(base + 6000 + i), ActivityLabel.SittingDown)
            )
    enters: List[sim.Scenario] = []
    for i in range(n_enter):
        side = "Left" if i % 2 == 0 else "Right"
        pocket = sim.POCKETS[(i // 2) % 2]
        enters.append(sim.entry_scenario(side, pocket, base + 5000 + i))

    n_correct = 0
    fp_unf = fp_fil = 0
    for sc, truth in cases:
        trace, _ = sim.generate(sc)
        best, per_window, latched = classify_trace(trace, model, config)
        if best == truth:
            n_correct += 1
        entry_hits = [t for t, lbl in latched if lbl is ActivityLabel.EnteringVehicle]
        if entry_hits:
            fp_unf += 1
            if _entry_confirmed(trace, entry_hits[0], per_window, config):
                fp_fil += 1
    tp_unf = tp_fil = 0
    for sc in enters:
        trace, _ = sim.generate(sc)
        _, per_window, latched = classify_trace(trace, model, config)
        entry_hits = [t for t, lbl in latched if lbl is ActivityLabel.EnteringVehicle]
        if entry_hits:
            tp_unf += 1
            if _entry_confirmed(trace, entry_hits[0], per_window, config):
                tp_fil += 1
    total = len(cases)
    return ActivityEvalResult(
        accuracy=n_correct / total,
        n_total=total,
        n_correct=n_correct,
        entry_fp_unfiltered=fp_unf,
        entry_fp_filtered=fp_fil,
        entry_tp_unfiltered=tp_unf,
        entry_tp_filtered=tp_fil,
    )


def _entry_confirmed(
    trace: Trace,
    latch_t: int,
    per_window: Sequence[Tuple[int, ActivityLabel, float]],
    config: PipelineConfig,
) -> bool:
    from .activity import confirm_in_vehicle

    mag_var = 0.0
    for t_end, _, mv in per_window:
        if t_end == latch_t:
            mag_var = mv
            break
    stream = filter_whole_trace(trace, config)
    idx = np.searchsorted(stream.t_ms, latch_t)
    post = [stream.sample(i) for i in range(int(idx), len(stream))]
    return confirm_in_vehicle(mag_var, post, config)


# ---------------------------------------------------------------------------
# side model


def entry_euler_windows(
    trace: Trace,
    config: PipelineConfig = DEFAULT_CONFIG,
    min_cover: float = 0.8,
):
    """Pitch/roll arrays for every window mostly covered by the entry span.

    Multiple offsets per entry teach the side model the alignment jitter it
    will see from the online latch.
    """
    window_ms = round(config.window_s * 1000)
    span = next(s for s in trace.labels if s.label is ActivityLabel.EnteringVehicle)
    out = []
    best = None
    best_overlap = -1
    for t_end, fv, w in window_features(trace, config, step_s=config.fusion_step_s):
        w_start = int(w.t_ms[0])
        ov = _overlap_ms(w_start, w_start + window_ms, span.start_ms, span.end_ms)
        if ov > best_overlap:
            best_overlap = ov
            best = w
        if ov >= min_cover * window_ms:
            out.append((w.euler[:, 0], w.euler[:, 1]))
    if not out and best is not None:
        out.append((best.euler[:, 0], best.euler[:, 1]))
    return out


def entry_euler_series(trace: Trace, config: PipelineConfig = DEFAULT_CONFIG):
    """Pitch/roll arrays for one representative entry window."""
    windows = entry_euler_windows(trace, config)
    return windows[len(windows) // 2]


def side_cases(seed: int, per_case: int = 10) -> List[Tuple[sim.Scenario, str, str]]:
    out = []
    base = seed * 1_000_000
    for c, (side, pocket) in enumerate(SIDE_CASES):
        for i in range(per_case):
            out.append((sim.entry_scenario(side, pocket, base + 100 * c + i), side, pocket))
    return out


def build_side_model(
    seed: int,
    config: PipelineConfig = DEFAULT_CONFIG,
    per_case: int = 10,
) -> SideModel:
    examples = []
    for sc, side, pocket in side_cases(seed, per_case):
        trace, _ = sim.generate(sc)
        for pitch, roll in entry_euler_windows(trace, config):
            examples.append((pitch, roll, side, pocket))
    return train_side_model(examples, config.dct_coeffs)


def eval_side_corpus(
    model: SideModel,
    seed: int,
    config: PipelineConfig = DEFAULT_CONFIG,
    per_case: int = 10,
) -> Tuple[float, List[Tuple[str, str, str]]]:
    from .localize import detect_side

    details = []
    correct = 0
    cases = side_cases(seed, per_case)
    for sc, side, pocket in cases:
        trace, _ = sim.generate(sc)
        pitch, roll = entry_euler_series(trace, config)
        verdict = detect_side(pitch, roll, model)
        details.append((side, pocket, verdict.side))
        if verdict.side == side:
            correct += 1
    return correct / len(cases), details


def build_models(seed: int, config: PipelineConfig = DEFAULT_CONFIG) -> Models:
    return Models(
        activity=build_activity_model(seed, config),
        side=build_side_model(seed + 1, config),
    )


# ---------------------------------------------------------------------------
# end-to-end driver/passenger corpus


@dataclass(frozen=True)
class RideCase:
    scenario: sim.Scenario
    role: str  # ground truth under LeftHandDrive
    entry_end_ms: int


def driver_corpus(seed: int, n: int = 39) -> List[RideCase]:
    """Ride scenarios mixing sides, rows, pockets, and engine visibility."""
    base = seed * 10_000_000
    cases: List[RideCase] = []
    # (side, seat, truth role under LeftHandDrive)
    mix = [
        ("Left", "Front", "Driver"),
        ("Right", "Front", "Passenger"),
        ("Left", "Front", "Driver"),
        ("Right", "Back", "Passenger"),
        ("Left", "Back", "Passenger"),
    ]
    for i in range(n):
        side, seat, role = mix[i % len(mix)]
        pocket = sim.POCKETS[i % 2]
        sc = sim.ride_scenario(
            base + i,
            side=side,
            seat=seat,
            pocket=pocket,
            drive_s=60.0 + 10.0 * (i % 3),
            bump_rate=0.05,
        )
        entry_end = round((2.0 + 6.0 + 5.5) * 1000)
        cases.append(RideCase(scenario=sc, role=role, entry_end_ms=entry_end))
    return cases


@dataclass(frozen=True)
class DriverEvalResult:
    report: MetricsReport
    latencies_ms: List[int]
    verdicts: List[RoleVerdict]
    peak_buffered: List[int]


def eval_driver_corpus(
    models: Models,
    seed: int,
    config: PipelineConfig = DEFAULT_CONFIG,
    n: int = 39,
) -> DriverEvalResult:
    predictions = []
    truths = []
    latencies = []
    verdicts = []
    peaks = []
    for case in driver_corpus(seed, n):
        trace, _ = sim.generate(case.scenario)
        result = run_pipeline(trace, models, config)
        predictions.append(result.verdict.role)
        truths.append(case.role)
        verdicts.append(result.verdict)
        peaks.append(result.stats.peak_buffered_samples)
        role_events = [e for e in result.events if e.kind == "role"]
        if role_events:
            latencies.append(int(role_events[0].t_ms - case.entry_end_ms))
    report = compute_metrics(predictions, truths, positive="Driver")
    return DriverEvalResult(
        report=report, latencies_ms=latencies, verdicts=verdicts, peak_buffered=peaks
    )
