"""Fusion rules, metrics, and the end-to-end streaming pass."""

import math

import numpy as np
import pytest

from texive import simulator as sim
from texive.errors import EmptyInput, ModelNotTrained, NoEntryEvidence
from texive.localize import RowVerdict, SideVerdict
from texive.pipeline import (
    Evidence,
    Models,
    compute_metrics,
    fuse,
    metrics_from_counts,
    run_pipeline,
)
from texive.texting import TextingClass, TextingVerdict


def evidence(side="Left", side_conf=0.9, row="Front", source="EngineSpike",
             row_conf=0.8, entry_conf=1.0, texting=None, moving=True):
    return Evidence(
        entered_vehicle=True,
        entry_confidence=entry_conf,
        entry_t_ms=10_000,
        side=SideVerdict(side=side, confidence=side_conf, pocket="LeftPocket"),
        side_t_ms=10_000,
        row=RowVerdict(row=row, source=source, confidence=row_conf),
        row_t_ms=20_000,
        texting=texting,
        vehicle_moving=moving,
    )


class TestFuse:
    def test_left_front_is_driver(self):
        verdict = fuse(evidence())
        assert verdict.role == "Driver"
        assert verdict.confidence == pytest.approx(0.9 * 0.8)

    def test_right_side_is_passenger_regardless_of_row(self):
        for row in ("Front", "Back"):
            assert fuse(evidence(side="Right", row=row)).role == "Passenger"

    def test_left_back_is_passenger(self):
        assert fuse(evidence(row="Back")).role == "Passenger"

    def test_missing_row_discounts_driver(self):
        verdict = fuse(evidence(row="Back", source="None", row_conf=0.0))
        assert verdict.role == "Driver"
        assert verdict.confidence == pytest.approx(0.9 * 0.5)

    def test_right_hand_drive_mirrors(self):
        lhd = fuse(evidence(side="Left"), region="LeftHandDrive")
        rhd = fuse(evidence(side="Right"), region="RightHandDrive")
        assert lhd.role == rhd.role == "Driver"
        assert lhd.confidence == rhd.confidence
        assert fuse(evidence(side="Left"), region="RightHandDrive").role == "Passenger"

    def test_distracted_needs_driver_and_motion(self):
        distracted = TextingVerdict(label=TextingClass.Distracted, confidence=0.9)
        assert fuse(evidence(texting=distracted)).distracted is True
        assert fuse(evidence(texting=distracted, moving=False)).distracted is False
        assert fuse(evidence(side="Right", texting=distracted)).distracted is False

    def test_requires_entry(self):
        with pytest.raises(NoEntryEvidence):
            fuse(Evidence(entered_vehicle=False))

    def test_pure_function_of_contents(self):
        a = fuse(evidence())
        b = fuse(evidence())
        assert a == b


class TestMetrics:
    def test_reference_confusion_table(self):
        report = metrics_from_counts(tp=38, fp=46, fn=3, tn=250)
        assert report.precision == pytest.approx(0.4524, abs=1e-4)
        assert report.accuracy == pytest.approx(0.8546, abs=1e-4)
        assert report.sensitivity == pytest.approx(38 / 41, abs=1e-9)
        assert any("84.46" in note for note in report.notes)

    def test_perfect_predictor(self):
        report = compute_metrics(["D", "P", "D"], ["D", "P", "D"], positive="D")
        assert (report.sensitivity, report.specificity, report.precision,
                report.accuracy) == (1.0, 1.0, 1.0, 1.0)

    def test_all_negative_has_na_precision(self):
        report = compute_metrics(["P", "P", "P", "P"], ["D", "P", "D", "P"], positive="D")
        assert report.accuracy == 0.5
        assert math.isnan(report.precision)
        assert report.to_dict()["precision"] == "n/a"

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            compute_metrics([], [], positive="D")
        with pytest.raises(EmptyInput):
            compute_metrics(["D"], [], positive="D")


class TestRunPipeline:
    def test_driver_ride(self, trained_models):
        sc = sim.ride_scenario(501, side="Left", seat="Front")
        trace, labels = sim.generate(sc)
        result = run_pipeline(trace, trained_models)
        assert result.verdict.role == "Driver"
        entry_end = next(s.end_ms for s in labels
                         if s.label.name == "EnteringVehicle")
        first_role = next(e for e in result.events if e.kind == "role")
        assert first_role.t_ms <= entry_end + (4.5 + 2 * 0.5) * 1000

    def test_pure_walking_not_in_vehicle(self, trained_models):
        trace, _ = sim.generate(sim.Scenario(
            seed=502, segments=(sim.Segment("Idle", 2.0), sim.Segment("Walk", 30.0))))
        result = run_pipeline(trace, trained_models)
        assert result.verdict.role == "NotInVehicle"
        assert not any(e.kind == "entry_confirmed" for e in result.events)

    def test_back_seat_ride_is_passenger(self, trained_models):
        sc = sim.ride_scenario(503, side="Left", seat="Back")
        trace, _ = sim.generate(sc)
        result = run_pipeline(trace, trained_models)
        assert result.verdict.role == "Passenger"
        assert result.evidence.row.row == "Back"

    def test_texting_distraction_flag(self, trained_models):
        sc = sim.ride_scenario(504, side="Left", seat="Front")
        trace, _ = sim.generate(sc)
        log = sim.generate_keystrokes("Distracted", 300, seed=504)
        result = run_pipeline(trace, trained_models, keystrokes=log)
        assert result.verdict.role == "Driver"
        assert result.verdict.distracted is True
        normal = sim.generate_keystrokes("Normal", 300, seed=504)
        result2 = run_pipeline(trace, trained_models, keystrokes=normal)
        assert result2.verdict.distracted is False

    def test_memory_constant_in_trace_length(self, trained_models):
        peaks = []
        for dur in (60.0, 600.0):
            sc = sim.ride_scenario(505, side="Left", seat="Front", drive_s=dur)
            trace, _ = sim.generate(sc)
            peaks.append(run_pipeline(trace, trained_models).stats.peak_buffered_samples)
        assert peaks[0] == peaks[1]

    def test_event_log_deterministic(self, trained_models):
        sc = sim.ride_scenario(506, side="Right", seat="Front")
        trace, _ = sim.generate(sc)
        a = run_pipeline(trace, trained_models)
        b = run_pipeline(trace, trained_models)
        assert [e.to_json() for e in a.events] == [e.to_json() for e in b.events]
        assert a.verdict == b.verdict

    def test_models_required(self):
        trace, _ = sim.generate(sim.activity_scenario("Walk", 1))
        with pytest.raises(ModelNotTrained):
            run_pipeline(trace, Models(activity=None, side=None))

    def test_off_grid_trace_resampled(self, trained_models):
        sc = sim.ride_scenario(507, side="Left", seat="Front", drive_s=40.0)
        trace, _ = sim.generate(sc)
        # drop every 7th sample to break the uniform grid
        keep = np.array([i % 7 != 3 for i in range(len(trace))])
        from texive.trace_io import Trace

        ragged = Trace(trace.t_ms[keep], trace.accel[keep], trace.mag[keep],
                       trace.gyro[keep], trace.nominal_rate_hz, ())
        result = run_pipeline(ragged, trained_models)
        assert result.verdict.role == "Driver"
