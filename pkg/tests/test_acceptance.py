"""Acceptance gate: every shipped claim, one test per criterion.

Each test prints a single PASS line (run with -s to see them inline) and
enforces both the numeric tolerance and the runtime budget.
"""

import json
import math
import time

import numpy as np
import pytest

from texive import corpus, quat
from texive import simulator as sim
from texive.activity import classify, train, update
from texive.cli import main as cli_main
from texive.config import DEFAULT_CONFIG
from texive.features import dct
from texive.localize import detect_bumps, detect_engine_spike, detect_side, classify_row_by_bump
from texive.orientation import OrientationState, ekf_init, ekf_step, filter_trace, to_euler
from texive.pipeline import metrics_from_counts
from texive.scheduler import BumpModel, detection_cycle_prob, expected_cost, plan_entry_sampling, poisson_pk
from texive.texting import classify_texting, compute_stats
from texive.trace_io import SensorSample


def report(n, started, budget_s, detail):
    elapsed = time.perf_counter() - started
    print(f"ACCEPTANCE {n:2d} PASS {detail} [{elapsed:.2f}s / budget {budget_s:.0f}s]")
    assert elapsed < budget_s, f"criterion {n} exceeded its runtime budget"


def test_criterion_01_metrics_arithmetic():
    t0 = time.perf_counter()
    rep = metrics_from_counts(tp=38, fp=46, fn=3, tn=250)
    assert rep.precision * 100 == pytest.approx(45.24, abs=0.01)
    assert rep.accuracy * 100 == pytest.approx(85.46, abs=0.005)
    assert any("84.46" in note for note in rep.notes), "missing reference footnote"
    report(1, t0, 1.0, "confusion arithmetic 45.24% / 85.46% with 84.46% footnote")


def test_criterion_02_formula_fidelity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    for _ in range(20):
        lam = rng.uniform(0.001, 0.5)
        tau = rng.uniform(1.0, 100.0)
        k = int(rng.integers(0, 12))
        w = rng.uniform(1.0, 60.0)
        s = rng.uniform(1.0, 300.0)
        c = rng.uniform(0.1, 10.0)
        i = int(rng.integers(1, 8))
        t = rng.uniform(0.0, w)
        # independent symbolic evaluation of the published expressions
        pk_ref = math.exp(-lam * tau) * (lam * tau) ** k / math.factorial(k)
        pik_ref = (1.0 - math.exp(-w * lam)) * (s / (s + w))
        cost_ref = pik_ref * c * ((i - 1) * (w + s) + t)
        model = BumpModel(lam=lam, on_s=w, sleep_s=s, power=c)
        assert poisson_pk(lam, tau, k) == pytest.approx(pk_ref, rel=1e-12)
        assert detection_cycle_prob(model) == pytest.approx(pik_ref, rel=1e-12)
        assert expected_cost(model, i, t) == pytest.approx(cost_ref, rel=1e-12, abs=1e-300)
    total, k = 0.0, 0
    while True:
        pk = poisson_pk(0.032, 50.0, k)
        total += pk
        if k > 1.6 and pk < 1e-12:
            break
        k += 1
    assert total == pytest.approx(1.0, abs=1e-9)
    report(2, t0, 1.0, "duty-cycle formulas match symbolic evaluation at 1e-12")


def test_criterion_03_sampling_plan():
    t0 = time.perf_counter()
    assert plan_entry_sampling(100.0, 20.0) == [
        40.0, 20.0, 10.0, 5.0, 2.5, 1.25, 0.625, 0.3125, 0.15625, 0.078125,
    ]
    rng = np.random.default_rng(3)
    for _ in range(100):
        t_mean = rng.uniform(0.2, 5000.0)
        sigma = t_mean * rng.uniform(0.0, 0.95)
        plan = plan_entry_sampling(t_mean, sigma)
        assert all(b == 0.5 * a for a, b in zip(plan, plan[1:]))
        if plan:
            assert plan[0] == (t_mean - sigma) * 0.5
    report(3, t0, 1.0, "geometric-halving schedule exact, ratio 1/2 over 100 draws")


def test_criterion_04_dct_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    for n in (16, 64, 90, 256):
        for _ in range(50):
            x = rng.normal(size=n)
            got = dct(x)
            m = np.arange(n)
            for k in range(n):  # direct O(N^2) summation, no shared basis
                scale = math.sqrt((1.0 if k == 0 else 2.0) / n)
                ref = scale * float(np.sum(x * np.cos(math.pi * (2 * m + 1) * k / (2 * n))))
                assert abs(got[k] - ref) < 1e-9
            assert float(np.sum(x * x)) == pytest.approx(float(np.sum(got * got)), abs=1e-9)
    # pure-python spot check keeps the oracle independent of numpy too
    x = rng.normal(size=16)
    got = dct(x)
    for k in range(16):
        scale = math.sqrt((1.0 if k == 0 else 2.0) / 16)
        ref = scale * sum(x[mm] * math.cos(math.pi * (2 * mm + 1) * k / 32) for mm in range(16))
        assert abs(got[k] - ref) < 1e-9
    report(4, t0, 10.0, "orthonormal DCT matches direct summation, Parseval at 1e-9")


def test_criterion_05_ekf_properties():
    t0 = time.perf_counter()
    # (a) unit-norm drift over 1e5 steps of mixed motion
    trace, _ = sim.tumbling_trace(seed=55, duration_s=100_000 / 20.0)
    state = ekf_init([trace.sample(i) for i in range(10)])
    _, stream = filter_trace(state, trace, start=10)
    assert len(stream) >= 100_000 - 10
    assert np.max(np.abs(np.linalg.norm(stream.q_hist, axis=1) - 1.0)) < 1e-9
    # (b) static convergence: 10-degree error closes below 0.5 degrees in 5 s
    tilt = math.radians(10.0) / math.sqrt(2.0)
    q0 = quat.from_zyx(0.0, tilt, -tilt)
    st = OrientationState(q=q0, P=np.eye(3) * math.radians(10.0) ** 2, t_ms=0)
    for i in range(1, 101):
        st = ekf_step(st, SensorSample(50 * i, (0.0, 0.0, 9.81), (30.0, 0.0, 40.0),
                                       (0.0, 0.0, 0.0)))
    euler = to_euler(st.q)
    assert abs(math.degrees(euler.pitch)) < 0.5
    assert abs(math.degrees(euler.roll)) < 0.5
    # (c) rotation isometry on 1000 random vectors
    rng = np.random.default_rng(5)
    for _ in range(1000):
        q = quat.normalize(rng.normal(size=4))
        v = rng.normal(0, 10, 3)
        assert abs(np.linalg.norm(quat.rotate(q, v)) - np.linalg.norm(v)) < 1e-9
    report(5, t0, 30.0, "norm drift <1e-9 over 1e5 steps, 10deg->%.3fdeg in 5s, isometry"
           % abs(math.degrees(euler.pitch)))


def test_criterion_06_naive_bayes_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    for _ in range(100):
        dim = int(rng.integers(2, 8))
        rows = []
        for c in range(int(rng.integers(2, 5))):
            center = rng.normal(0, 3, dim)
            rows += [(center + rng.normal(0, 1, dim), f"C{c}") for _ in range(6)]
        model = train(rows)
        x = rng.normal(0, 3, dim)
        _, posterior = classify(model, x)
        weights = {}
        for cls in model.classes:  # brute-force density product
            p = cls.prior
            for xi, mu, var in zip(x, cls.mean, cls.var):
                p *= math.exp(-((xi - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
            weights[cls.label] = p
        z = sum(weights.values())
        for label, w in weights.items():
            assert posterior[label] == pytest.approx(w / z, abs=1e-9)
    for seed in range(20):  # batch == streaming
        rng2 = np.random.default_rng(seed)
        base = [(rng2.normal(0, 2, 5), "A") for _ in range(7)]
        base += [(rng2.normal(4, 2, 5), "B") for _ in range(6)]
        x = rng2.normal(0, 2, 5)
        batch, stream = train(base + [(x, "A")]), update(train(base), x, "A")
        for lbl in ("A", "B"):
            assert np.max(np.abs(batch.class_for(lbl).mean - stream.class_for(lbl).mean)) < 1e-9
            assert np.max(np.abs(batch.class_for(lbl).var - stream.class_for(lbl).var)) < 1e-9
    report(6, t0, 10.0, "posteriors match density products at 1e-9; Welford == batch")


def test_criterion_07_activity_recognition(activity_model):
    t0 = time.perf_counter()
    res = corpus.eval_activity_corpus(activity_model, seed=2, n_primary=20,
                                      n_other=100, n_enter=20)
    assert res.n_total == 160
    assert res.accuracy >= 0.85
    assert res.entry_fp_filtered == 0
    assert res.entry_tp_filtered == res.entry_tp_unfiltered
    assert res.entry_tp_unfiltered == 20
    report(7, t0, 120.0,
           f"activity accuracy {res.accuracy:.3f} on 160 scenarios; entry FP "
           f"{res.entry_fp_unfiltered}->{res.entry_fp_filtered}, TP {res.entry_tp_filtered}/20")


def test_criterion_08_side_detection(side_model):
    t0 = time.perf_counter()
    accuracy, _ = corpus.eval_side_corpus(side_model, seed=21, per_case=10)
    assert accuracy >= 0.85
    # exact mirror symmetry at the detector
    flips = 0
    for i, (side, pocket) in enumerate(corpus.SIDE_CASES * 3):
        sc = sim.entry_scenario(side, pocket, 9_000 + i)
        trace, _ = sim.generate(sc)
        pitch, roll = corpus.entry_euler_series(trace)
        v = detect_side(pitch, roll, side_model)
        m = detect_side(pitch, -np.asarray(roll), side_model)
        assert {v.side, m.side} == {"Left", "Right"}
        assert v.confidence == m.confidence
        flips += 1
    report(8, t0, 120.0, f"side accuracy {accuracy:.3f} on 40 entries; "
           f"{flips} exact mirror flips")


def test_criterion_09_row_detection():
    t0 = time.perf_counter()
    confusion = {("Front", "Front"): 0, ("Front", "Back"): 0,
                 ("Back", "Front"): 0, ("Back", "Back"): 0}
    for i in range(40):
        seat = "Front" if i < 20 else "Back"
        sc = sim.Scenario(
            seed=90_000 + i,
            segments=(sim.Segment("Drive", 150.0, {"seat": seat, "bump_rate": 0.06,
                      "driveaway": False}),),
        )
        trace, _, truth = sim.generate(sc, with_truth=True)
        assert len(truth.bump_times_s) >= 1
        noisy = truth.lin_accel_efc[:, 2] + np.random.default_rng(i).normal(0, 0.12, len(trace))
        events = detect_bumps(noisy)
        verdict = classify_row_by_bump(events)
        confusion[(seat, verdict.row)] += 1
    assert confusion[("Front", "Front")] == 20
    assert confusion[("Back", "Back")] == 20
    assert confusion[("Front", "Back")] == confusion[("Back", "Front")] == 0
    # engine spikes at both published amplitudes; silence below threshold
    for amp in (3.0, 20.0):
        series = np.full(160, 50.0)
        t = np.arange(160) / 20.0
        mask = (t >= 4.0) & (t <= 4.3)
        series[mask] += amp * 0.5 * (1 - np.cos(2 * math.pi * (t[mask] - 4.0) / 0.3))
        det = detect_engine_spike(series)
        assert det.detected and det.amplitude == pytest.approx(amp, rel=0.1)
    rng = np.random.default_rng(9)
    for _ in range(25):
        flat = rng.uniform(30.0, 60.0) + rng.uniform(0.0, 1.9, 160)
        assert not detect_engine_spike(flat).detected
    report(9, t0, 60.0, "bump confusion 20/0/0/20; spikes at 3 and 20 uT only")


def test_criterion_10_texting():
    t0 = time.perf_counter()
    normal = compute_stats(sim.generate_keystrokes("Normal", 10_000, seed=101))
    distracted = compute_stats(sim.generate_keystrokes("Distracted", 10_000, seed=102))
    assert normal.mean_interval_ms == pytest.approx(536.55, rel=0.03)
    assert distracted.mean_interval_ms == pytest.approx(742.42, rel=0.03)
    assert 0.86 <= normal.frac_under_800ms <= 0.94
    assert distracted.frac_under_800ms < 0.70
    errors = 0
    for i in range(20):
        truth = "Normal" if i < 8 else "Distracted"
        log = sim.generate_keystrokes(truth, 400, seed=500 + i)
        if classify_texting(compute_stats(log)).label.value != truth:
            errors += 1
    assert errors <= 2
    report(10, t0, 30.0,
           f"means {normal.mean_interval_ms:.1f}/{distracted.mean_interval_ms:.1f} ms, "
           f"fracs {normal.frac_under_800ms:.2f}/{distracted.frac_under_800ms:.2f}, "
           f"{errors}/20 errors")


def test_criterion_11_end_to_end(trained_models):
    t0 = time.perf_counter()
    result = corpus.eval_driver_corpus(trained_models, seed=5, n=39)
    rep = result.report
    assert rep.tp + rep.fp + rep.tn + rep.fn == 39
    assert rep.precision >= 0.90
    assert rep.accuracy >= 0.85
    budget_ms = (DEFAULT_CONFIG.window_s + 2 * DEFAULT_CONFIG.fusion_step_s) * 1000
    assert len(result.latencies_ms) == 39
    assert max(result.latencies_ms) <= budget_ms
    assert len(set(result.peak_buffered)) == 1  # constant in trace length
    report(11, t0, 300.0,
           f"driver corpus precision {rep.precision:.3f} accuracy {rep.accuracy:.3f}, "
           f"max latency {max(result.latencies_ms)} ms, peak buffer {result.peak_buffered[0]}")


def test_criterion_12_cli_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    trace = tmp_path / "trace.csv"
    keys = tmp_path / "keys.csv"
    act = tmp_path / "act.model"
    side = tmp_path / "side.model"
    resampled = tmp_path / "resampled.csv"
    plan = [
        ["simulate", "--preset", "ride_driver", "--seed", "7", "--out", str(trace),
         "--keystrokes-out", str(keys), "--keystroke-class", "Distracted",
         "--n-letters", "300", "--report", "json"],
        ["ingest", "--trace", str(trace), "--rate-hz", "20", "--out", str(resampled),
         "--report", "json"],
        ["train", "--kind", "activity", "--synthetic", "--seed", "7", "--per-class", "5",
         "--out", str(act), "--report", "json"],
        ["train", "--kind", "side", "--synthetic", "--seed", "8", "--per-class", "5",
         "--out", str(side), "--report", "json"],
        ["detect", "--trace", str(trace), "--model", str(act), "--side-model", str(side),
         "--keystrokes", str(keys), "--report", "json"],
        ["evaluate", "--counts", "38,46,3,250", "--report", "json"],
        ["evaluate", "--corpus", "texting", "--seed", "3", "--report", "json"],
        ["schedule", "--t-mean", "100", "--sigma", "20", "--bump-rate", "0.032",
         "--mc-cycles", "2000", "--report", "json"],
        ["texting", "--keystrokes", str(keys), "--report", "json"],
    ]
    outputs = {}
    for argv in plan:
        assert cli_main(argv) == 0
        first_out = capsys.readouterr().out
        files = {p: open(p, "rb").read() for p in (trace, keys, act, side, resampled)
                 if p.exists()}
        assert cli_main(argv) == 0
        assert capsys.readouterr().out == first_out, f"stdout differs for {argv[0]}"
        for p, data in files.items():
            assert open(p, "rb").read() == data, f"{p} differs after rerun of {argv[0]}"
        outputs[argv[0]] = first_out
    assert json.loads(outputs["detect"])["role"] == "Driver"
    report(12, t0, 120.0, f"{len(plan)} CLI invocations byte-identical across reruns")
