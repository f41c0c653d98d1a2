"""Typing statistics and distracted-texting classification."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from texive.config import DEFAULT_CONFIG
from texive.errors import TooFewEvents
from texive.simulator import generate_keystrokes
from texive.texting import TextingClass, TypingStats, classify_texting, compute_stats
from texive.trace_io import KeystrokeLog


def letters(times):
    return KeystrokeLog(tuple((t, "letter") for t in times))


class TestComputeStats:
    def test_three_letters(self):
        stats = compute_stats(letters([0, 500, 1000]))
        assert stats.mean_interval_ms == 500.0
        assert stats.sd_interval_ms == 0.0
        assert stats.frac_under_800ms == 1.0
        assert stats.n_intervals == 2

    def test_typo_rate_from_backspaces(self):
        events = [(400 * i, "letter") for i in range(100)]
        events.append((400 * 30 + 100, "backspace"))
        events.append((400 * 70 + 100, "backspace"))
        log = KeystrokeLog(tuple(sorted(events)))
        assert compute_stats(log).inputs_per_typo == 50.0

    def test_consecutive_backspaces_count_once(self):
        events = [(0, "letter"), (400, "letter"), (500, "backspace"), (550, "backspace"),
                  (900, "letter")]
        assert compute_stats(KeystrokeLog(tuple(events))).inputs_per_typo == 3.0

    def test_no_typos_is_infinite(self):
        assert compute_stats(letters([0, 400, 800])).inputs_per_typo == math.inf

    def test_too_few(self):
        with pytest.raises(TooFewEvents):
            compute_stats(letters([0]))

    @given(st.integers(0, 10_000_000))
    def test_translation_invariant(self, shift):
        base = [0, 350, 900, 1300, 2100]
        a = compute_stats(letters(base))
        b = compute_stats(letters([t + shift for t in base]))
        assert a == b

    def test_burst_pause_raises_sd(self):
        rng = np.random.default_rng(0)
        uniform = np.cumsum(rng.uniform(600, 800, 200)).astype(int)
        bursty = []
        t = 0
        for i in range(200):
            t += 2600 if i % 5 == 4 else 250  # type a word, watch the road
            bursty.append(t)
        u = compute_stats(letters(uniform))
        b = compute_stats(letters(bursty))
        assert abs(u.mean_interval_ms - b.mean_interval_ms) < 120
        assert b.sd_interval_ms > 2 * u.sd_interval_ms


def stats(mean, typo=math.inf, n=50):
    return TypingStats(mean_interval_ms=mean, sd_interval_ms=100.0,
                       frac_under_800ms=0.8, inputs_per_typo=typo, n_intervals=n)


class TestClassify:
    def test_normal_class_mean(self):
        assert classify_texting(stats(536.55)).label is TextingClass.Normal

    def test_distracted_class_mean(self):
        verdict = classify_texting(stats(742.42))
        assert verdict.label is TextingClass.Distracted
        assert verdict.confidence == pytest.approx(1.0)

    def test_threshold_midpoint(self):
        assert DEFAULT_CONFIG.texting_threshold_ms == pytest.approx(639.485)
        assert classify_texting(stats(640.0)).label is TextingClass.Distracted
        assert classify_texting(stats(639.0)).label is TextingClass.Normal

    def test_typo_rate_flips_borderline(self):
        assert classify_texting(stats(620.0, typo=25.0)).label is TextingClass.Distracted
        assert classify_texting(stats(620.0, typo=60.0)).label is TextingClass.Normal
        # far from the border the typo rate cannot flip
        assert classify_texting(stats(500.0, typo=25.0)).label is TextingClass.Normal

    def test_too_few_intervals(self):
        with pytest.raises(TooFewEvents):
            classify_texting(stats(700.0, n=5))

    @given(st.floats(200, 1500), st.floats(1, 400))
    def test_monotone_in_added_delay(self, mean, delta):
        before = classify_texting(stats(mean))
        after = classify_texting(stats(mean + delta))
        if before.label is TextingClass.Distracted:
            assert after.label is TextingClass.Distracted


class TestGenerators:
    def test_normal_statistics(self):
        log = generate_keystrokes("Normal", 10_000, seed=21)
        s = compute_stats(log)
        assert s.mean_interval_ms == pytest.approx(536.55, rel=0.03)
        assert 0.86 <= s.frac_under_800ms <= 0.94

    def test_distracted_statistics(self):
        log = generate_keystrokes("Distracted", 10_000, seed=22)
        s = compute_stats(log)
        assert s.mean_interval_ms == pytest.approx(742.42, rel=0.03)
        assert s.frac_under_800ms < 0.7

    def test_typo_frequencies(self):
        for kind, expect in (("Normal", 50), ("Distracted", 30)):
            log = generate_keystrokes(kind, 10_000, seed=23)
            assert compute_stats(log).inputs_per_typo == pytest.approx(expect, rel=0.2)

    def test_deterministic(self):
        a = generate_keystrokes("Normal", 500, seed=5)
        b = generate_keystrokes("Normal", 500, seed=5)
        assert a == b

    def test_twenty_case_corpus(self):
        errors = 0
        for i in range(20):
            truth = "Normal" if i < 8 else "Distracted"
            log = generate_keystrokes(truth, 400, seed=300 + i)
            verdict = classify_texting(compute_stats(log))
            if verdict.label.value != truth:
                errors += 1
        assert errors <= 2
