"""DCT correctness, windowing arithmetic, feature extraction."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from texive.errors import EmptySignal, KTooLarge
from texive.features import (
    Window,
    dct,
    extract_features,
    horizontal_magnitude,
    idct,
    sliding_windows,
)
from texive.orientation import EfcStream


def brute_force_dct(x):
    """O(N^2) orthonormal DCT-II straight from the definition."""
    n = len(x)
    out = []
    for k in range(n):
        scale = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
        out.append(scale * sum(x[m] * math.cos(math.pi * (2 * m + 1) * k / (2 * n)) for m in range(n)))
    return np.array(out)


def make_stream(n, rate=20.0, lin=None, mag=None, euler=None, t0=0):
    step = round(1000 / rate)
    return EfcStream(
        t_ms=np.arange(n, dtype=np.int64) * step + t0,
        lin_accel=np.zeros((n, 3)) if lin is None else lin,
        mag_efc=np.tile([30.0, 0.0, 40.0], (n, 1)) if mag is None else mag,
        euler=np.zeros((n, 3)) if euler is None else euler,
    )


def make_window(lin, mag=None, t0=0, rate=20.0):
    n = lin.shape[0]
    step = round(1000 / rate)
    return Window(
        start_ms=t0,
        duration_ms=n * step,
        t_ms=np.arange(n, dtype=np.int64) * step + t0,
        lin_accel=lin,
        mag_efc=np.tile([30.0, 0.0, 40.0], (n, 1)) if mag is None else mag,
        euler=np.zeros((n, 3)),
    )


class TestHorizontalMagnitude:
    def test_zero(self):
        assert horizontal_magnitude((0.0, 0.0, 5.0)) == 0.0

    def test_pythagorean(self):
        assert horizontal_magnitude((3.0, 4.0, 0.0)) == 5.0

    @given(
        st.floats(-20, 20), st.floats(-20, 20), st.floats(0, 2 * math.pi)
    )
    def test_invariant_under_horizontal_rotation(self, n, e, angle):
        c, s = math.cos(angle), math.sin(angle)
        rotated = (c * n - s * e, s * n + c * e, 1.0)
        assert horizontal_magnitude(rotated) == pytest.approx(
            horizontal_magnitude((n, e, 1.0)), abs=1e-9
        )


class TestDct:
    def test_constant_signal_dc_only(self):
        for n in (4, 16, 90):
            coeffs = dct(np.full(n, 2.5))
            assert coeffs[0] == pytest.approx(2.5 * math.sqrt(n), abs=1e-9)
            assert np.max(np.abs(coeffs[1:])) < 1e-9

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=64)
        assert np.max(np.abs(dct(x) - brute_force_dct(x))) < 1e-9

    @given(st.integers(0, 1000))
    def test_parseval(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=int(rng.integers(1, 128)))
        assert np.sum(x * x) == pytest.approx(float(np.sum(dct(x) ** 2)), abs=1e-9)

    @given(st.integers(0, 1000))
    def test_inverse_reconstructs(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=int(rng.integers(1, 256)))
        assert np.max(np.abs(idct(dct(x)) - x)) < 1e-9

    def test_empty_rejected(self):
        with pytest.raises(EmptySignal):
            dct(np.array([]))


class TestSlidingWindows:
    def test_counts_10s_stream(self):
        stream = make_stream(200)
        wins = list(sliding_windows(stream, 4500, 1000))
        assert len(wins) == 6
        assert [w.start_ms for w in wins] == [0, 1000, 2000, 3000, 4000, 5000]

    def test_half_second_step(self):
        stream = make_stream(200)
        assert len(list(sliding_windows(stream, 4500, 500))) == 12

    @given(st.integers(91, 400), st.sampled_from([500, 1000, 1500]))
    def test_window_invariants(self, n, step_ms):
        stream = make_stream(n)
        wins = list(sliding_windows(stream, 4500, step_ms))
        for w in wins:
            assert len(w) == 90
            assert int(w.t_ms[-1] - w.t_ms[0]) == 89 * 50
        starts = [w.start_ms for w in wins]
        assert all(b - a == step_ms for a, b in zip(starts, starts[1:]))

    def test_step_must_be_positive(self):
        with pytest.raises(EmptySignal):
            list(sliding_windows(make_stream(100), 4500, 0))


class TestExtractFeatures:
    def test_all_zero_window(self):
        fv = extract_features(make_window(np.zeros((90, 3)), mag=np.zeros((90, 3))), k=20)
        assert np.all(fv.as_array() == 0.0)

    def test_pure_tone_lands_in_expected_bin(self):
        # 2 Hz on the down axis at 20 Hz / 4.5 s concentrates near bin 18
        t = np.arange(90) / 20.0
        lin = np.zeros((90, 3))
        lin[:, 2] = np.cos(2 * math.pi * 2.0 * t)
        fv = extract_features(make_window(lin), k=30)
        oracle = brute_force_dct(lin[:, 2])
        assert np.max(np.abs(fv.vert_dct - oracle[:30])) < 1e-9
        assert int(np.argmax(np.abs(oracle))) == 18
        band = np.sum(fv.vert_dct[16:21] ** 2)
        total = np.sum(oracle**2)
        assert band / total > 0.95
        assert np.max(np.abs(fv.horiz_dct)) < 1e-9

    def test_constant_mag_zero_variance(self):
        fv = extract_features(make_window(np.zeros((90, 3))), k=10)
        assert fv.mag_var == 0.0

    def test_k_too_large(self):
        with pytest.raises(KTooLarge):
            extract_features(make_window(np.zeros((90, 3))), k=91)

    def test_translation_covariant_in_time(self):
        rng = np.random.default_rng(2)
        lin = rng.normal(size=(90, 3))
        mag = rng.normal(size=(90, 3)) + [30, 0, 40]
        a = extract_features(make_window(lin.copy(), mag.copy(), t0=0), k=20)
        b = extract_features(make_window(lin.copy(), mag.copy(), t0=123_000), k=20)
        assert a == b
