"""Parity between the compiled kernel extension and the NumPy fallback."""

import math

import numpy as np
import pytest

from texive._kernels import _fallback as fb

try:
    from texive._kernels import _core as core
except ImportError:
    core = None

needs_core = pytest.mark.skipif(core is None, reason="compiled kernels not built")


def _params():
    return np.array([1e-3, 5e-2, 1e-1, 9.80665, 0.6, 0.0, 0.8, 2.0, 0.0, 0.0, 0.0])


def _mixed_motion(n, seed=0):
    rng = np.random.default_rng(seed)
    gyro = rng.normal(0, 0.4, (n, 3))
    accel = rng.normal(0, 0.2, (n, 3)) + np.array([0.0, 0.0, 9.80665])
    mag = rng.normal(0, 0.3, (n, 3)) + np.array([30.0, 0.0, 40.0])
    dt = np.full(n, 0.05)
    return gyro, accel, mag, dt


@needs_core
def test_ekf_run_backends_agree():
    n = 2000
    gyro, accel, mag, dt = _mixed_motion(n)
    q0 = np.array([1.0, 0.0, 0.0, 0.0])
    P0 = np.eye(3) * math.radians(5.0) ** 2
    out_py = fb.ekf_run(q0, P0, gyro, accel, mag, dt, _params())
    out_c = core.ekf_run(q0, P0, gyro, accel, mag, dt, _params())
    for a, b in zip(out_py, out_c):
        assert np.max(np.abs(np.asarray(a) - np.asarray(b))) < 1e-9


@needs_core
@pytest.mark.parametrize("n", [1, 16, 90, 256])
def test_dct_backends_agree(n):
    rng = np.random.default_rng(n)
    x = rng.normal(size=n)
    assert np.max(np.abs(fb.dct2(x) - core.dct2(x))) < 1e-12


def test_fallback_dct_matches_naive_definition():
    rng = np.random.default_rng(3)
    x = rng.normal(size=32)
    n = 32
    for k in (0, 1, 7, 31):
        scale = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
        expect = scale * sum(
            x[m] * math.cos(math.pi * (2 * m + 1) * k / (2 * n)) for m in range(n)
        )
        assert fb.dct2(x)[k] == pytest.approx(expect, abs=1e-12)


def test_single_step_matches_run():
    gyro, accel, mag, dt = _mixed_motion(50, seed=4)
    q = np.array([1.0, 0.0, 0.0, 0.0])
    P = np.eye(3) * 1e-2
    params = _params()
    q_run, P_run, _, _, _ = fb.ekf_run(q, P, gyro, accel, mag, dt, params)
    for i in range(50):
        q, P = fb.ekf_step(q, P, gyro[i], accel[i], mag[i], dt[i], params)
    assert np.allclose(q, q_run[-1], atol=1e-12)
    assert np.allclose(P, P_run, atol=1e-12)
