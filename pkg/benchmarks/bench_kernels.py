"""Benchmark the compiled kernel extension against the NumPy fallback.

Usage:
    python benchmarks/bench_kernels.py [--samples 20000] [--repeat 5]

Times the two hot kernels (the per-sample orientation-filter loop and the
windowed DCT) plus an end-to-end pipeline pass, and prints the speedup of
the compiled backend over the pure-Python one.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from texive._kernels import _fallback as fallback

try:
    from texive._kernels import _core as compiled
except ImportError:
    compiled = None


def bench(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def ekf_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    gyro = rng.normal(0, 0.4, (n, 3))
    accel = rng.normal(0, 0.2, (n, 3)) + np.array([0.0, 0.0, 9.80665])
    mag = rng.normal(0, 0.3, (n, 3)) + np.array([30.0, 0.0, 40.0])
    dt = np.full(n, 0.05)
    q0 = np.array([1.0, 0.0, 0.0, 0.0])
    P0 = np.eye(3) * math.radians(5.0) ** 2
    params = np.array([1e-3, 5e-2, 1e-1, 9.80665, 0.6, 0.0, 0.8, 2.0, 0.0, 0.0, 0.0])
    return q0, P0, gyro, accel, mag, dt, params


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = [("python", fallback)]
    if compiled is not None:
        backends.append(("compiled", compiled))
    else:
        print("compiled extension not built; run `pip install -e .` first")

    inputs = ekf_inputs(args.samples)
    rng = np.random.default_rng(1)
    window = rng.normal(size=90)
    long_sig = rng.normal(size=256)

    rows = []
    for name, mod in backends:
        ekf_t = bench(lambda m=mod: m.ekf_run(*inputs), args.repeat)
        dct_t = bench(lambda m=mod: [m.dct2(window) for _ in range(2000)], args.repeat)
        dct_long_t = bench(lambda m=mod: [m.dct2(long_sig) for _ in range(2000)], args.repeat)
        rows.append((name, ekf_t, dct_t, dct_long_t))
        print(f"{name:>9}: ekf_run {args.samples} samples: {ekf_t * 1e3:8.1f} ms "
              f"({ekf_t / args.samples * 1e6:6.2f} us/sample) | "
              f"dct90 x2000: {dct_t * 1e3:7.1f} ms | dct256 x2000: {dct_long_t * 1e3:7.1f} ms")

    if len(rows) == 2:
        (_, pe, pd, pl), (_, ce, cd, cl) = rows
        print(f"  speedup: ekf {pe / ce:6.1f}x | dct90 {pd / cd:5.1f}x | dct256 {pl / cl:5.1f}x")

    # end-to-end: one full pipeline pass over a synthetic ride
    from texive import simulator as sim
    from texive.corpus import build_models
    from texive.pipeline import run_pipeline

    models = build_models(seed=11)
    trace, _ = sim.generate(sim.ride_scenario(1234, side="Left", seat="Front", drive_s=120.0))
    t = bench(lambda: run_pipeline(trace, models), max(2, args.repeat // 2))
    import texive

    print(f"pipeline ({texive.KERNEL_BACKEND} backend): {len(trace)} samples in "
          f"{t * 1e3:.1f} ms ({len(trace) / t / 1e3:.0f} ksamples/s)")


if __name__ == "__main__":
    main()
