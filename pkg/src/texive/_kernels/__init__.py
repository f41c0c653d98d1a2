"""Numeric kernel backend selection.

The sequential filter loop comes from the compiled extension when it is
available (the Python fallback is ~250x slower there). The windowed DCT
always uses the NumPy path: its cached-basis matrix product runs on BLAS
and benchmarks faster than the scalar compiled loop (see
benchmarks/bench_kernels.py). Set TEXIVE_FORCE_PYTHON_KERNELS=1 to force
the pure-Python fallback everywhere.
"""

from __future__ import annotations

import os

from . import _fallback as fallback

if os.environ.get("TEXIVE_FORCE_PYTHON_KERNELS"):
    active = fallback
else:
    try:
        from . import _core as active  # type: ignore[no-redef]
    except ImportError:
        active = fallback

BACKEND: str = active.BACKEND
ekf_run = active.ekf_run
dct2 = fallback.dct2

# parameter-vector layout and helpers always come from the reference module
P_GYRO_VAR = fallback.P_GYRO_VAR
P_ACCEL_VAR = fallback.P_ACCEL_VAR
P_MAG_VAR = fallback.P_MAG_VAR
P_GRAVITY = fallback.P_GRAVITY
P_MAG_REF = fallback.P_MAG_REF
P_ACCEL_GATE = fallback.P_ACCEL_GATE
P_GYRO_BIAS = fallback.P_GYRO_BIAS
PARAMS_LEN = fallback.PARAMS_LEN
dct_basis = fallback.dct_basis
