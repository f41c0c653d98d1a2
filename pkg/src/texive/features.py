"""Sliding windows and DCT feature vectors over earth-frame acceleration.

Features per window: the first K orthonormal DCT-II coefficients of the
horizontal-plane acceleration magnitude sqrt(north^2 + east^2) and of the
down-axis series, plus amplitude variances for both channels and for |mag|.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ._kernels import dct2, dct_basis
from .config import DEFAULT_CONFIG
from .errors import EmptySignal, KTooLarge
from .orientation import EfcStream


@dataclass(frozen=True, eq=False)
class Window:
    """Contiguous slice of an EFC stream."""

    start_ms: int
    duration_ms: int
    t_ms: np.ndarray
    lin_accel: np.ndarray  # (n, 3) north/east/down
    mag_efc: np.ndarray    # (n, 3)
    euler: np.ndarray      # (n, 3) pitch/roll/yaw

    def __len__(self) -> int:
        return self.t_ms.shape[0]


@dataclass(frozen=True, eq=False)
class FeatureVector:
    horiz_dct: np.ndarray
    vert_dct: np.ndarray
    horiz_var: float
    vert_var: float
    mag_var: float

    def as_array(self) -> np.ndarray:
        return np.concatenate(
            [self.horiz_dct, self.vert_dct, [self.horiz_var, self.vert_var, self.mag_var]]
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return np.array_equal(self.as_array(), other.as_array())


def horizontal_magnitude(lin_accel_efc) -> float:
    """Heading-independent horizontal acceleration, sqrt(north^2 + east^2)."""
    v = np.asarray(lin_accel_efc, dtype=float)
    return float(np.hypot(v[0], v[1]))


def horizontal_series(lin_accel: np.ndarray) -> np.ndarray:
    return np.hypot(lin_accel[:, 0], lin_accel[:, 1])


def dct(signal) -> np.ndarray:
    """Orthonormal DCT-II; Parseval-exact, inverted by idct."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] == 0:
        raise EmptySignal("dct needs a non-empty 1-D signal")
    return dct2(x)


def idct(coeffs) -> np.ndarray:
    """Inverse of dct (orthonormal DCT-III)."""
    y = np.asarray(coeffs, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] == 0:
        raise EmptySignal("idct needs a non-empty 1-D signal")
    return dct_basis(y.shape[0]).T @ y


def sliding_windows(
    stream: EfcStream,
    duration_ms: int = round(DEFAULT_CONFIG.window_s * 1000),
    step_ms: int = round(DEFAULT_CONFIG.step_s * 1000),
    rate_hz: float = DEFAULT_CONFIG.rate_hz,
) -> Iterator[Window]:
    """Yield fixed-size windows; a trailing partial window is dropped."""
    if step_ms <= 0:
        raise EmptySignal("step_ms must be positive")
    n = len(stream)
    count = round(rate_hz * duration_ms / 1000.0)
    step_samples = round(rate_hz * step_ms / 1000.0)
    if count < 1 or step_samples < 1:
        raise EmptySignal("window or step shorter than one sample")
    start = 0
    while start + count <= n:
        yield Window(
            start_ms=int(stream.t_ms[start]),
            duration_ms=duration_ms,
            t_ms=stream.t_ms[start : start + count],
            lin_accel=stream.lin_accel[start : start + count],
            mag_efc=stream.mag_efc[start : start + count],
            euler=stream.euler[start : start + count],
        )
        start += step_samples


def features_from_arrays(
    horiz: np.ndarray,
    vert: np.ndarray,
    mag_magnitude: np.ndarray,
    k: int = DEFAULT_CONFIG.dct_coeffs,
) -> FeatureVector:
    """Feature vector from pre-separated channel series (variances use 1/N)."""
    n = horiz.shape[0]
    if k > n:
        raise KTooLarge(f"K={k} exceeds window sample count {n}")
    return FeatureVector(
        horiz_dct=dct(horiz)[:k],
        vert_dct=dct(vert)[:k],
        horiz_var=float(np.var(horiz)),
        vert_var=float(np.var(vert)),
        mag_var=float(np.var(mag_magnitude)),
    )


def extract_features(window: Window, k: int = DEFAULT_CONFIG.dct_coeffs) -> FeatureVector:
    """DCT + variance features for one window."""
    mag_mag = np.sqrt(np.sum(window.mag_efc * window.mag_efc, axis=1))
    return features_from_arrays(
        horizontal_series(window.lin_accel), window.lin_accel[:, 2], mag_mag, k
    )


def euler_features(pitch: Sequence[float], roll: Sequence[float], k: int) -> np.ndarray:
    """Rotation-signature features: first K DCT coefficients of pitch and roll."""
    p = np.asarray(pitch, dtype=float)
    r = np.asarray(roll, dtype=float)
    if k > p.shape[0] or k > r.shape[0]:
        raise KTooLarge(f"K={k} exceeds series length {min(p.shape[0], r.shape[0])}")
    return np.concatenate([dct(p)[:k], dct(r)[:k]])
