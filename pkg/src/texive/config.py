"""Tunable constants for every pipeline stage, in one flat config object.

Defaults reflect the shipped calibration; everything a detector thresholds
on is overridable so a deployment can retune without code edits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Tuple

STANDARD_GRAVITY = 9.80665  # m/s^2

# Nominal ambient magnetic field (uT, north/east/down) used as the default
# heading reference and by the simulator.
NOMINAL_MAG_FIELD = (30.0, 0.0, 40.0)


@dataclass(frozen=True)
class PipelineConfig:
    # sampling / windowing
    rate_hz: float = 20.0
    window_s: float = 4.5
    step_s: float = 1.0           # activity-recognition stride
    fusion_step_s: float = 0.5    # stride while the fused pipeline runs
    dct_coeffs: int = 20          # K coefficients kept per channel

    # orientation filter
    gyro_var: float = 1e-3        # (rad/s)^2
    accel_corr_var: float = 5e-2  # unit-vector measurement variance
    mag_corr_var: float = 1e-1    # unit-vector measurement variance (inf disables)
    init_att_var: float = math.radians(5.0) ** 2
    accel_gate: float = 2.0       # m/s^2 deviation from g that disables tilt correction
    gravity: float = STANDARD_GRAVITY
    mag_reference: Tuple[float, float, float] = field(
        default=tuple(
            c / math.sqrt(sum(v * v for v in NOMINAL_MAG_FIELD)) for c in NOMINAL_MAG_FIELD
        )
    )
    gyro_bias: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    static_gyro_limit: float = 0.2    # rad/s mean magnitude allowed at init
    init_window_s: float = 0.5

    # activity recognition
    variance_floor: float = 1e-6
    consecutive_labels: int = 2       # identical window labels needed for an event
    mag_var_threshold: float = 1.0    # uT^2, vehicle-approach magnetic filter
    drive_accel_threshold: float = 1.0  # m/s^2 sustained horizontal accel
    drive_sustain_s: float = 2.0
    confirm_timeout_s: float = 120.0  # how long to wait for the drive-away filter

    # row detection
    spike_threshold: float = 2.0      # uT above trailing baseline
    spike_baseline_s: float = 2.0
    spike_decay_s: float = 1.0
    engine_search_s: float = 120.0    # spike search window after entry confirmation
    spike_search_delay_s: float = 3.0  # settle time after the entry latch
    side_capture_delay_s: float = 1.0  # lets the window cover the whole entry
    bump_peak_min: float = 1.0        # m/s^2 vertical excursion floor
    bump_pair_min_s: float = 0.2
    bump_pair_max_s: float = 2.0
    bump_merge_gap_s: float = 0.18    # excursions closer than this are one wheel pass
    bump_ratio_threshold: float = 2.0

    # texting
    texting_threshold_ms: float = (536.55 + 742.42) / 2.0  # 639.485
    texting_border_ms: float = 50.0
    typo_flip_threshold: float = 40.0  # inputs-per-typo below this flips borderline
    texting_conf_scale_ms: float = 742.42 - (536.55 + 742.42) / 2.0

    # scheduler
    commute_alpha: float = 2.0
    bump_rate_per_s: float = 0.032

    def sample_period_ms(self) -> int:
        return round(1000.0 / self.rate_hz)

    def window_samples(self) -> int:
        return round(self.rate_hz * self.window_s)

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        return replace(self, **kwargs)


DEFAULT_CONFIG = PipelineConfig()
