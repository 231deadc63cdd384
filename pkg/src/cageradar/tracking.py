"""Range estimation, cage zones, activity classes, multi-target peaks.

Ranging picks the range bin with the highest movement power; zones split the
cage at two configurable boundaries (boundary values belong to the farther
zone).  Activity classification runs a two-threshold hysteresis on the
median-smoothed movement power; thresholds are usually auto-calibrated as
multiples of a quasi-static baseline because absolute power depends on the
target's posture and proximity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import medfilt

from .dsp import RangeDopplerMap
from .errors import TrackingError

DYNAMIC = "dynamic"
STATIC_MOVEMENT = "static_movement"
QUASI_STATIC = "quasi_static"
ACTIVITY_LABELS = (DYNAMIC, STATIC_MOVEMENT, QUASI_STATIC)

ZONES = ("Near", "Middle", "Far")

DEFAULT_CAGE_LENGTH_M = 0.37     # usable GM500 extent seen by the radar
QS_THRESHOLD_FACTOR = 3.0        # theta_qs = 3x quasi-static baseline power
DYN_THRESHOLD_FACTOR = 10.0      # theta_dyn = 10x
DEFAULT_RANGE_REF_M = 0.1        # reference range for 1/r^2 power compensation


@dataclass(frozen=True)
class ZoneConfig:
    """Two range boundaries splitting the cage into Near/Middle/Far."""

    b1: float
    b2: float
    cage_length: float = DEFAULT_CAGE_LENGTH_M

    def validate(self, d_max: float | None = None) -> None:
        if not 0.05 < self.b1 < self.b2 < self.cage_length:
            raise TrackingError("invalid-zones",
                                f"need 0.05 < b1 < b2 < cage_length, got "
                                f"b1={self.b1}, b2={self.b2}, cage={self.cage_length}")
        if d_max is not None and self.cage_length > d_max:
            raise TrackingError("invalid-zones",
                                f"cage_length {self.cage_length} m exceeds d_max {d_max} m")

    @classmethod
    def thirds(cls, cage_length: float = DEFAULT_CAGE_LENGTH_M) -> "ZoneConfig":
        return cls(b1=cage_length / 3.0, b2=2.0 * cage_length / 3.0,
                   cage_length=cage_length)


@dataclass(frozen=True)
class Peak:
    """One detected range-velocity peak."""

    range_m: float
    velocity_mps: float
    power: float


@dataclass(frozen=True)
class TrackEstimate:
    """Per-frame tracking output row."""

    t: float
    range_m: float | None
    zone: str | None
    movement_power: float
    activity: str | None = None
    peaks: tuple[Peak, ...] = ()


def estimate_range(profile: np.ndarray, range_spacing: float) -> float:
    """Range of the strongest movement-power bin, parabolic sub-bin refinement."""
    profile = np.asarray(profile, dtype=np.float64)
    if profile.size == 0 or not np.any(profile > 0):
        raise TrackingError("no-target", "range-power profile is all zero")
    idx = int(np.argmax(profile))
    offset = 0.0
    if 0 < idx < profile.size - 1:
        ym1, y0, yp1 = profile[idx - 1], profile[idx], profile[idx + 1]
        denom = ym1 - 2.0 * y0 + yp1
        if denom < 0:
            offset = 0.5 * (ym1 - yp1) / denom
    return (idx + offset) * range_spacing


def classify_zone(range_m: float, zones: ZoneConfig) -> str:
    """Near / Middle / Far; a range exactly on a boundary belongs to the farther zone."""
    zones.validate()
    if range_m < zones.b1:
        return "Near"
    if range_m < zones.b2:
        return "Middle"
    return "Far"


def calibrate_thresholds(baseline_power: np.ndarray,
                         qs_factor: float = QS_THRESHOLD_FACTOR,
                         dyn_factor: float = DYN_THRESHOLD_FACTOR) -> tuple[float, float]:
    """Activity thresholds from a quasi-static baseline power recording."""
    baseline = float(np.median(np.asarray(baseline_power, dtype=np.float64)))
    if baseline <= 0:
        raise TrackingError("unset-thresholds",
                            "baseline power is zero; cannot calibrate thresholds")
    return qs_factor * baseline, dyn_factor * baseline


def classify_activity(power_series: np.ndarray, rate_hz: float,
                      thresholds: tuple[float, float] | str | None = None,
                      smooth_s: float = 0.5,
                      hysteresis: float = 0.10) -> np.ndarray:
    """Per-frame activity labels from the movement-power series.

    ``thresholds`` is (theta_qs, theta_dyn), or "auto" to calibrate from the
    first 5 s of the series itself (making the labels invariant to scaling the
    whole series).  The series is median-smoothed over ``smooth_s`` and each
    threshold carries a ``hysteresis`` band (crossing up requires
    theta*(1+h/2), down theta*(1-h/2)) so power hovering at a threshold does
    not chatter.
    """
    power = np.asarray(power_series, dtype=np.float64)
    if power.size < rate_hz:
        raise ValueError("need at least 1 s of movement-power samples")
    if thresholds is None:
        raise TrackingError("unset-thresholds",
                            "pass (theta_qs, theta_dyn) or 'auto'")
    if isinstance(thresholds, str):
        if thresholds != "auto":
            raise TrackingError("unset-thresholds", f"unknown threshold mode {thresholds!r}")
        n_cal = min(power.size, int(round(5.0 * rate_hz)))
        theta_qs, theta_dyn = calibrate_thresholds(power[:n_cal])
    else:
        theta_qs, theta_dyn = thresholds
    if not 0 < theta_qs < theta_dyn:
        raise TrackingError("unset-thresholds",
                            f"need 0 < theta_qs < theta_dyn, got {theta_qs}, {theta_dyn}")

    kernel = int(round(smooth_s * rate_hz))
    kernel = max(1, kernel | 1)  # medfilt wants an odd kernel
    smoothed = medfilt(power, kernel_size=kernel)

    up_qs, dn_qs = theta_qs * (1 + hysteresis / 2), theta_qs * (1 - hysteresis / 2)
    up_dyn, dn_dyn = theta_dyn * (1 + hysteresis / 2), theta_dyn * (1 - hysteresis / 2)

    labels = np.empty(power.size, dtype=object)
    p0 = smoothed[0]
    label = DYNAMIC if p0 >= theta_dyn else STATIC_MOVEMENT if p0 >= theta_qs else QUASI_STATIC
    labels[0] = label
    for i in range(1, power.size):
        p = smoothed[i]
        if label == QUASI_STATIC:
            if p >= up_dyn:
                label = DYNAMIC
            elif p >= up_qs:
                label = STATIC_MOVEMENT
        elif label == STATIC_MOVEMENT:
            if p >= up_dyn:
                label = DYNAMIC
            elif p < dn_qs:
                label = QUASI_STATIC
        else:
            if p < dn_qs:
                label = QUASI_STATIC
            elif p < dn_dyn:
                label = STATIC_MOVEMENT
        labels[i] = label
    return labels


def detect_peaks(rd_map: RangeDopplerMap, max_targets: int = 2,
                 compensate: bool = False,
                 range_ref_m: float = DEFAULT_RANGE_REF_M,
                 noise_factor: float = 8.0,
                 suppress_range_bins: int = 1,
                 suppress_doppler_bins: int = 2,
                 max_candidates: int = 32) -> list[Peak]:
    """Greedy local-maxima extraction from the antenna-averaged power map.

    Each accepted peak suppresses a +-1 range bin by +-2 Doppler bin
    neighbourhood (in unpadded bin units).  Candidates below ``noise_factor``
    times the valid-map median are discarded.  With ``compensate`` the peak
    powers are multiplied by (range/range_ref)^2 to undo the 1/r^2 received-
    power roll-off before ranking.
    """
    vf = rd_map.valid_from_bin
    n_range, n_doppler = rd_map.n_range, rd_map.n_doppler
    work = np.zeros((n_range, n_doppler), dtype=np.float64)
    work[vf:] = rd_map.power[:, vf:, :].mean(axis=0)
    # noise floor from a subsample; the median of 1/16 of the bins is plenty
    floor = float(np.median(work[vf::4, ::4])) if n_range > vf else 0.0
    threshold = noise_factor * floor

    dr = suppress_range_bins * rd_map.range_pad
    dd = suppress_doppler_bins * rd_map.doppler_pad
    candidates = []
    for _ in range(max_candidates):
        flat_idx = int(np.argmax(work))
        r_idx, d_idx = np.unravel_index(flat_idx, work.shape)
        p = work[r_idx, d_idx]
        if p <= 0 or p <= threshold:
            break
        candidates.append((int(r_idx), int(d_idx), float(p)))
        work[max(0, r_idx - dr):r_idx + dr + 1,
             max(0, d_idx - dd):d_idx + dd + 1] = 0.0

    peaks = []
    for r_idx, d_idx, p in candidates:
        range_m = r_idx * rd_map.range_spacing
        velocity = (d_idx - n_doppler // 2) * rd_map.velocity_spacing
        power = p * (range_m / range_ref_m) ** 2 if compensate else p
        peaks.append(Peak(range_m=range_m, velocity_mps=velocity, power=power))
    peaks.sort(key=lambda pk: (-pk.power, pk.range_m))
    return peaks[:max_targets]
