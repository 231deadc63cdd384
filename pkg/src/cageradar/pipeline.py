"""Streaming processing pipelines over frame sequences.

MovementPipeline: per-chirp mean removal -> running-average clutter filter ->
range-Doppler map -> frame movement power, range-power ranging, zone label and
multi-target peaks; activity labels are assigned in ``finalize`` once the
whole power series is known (median smoothing + hysteresis).

VitalsPipeline: chirp accumulation -> range FFT -> slow-time profile history;
``finalize`` slides estimation windows over the history, selecting the target
bin per window by magnitude variance and estimating RR (time domain) and HR
(rectified-acceleration spectrum) on each.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dsp, tracking, vitals
from .config import RadarConfig, derive_params
from .errors import ConfigError, TrackingError
from .scene import RawFrame

VITAL_SIGN_CHIRPS = 16   # chirp-accumulation burst length of the vital-sign mode


@dataclass
class TrackResult:
    """Movement-mode output series (one entry per frame)."""

    t: np.ndarray
    movement_power: np.ndarray
    range_m: np.ndarray          # NaN where no target stood out
    zone: np.ndarray             # object array of zone names ("" where no range)
    activity: np.ndarray         # object array of activity labels
    peaks: list[tuple[tracking.Peak, ...]]
    thresholds: tuple[float, float] | None = None

    def estimates(self) -> list[tracking.TrackEstimate]:
        rows = []
        for i in range(len(self.t)):
            r = self.range_m[i]
            rows.append(tracking.TrackEstimate(
                t=float(self.t[i]),
                range_m=None if np.isnan(r) else float(r),
                zone=self.zone[i] or None,
                movement_power=float(self.movement_power[i]),
                activity=self.activity[i],
                peaks=self.peaks[i],
            ))
        return rows


class MovementPipeline:
    """Sequential movement/ranging processing for one recording."""

    def __init__(self, config: RadarConfig, alpha: float = dsp.DEFAULT_RAF_ALPHA,
                 range_pad: int = dsp.DEFAULT_ZERO_PAD,
                 doppler_pad: int = dsp.DEFAULT_ZERO_PAD,
                 zones: tracking.ZoneConfig | None = None,
                 max_targets: int = 2, compensate_peaks: bool = True):
        config.validate()
        if config.n_chirps < 2:
            raise ConfigError("config-mismatch",
                              f"movement mode needs >= 2 chirps per frame, "
                              f"got {config.n_chirps}")
        self.config = config
        self.derived = derive_params(config)
        self.zones = zones or tracking.ZoneConfig.thirds()
        self.zones.validate(self.derived.d_max)
        self.range_pad = range_pad
        self.doppler_pad = doppler_pad
        self.max_targets = max_targets
        self.compensate_peaks = compensate_peaks
        self._raf = dsp.RafState(alpha)
        self._t: list[float] = []
        self._power: list[float] = []
        self._range: list[float] = []
        self._zone: list[str] = []
        self._peaks: list[tuple[tracking.Peak, ...]] = []
        self.maps_emitted = 0

    def push(self, frame: RawFrame, keep_map: bool = False) -> dsp.RangeDopplerMap | None:
        filtered = dsp.mean_removal(frame)
        filtered, self._raf = dsp.raf_apply(self._raf, filtered)
        rd = dsp.range_doppler(filtered, self.config,
                               range_pad=self.range_pad, doppler_pad=self.doppler_pad)
        self._t.append(frame.timestamp)
        profile = dsp.range_power_profile(rd)
        # frame power == L2 of the profile (both are norms over the same bins)
        self._power.append(float(np.sqrt(np.sum(profile ** 2))))
        try:
            r = tracking.estimate_range(profile, rd.range_spacing)
            self._range.append(r)
            self._zone.append(tracking.classify_zone(r, self.zones))
        except TrackingError:
            self._range.append(np.nan)
            self._zone.append("")
        self._peaks.append(tuple(tracking.detect_peaks(
            rd, max_targets=self.max_targets, compensate=self.compensate_peaks)))
        return rd if keep_map else None

    def finalize(self, thresholds: tuple[float, float] | str | None = "auto"
                 ) -> TrackResult:
        t = np.array(self._t)
        power = np.array(self._power)
        if thresholds is None:
            activity = np.full(len(t), None, dtype=object)
            resolved = None
        else:
            activity = tracking.classify_activity(power, self.config.frame_rate,
                                                  thresholds)
            resolved = None if isinstance(thresholds, str) else tuple(thresholds)
        return TrackResult(t=t, movement_power=power,
                           range_m=np.array(self._range),
                           zone=np.array(self._zone, dtype=object),
                           activity=activity, peaks=self._peaks,
                           thresholds=resolved)


@dataclass
class VitalsResult:
    """Vitals-mode output: per-window estimates plus the full-run phase series."""

    estimates: list[vitals.VitalsEstimate]
    series: vitals.PhaseSeries | None
    rate_hz: float
    window_s: float
    hop_s: float


class VitalsPipeline:
    """Sequential vital-sign processing for one recording."""

    def __init__(self, config: RadarConfig, window_s: float = 15.0, hop_s: float = 5.0,
                 rr_band_bpm: tuple[float, float] = vitals.RR_BAND_BPM,
                 hr_band_bpm: tuple[float, float] = vitals.HR_BAND_BPM,
                 range_pad: int = dsp.DEFAULT_ZERO_PAD,
                 min_range_m: float = dsp.LEAKAGE_MIN_RANGE_M,
                 estimate_hr: bool = True):
        config.validate()
        if config.n_chirps != VITAL_SIGN_CHIRPS:
            raise ConfigError("config-mismatch",
                              f"vitals mode expects the {VITAL_SIGN_CHIRPS}-chirp "
                              f"vital-sign configuration, got n_chirps={config.n_chirps}")
        self.config = config
        self.window_s = window_s
        self.hop_s = hop_s
        self.rr_band_bpm = rr_band_bpm
        self.hr_band_bpm = hr_band_bpm
        self.range_pad = range_pad
        self.min_range_m = min_range_m
        self.estimate_hr = estimate_hr
        self._profiles: list[dsp.RangeProfile] = []
        self._t0: float | None = None

    def push(self, frame: RawFrame) -> None:
        accumulated = vitals.chirp_accumulate(frame)
        profile = dsp.range_fft(accumulated, self.config, zero_pad_factor=self.range_pad)
        # complex64 keeps long recordings (tens of thousands of frames) cheap
        profile = dsp.RangeProfile(bins=profile.bins.astype(np.complex64),
                                   bin_spacing=profile.bin_spacing,
                                   valid_from_bin=profile.valid_from_bin)
        if self._t0 is None:
            self._t0 = frame.timestamp
        self._profiles.append(profile)

    def finalize(self) -> VitalsResult:
        rate = self.config.frame_rate
        n = len(self._profiles)
        win = int(round(self.window_s * rate))
        hop = max(1, int(round(self.hop_s * rate)))
        t0 = self._t0 or 0.0

        estimates: list[vitals.VitalsEstimate] = []
        for start in range(0, max(0, n - win + 1), hop):
            window = self._profiles[start:start + win]
            target_bin = vitals.select_target_bin(window, self.min_range_m)
            series = vitals.extract_phase(window, target_bin, self.config)
            start_s = t0 + start / rate
            est = vitals.rr_estimate(series, self.rr_band_bpm, window_start_s=start_s)
            if self.estimate_hr:
                hr = vitals.hr_estimate(series, self.hr_band_bpm, window_start_s=start_s)
                est = vitals.VitalsEstimate(
                    window_start_s=est.window_start_s, window_len_s=est.window_len_s,
                    rr_bpm=est.rr_bpm, rr_confidence=est.rr_confidence,
                    hr_bpm=hr.hr_bpm, per_antenna_rr=est.per_antenna_rr)
            estimates.append(est)

        series = None
        if n >= 2:
            target_bin = vitals.select_target_bin(self._profiles, self.min_range_m)
            series = vitals.extract_phase(self._profiles, target_bin, self.config)
        return VitalsResult(estimates=estimates, series=series, rate_hz=rate,
                            window_s=self.window_s, hop_s=self.hop_s)


def run_pipeline(frames, config: RadarConfig, mode: str, **kwargs):
    """Feed a frame iterable through the pipeline for ``mode`` and finalize."""
    if mode == "movement":
        pipe = MovementPipeline(config, **kwargs)
        for frame in frames:
            pipe.push(frame)
        return pipe.finalize()
    if mode == "vitals":
        pipe = VitalsPipeline(config, **kwargs)
        for frame in frames:
            pipe.push(frame)
        return pipe.finalize()
    raise ValueError(f"unknown mode {mode!r}; use 'movement' or 'vitals'")
