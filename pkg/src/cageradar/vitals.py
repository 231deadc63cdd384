"""Micro-displacement extraction and respiration / heart-rate estimation.

The chain: coherently average the chirps of a burst, range-FFT, pick the range
bin with the highest slow-time magnitude variance (ignoring the leakage bins),
unwrap its phase over slow time and convert to displacement.  Respiration is
estimated in the time domain from the median interval between band-passed
displacement peaks; heart rate from the spectrum of the full-wave rectified
Savitzky-Golay acceleration, with a 6 dB in-band peak guard so a weak cardiac
signature yields an explicit "absent" rather than a confident wrong number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, decimate, filtfilt, find_peaks, savgol_filter

from .config import RadarConfig, derive_params
from .errors import VitalsError
from .scene import RawFrame
from .dsp import RangeProfile

RR_BAND_BPM = (150.0, 300.0)
HR_BAND_BPM = (500.0, 700.0)

DEFAULT_SAVGOL_WINDOW = 7      # samples
DEFAULT_SAVGOL_ORDER = 3
DEFAULT_DECIMATED_RATE = 100.0  # [Hz]; honours the 7-sample / 70 ms window gloss
DEFAULT_HR_PAD = 8
DEFAULT_HR_GUARD_DB = 6.0
PEAK_PROMINENCE_STD = 0.5      # find_peaks prominence, in units of signal std
RR_COHERENCE_MIN = 0.6         # fraction of in-band power the dominant line must hold
RR_COHERENCE_CELL_BINS = 3     # +-bins pooled around that line (tolerates rate drift)


@dataclass(frozen=True)
class PhaseSeries:
    """Unwrapped slow-time phase of the target bin, per antenna."""

    phase: np.ndarray          # [antenna][frame], rad, unwrapped
    displacement: np.ndarray   # [antenna][frame], m = lambda*phase/(4*pi)
    rate_hz: float             # slow-time sampling rate
    target_bin: int

    @property
    def n_antennas(self) -> int:
        return self.phase.shape[0]

    @property
    def n_frames(self) -> int:
        return self.phase.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_frames / self.rate_hz


@dataclass(frozen=True)
class VitalsEstimate:
    """One estimation window's output; absent estimates are ``None``."""

    window_start_s: float
    window_len_s: float
    rr_bpm: float | None = None
    rr_confidence: float = 0.0
    hr_bpm: float | None = None
    per_antenna_rr: tuple[float | None, ...] = ()


def chirp_accumulate(frame: RawFrame | np.ndarray) -> np.ndarray:
    """Average the chirps of a burst: [antenna][chirp][sample] -> [antenna][sample].

    Against white noise the coherent average improves tone SNR by up to
    10*log10(N_c) (12 dB for the 16-chirp burst).
    """
    x = frame.samples if isinstance(frame, RawFrame) else np.asarray(frame)
    return x.mean(axis=1)


def select_target_bin(profiles: list[RangeProfile],
                      min_range_m: float = 0.05) -> int:
    """Range bin with the highest slow-time magnitude variance.

    Bins nearer than ``min_range_m`` are excluded (Tx-Rx leakage); exact
    variance ties resolve to the nearer bin.
    """
    if len(profiles) < 2:
        raise VitalsError("empty-history",
                          f"need at least 2 profiles to measure variance, got {len(profiles)}")
    mags = np.abs(np.stack([p.bins for p in profiles]))   # [frame][antenna][bin]
    variance = mags.var(axis=0).mean(axis=0)              # averaged over antennas
    spacing = profiles[0].bin_spacing
    first = int(np.ceil(min_range_m / spacing - 1e-9))
    if first >= variance.shape[0]:
        raise VitalsError("empty-history",
                          f"min_range_m={min_range_m} leaves no valid bins")
    return first + int(np.argmax(variance[first:]))


def extract_phase(profiles: list[RangeProfile], target_bin: int,
                  config: RadarConfig) -> PhaseSeries:
    """Unwrapped phase of ``target_bin`` over slow time, per antenna."""
    if not profiles:
        raise VitalsError("empty-history", "no profiles to extract phase from")
    if not 0 <= target_bin < profiles[0].n_bins:
        raise ValueError(f"target_bin {target_bin} out of range "
                         f"[0, {profiles[0].n_bins})")
    derived = derive_params(config)
    values = np.stack([p.bins[:, target_bin] for p in profiles], axis=1)
    phase = np.unwrap(np.angle(values), axis=1)
    displacement = derived.wavelength * phase / (4.0 * np.pi)
    return PhaseSeries(phase=phase, displacement=displacement,
                       rate_hz=config.frame_rate, target_bin=target_bin)


def _bandpass(x: np.ndarray, rate_hz: float, lo_hz: float, hi_hz: float,
              order: int = 4) -> np.ndarray:
    """Zero-phase band-pass (forward-backward Butterworth)."""
    nyq = rate_hz / 2.0
    lo = max(lo_hz / nyq, 1e-4)
    hi = min(hi_hz / nyq, 1.0 - 1e-4)
    b, a = butter(order, [lo, hi], btype="band")
    return filtfilt(b, a, x)


def _refined_peak_times(x: np.ndarray, rate_hz: float, min_sep_s: float) -> np.ndarray:
    """Local-maxima times with 3-point parabolic sub-sample refinement.

    Works on the unit-variance series so results are exactly invariant to
    scaling the input.
    """
    std = float(x.std())
    if std == 0.0:
        return np.array([])
    x = x / std
    peaks, _ = find_peaks(x, distance=max(1, int(round(min_sep_s * rate_hz))),
                          prominence=PEAK_PROMINENCE_STD)
    times = []
    for idx in peaks:
        t = float(idx)
        if 0 < idx < len(x) - 1:
            denom = x[idx - 1] - 2.0 * x[idx] + x[idx + 1]
            if denom < 0:
                t += 0.5 * (x[idx - 1] - x[idx + 1]) / denom
        times.append(t / rate_hz)
    return np.array(times)


def _band_concentration(x: np.ndarray, rate_hz: float, lo_hz: float,
                        hi_hz: float) -> float:
    """Fraction of in-band spectral power held by the single strongest line.

    Near 1 when the band contains one dominant oscillation (breathing); well
    below for band-limited noise, whose power spreads over the whole band.
    """
    std = float(x.std())
    if std == 0.0:
        return 0.0
    x = x / std
    mag2 = np.abs(np.fft.rfft(x * np.hanning(x.size))) ** 2
    freqs = np.fft.rfftfreq(x.size, d=1.0 / rate_hz)
    in_band = mag2[(freqs >= lo_hz) & (freqs <= hi_hz)]
    total = in_band.sum()
    if total <= 0.0:
        return 0.0
    k = int(np.argmax(in_band))
    cell = in_band[max(0, k - RR_COHERENCE_CELL_BINS):k + RR_COHERENCE_CELL_BINS + 1]
    return float(cell.sum() / total)


def rr_estimate(series: PhaseSeries, band_bpm: tuple[float, float] = RR_BAND_BPM,
                window_start_s: float = 0.0,
                min_window_s: float = 5.0) -> VitalsEstimate:
    """Time-domain respiration estimate: 60 / median inter-peak interval.

    Runs per antenna on the band-passed displacement; the fused rate is the
    median across antennas.  Confidence is the fraction of inter-peak
    intervals within 20% of the median interval.  An antenna contributes no
    estimate when it finds fewer than 3 peaks or when its band-passed series
    is not dominated by a single oscillation (band-limited noise produces
    deceptively regular peaks, so interval statistics alone cannot reject it);
    if all antennas drop out, the window reports an absent rate with zero
    confidence.
    """
    if series.duration_s < min_window_s:
        raise ValueError(f"window of {series.duration_s:.2f} s is shorter than "
                         f"the {min_window_s} s minimum")
    lo_hz, hi_hz = band_bpm[0] / 60.0, band_bpm[1] / 60.0
    per_antenna: list[float | None] = []
    confidences = []
    for a in range(series.n_antennas):
        x = _bandpass(series.displacement[a], series.rate_hz, lo_hz, hi_hz)
        if _band_concentration(x, series.rate_hz, lo_hz, hi_hz) < RR_COHERENCE_MIN:
            per_antenna.append(None)
            continue
        times = _refined_peak_times(x, series.rate_hz, min_sep_s=60.0 / band_bpm[1])
        if len(times) < 3:
            per_antenna.append(None)
            continue
        intervals = np.diff(times)
        median = float(np.median(intervals))
        per_antenna.append(60.0 / median)
        confidences.append(float(np.mean(np.abs(intervals - median) <= 0.2 * median)))
    present = [r for r in per_antenna if r is not None]
    if not present:
        return VitalsEstimate(window_start_s, series.duration_s, rr_bpm=None,
                              rr_confidence=0.0, per_antenna_rr=tuple(per_antenna))
    rr = float(np.median(present))
    confidence = float(np.mean(confidences))
    if not band_bpm[0] <= rr <= band_bpm[1]:
        confidence = 0.0
    return VitalsEstimate(window_start_s, series.duration_s, rr_bpm=rr,
                          rr_confidence=confidence, per_antenna_rr=tuple(per_antenna))


def acceleration_envelope(x: np.ndarray, rate_hz: float,
                          savgol_window: int = DEFAULT_SAVGOL_WINDOW,
                          polyorder: int = DEFAULT_SAVGOL_ORDER) -> np.ndarray:
    """Full-wave rectified Savitzky-Golay second derivative.

    The envelope is the sum of positive and negative acceleration components,
    which equals |acceleration| elementwise.
    """
    acc = savgol_filter(x, savgol_window, polyorder, deriv=2, delta=1.0 / rate_hz)
    return np.maximum(acc, 0.0) + np.maximum(-acc, 0.0)


def _noise_band_ceiling_db(band_hz: float, duration_s: float) -> float:
    """How far the peak of a featureless noise band sits above its median.

    Magnitude bins of white noise are Rayleigh; over n independent bins the
    expected extreme is sqrt(2 ln n) sigma against a median of sqrt(2 ln 2)
    sigma.  The guard threshold rides on top of this ceiling so noise or
    leakage alone cannot produce a confident heart-rate.
    """
    n_indep = max(2.0, band_hz * duration_s)
    return 20.0 * np.log10(np.sqrt(np.log(n_indep) / np.log(2.0)))


def hr_estimate(series: PhaseSeries, band_bpm: tuple[float, float] = HR_BAND_BPM,
                window_start_s: float = 0.0,
                savgol_window: int = DEFAULT_SAVGOL_WINDOW,
                polyorder: int = DEFAULT_SAVGOL_ORDER,
                decimate_to_hz: float | None = DEFAULT_DECIMATED_RATE,
                highpass_hz: float | None = None,
                pad_factor: int = DEFAULT_HR_PAD,
                guard_db: float = DEFAULT_HR_GUARD_DB) -> VitalsEstimate:
    """Spectral heart-rate estimate from the rectified chest acceleration.

    Displacement is decimated (anti-aliased) to ``decimate_to_hz``, high-passed
    at ``highpass_hz`` (default 0.85x the band floor) to strip the much larger
    respiratory displacement whose rectification products would otherwise
    intermodulate into the band, then differentiated twice with a 7-sample
    Savitzky-Golay filter and full-wave rectified.  The estimate is the
    in-band peak of the antenna-averaged envelope spectrum; it is reported
    absent when the peak is less than ``guard_db`` above what a featureless
    noise band would reach (in-band median plus the noise peak factor).
    """
    lo_hz, hi_hz = band_bpm[0] / 60.0, band_bpm[1] / 60.0
    if series.rate_hz < 2.0 * hi_hz:
        raise VitalsError("nyquist-violation",
                          f"slow-time rate {series.rate_hz} Hz cannot observe "
                          f"{band_bpm[1]} bpm")
    if highpass_hz is None:
        highpass_hz = 0.85 * lo_hz
    rate = series.rate_hz
    q = 1
    if decimate_to_hz is not None and rate > decimate_to_hz:
        q = int(round(rate / decimate_to_hz))
        rate = rate / q

    spectrum = None
    n_fft = 0
    for a in range(series.n_antennas):
        x = series.displacement[a] - series.displacement[a].mean()
        if q > 1:
            x = decimate(x, q, zero_phase=True)
        if highpass_hz > 0:
            b, hp_a = butter(4, highpass_hz / (rate / 2.0), btype="high")
            x = filtfilt(b, hp_a, x)
        env = acceleration_envelope(x, rate, savgol_window, polyorder)
        env = env - env.mean()
        n_fft = pad_factor * len(env)
        mag = np.abs(np.fft.rfft(env, n=n_fft))
        spectrum = mag if spectrum is None else spectrum + mag

    freqs = np.fft.rfftfreq(n_fft, d=1.0 / rate)
    band = (freqs >= lo_hz) & (freqs <= hi_hz)
    in_band = spectrum[band]
    peak_idx = int(np.argmax(in_band))
    median = float(np.median(in_band))
    peak = float(in_band[peak_idx])
    ceiling_db = _noise_band_ceiling_db(hi_hz - lo_hz, series.duration_s)
    if median <= 0 or 20.0 * np.log10(peak / median) < guard_db + ceiling_db:
        return VitalsEstimate(window_start_s, series.duration_s, hr_bpm=None)
    hr = 60.0 * float(freqs[band][peak_idx])
    return VitalsEstimate(window_start_s, series.duration_s, hr_bpm=hr)
