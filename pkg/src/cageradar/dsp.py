"""Frame-level preprocessing and spectral stages.

Order for movement processing: per-chirp mean removal, running-average clutter
filter, then Hann-windowed zero-padded range and Doppler FFTs.  The bins of the
range axis map to distance through the beat frequency (f_if = 2*d*S/c with the
config's explicit slope), so one range bin spans d_max / (N_s * pad).  Bins
below the Tx-Rx leakage floor (first 5 cm) are clipped and no downstream
operation reads them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy.signal import get_window

from .config import C_LIGHT, RadarConfig, derive_params
from .errors import DspError
from .scene import RawFrame

LEAKAGE_MIN_RANGE_M = 0.05   # Tx-Rx leakage occupies the first 5 cm
DEFAULT_RAF_ALPHA = 0.95
DEFAULT_ZERO_PAD = 4


@lru_cache(maxsize=32)
def _window(name: str, n: int) -> np.ndarray:
    if name == "hann":
        out = get_window("hann", n, fftbins=True)
    elif name in ("rect", "boxcar"):
        out = np.ones(n)
    else:
        raise ValueError(f"unknown window {name!r}; use 'hann' or 'rect'")
    out.flags.writeable = False
    return out


@lru_cache(maxsize=32)
def _window_2d(name: str, n_chirps: int, n_samples: int) -> np.ndarray:
    """Separable slow-time x fast-time window, float32 for the map hot path."""
    out = np.outer(_window(name, n_chirps), _window(name, n_samples)).astype(np.float32)
    out.flags.writeable = False
    return out


def _check_pad(factor: int, what: str) -> None:
    if factor < 1 or (factor & (factor - 1)) != 0:
        raise DspError("invalid-pad",
                       f"{what} zero-pad factor must be a power of two >= 1, got {factor}")


def _samples(frame) -> np.ndarray:
    x = frame.samples if isinstance(frame, RawFrame) else np.asarray(frame)
    return x


def leakage_bin(bin_spacing: float) -> int:
    """First range bin at or beyond the 5 cm leakage floor."""
    return math.ceil(LEAKAGE_MIN_RANGE_M / bin_spacing - 1e-9)


# --- preprocessing -----------------------------------------------------------


def mean_removal(frame: RawFrame) -> RawFrame:
    """Subtract each chirp's fast-time mean (kills the zero-range DC artifact)."""
    x = np.asarray(frame.samples, dtype=np.float64)
    out = x - x.mean(axis=-1, keepdims=True)
    return RawFrame(frame.timestamp, out, frame.clipped_samples)


@dataclass
class RafState:
    """Running-average clutter filter state for one frame stream.

    One state per stream and antenna set; frames must be presented in order.
    """

    alpha: float
    running_mean: np.ndarray | None = None
    frames_seen: int = 0

    @property
    def initialized(self) -> bool:
        return self.running_mean is not None


def raf_apply(state: RafState, frame: RawFrame) -> tuple[RawFrame, RafState]:
    """Background-subtract a frame and advance the running average.

    filtered = frame - running_mean, then running_mean <- alpha*running_mean +
    (1-alpha)*frame.  The first frame initializes the mean and passes through
    unchanged (warm-up: ``state.frames_seen == 1`` afterwards).  alpha = 1
    freezes the background at the first frame; alpha = 0 is a first difference.
    """
    if not 0.0 <= state.alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {state.alpha}")
    x = np.asarray(frame.samples, dtype=np.float64)
    if state.running_mean is None:
        new_state = RafState(state.alpha, x.copy(), frames_seen=1)
        return RawFrame(frame.timestamp, x, frame.clipped_samples), new_state
    if state.running_mean.shape != x.shape:
        raise DspError("shape-mismatch",
                       f"frame shape {x.shape} does not match RAF state "
                       f"{state.running_mean.shape}")
    filtered = x - state.running_mean
    updated = state.alpha * state.running_mean + (1.0 - state.alpha) * x
    new_state = RafState(state.alpha, updated, state.frames_seen + 1)
    return RawFrame(frame.timestamp, filtered, frame.clipped_samples), new_state


# --- spectral stages ---------------------------------------------------------


@dataclass(frozen=True)
class RangeProfile:
    """Complex range spectrum per antenna (chirp-averaged when N_c > 1)."""

    bins: np.ndarray          # complex, [antenna][range_bin]
    bin_spacing: float        # [m] per bin: d_max / (N_s * pad)
    valid_from_bin: int       # first bin past the leakage floor

    @property
    def n_bins(self) -> int:
        return self.bins.shape[-1]

    def ranges(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.bin_spacing


@dataclass(frozen=True)
class RangeDopplerMap:
    """Magnitude-squared range-velocity map per antenna, leakage-clipped.

    ``power`` is indexed [antenna][range_bin][doppler_bin]; the doppler axis is
    FFT-shifted so bin ``n_doppler // 2`` is v = 0, positive bins receding.
    """

    power: np.ndarray
    range_spacing: float      # [m]
    velocity_spacing: float   # [m/s] per bin: v_res / doppler_pad
    valid_from_bin: int
    range_pad: int = 1
    doppler_pad: int = 1

    @property
    def n_range(self) -> int:
        return self.power.shape[1]

    @property
    def n_doppler(self) -> int:
        return self.power.shape[2]

    def ranges(self) -> np.ndarray:
        return np.arange(self.n_range) * self.range_spacing

    def velocities(self) -> np.ndarray:
        return (np.arange(self.n_doppler) - self.n_doppler // 2) * self.velocity_spacing


def range_bin_spacing(config: RadarConfig, zero_pad_factor: int = 1) -> float:
    """Range per FFT bin: f_if -> d mapping over an N_s*pad point transform."""
    n_fft = config.n_samples * zero_pad_factor
    return C_LIGHT * config.adc_rate / (2.0 * config.chirp_slope * n_fft)


def range_fft(frame, config: RadarConfig, window: str = "hann",
              zero_pad_factor: int = DEFAULT_ZERO_PAD) -> RangeProfile:
    """Windowed zero-padded fast-time FFT, positive-frequency half.

    Accepts a full frame (mean over chirps of the per-chirp spectra, which by
    linearity equals the spectrum of the accumulated chirp) or an already
    chirp-accumulated [antenna][sample] array.
    """
    _check_pad(zero_pad_factor, "range")
    x = _samples(frame)
    if x.ndim == 2:
        x = x[:, None, :]
    if x.ndim != 3 or x.shape[-1] != config.n_samples:
        raise DspError("shape-mismatch",
                       f"expected [antenna][chirp][{config.n_samples}] samples, "
                       f"got shape {x.shape}")
    n_fft = config.n_samples * zero_pad_factor
    win = _window(window, config.n_samples)
    spectrum = np.fft.rfft(x * win, n=n_fft, axis=-1)
    spacing = range_bin_spacing(config, zero_pad_factor)
    return RangeProfile(bins=spectrum.mean(axis=1), bin_spacing=spacing,
                        valid_from_bin=leakage_bin(spacing))


def range_doppler(frame, config: RadarConfig, window: str = "hann",
                  range_pad: int = DEFAULT_ZERO_PAD,
                  doppler_pad: int = DEFAULT_ZERO_PAD) -> RangeDopplerMap:
    """Range FFT per chirp, then windowed zero-padded FFT across chirps.

    Runs in single precision: this is the per-frame hot path and the map feeds
    power norms and peak picking, none of which need 1e-9 accuracy.
    """
    if config.n_chirps < 2:
        raise ValueError("range_doppler needs at least 2 chirps per frame")
    _check_pad(range_pad, "range")
    _check_pad(doppler_pad, "doppler")
    x = _samples(frame)
    if x.ndim != 3 or x.shape[1:] != (config.n_chirps, config.n_samples):
        raise DspError("shape-mismatch",
                       f"expected [antenna][{config.n_chirps}][{config.n_samples}] samples, "
                       f"got shape {x.shape}")
    derived = derive_params(config)
    n_fft_r = config.n_samples * range_pad
    n_fft_d = config.n_chirps * doppler_pad

    xw = x.astype(np.float32) * _window_2d(window, config.n_chirps, config.n_samples)
    range_spectrum = sfft.rfft(xw, n=n_fft_r, axis=-1)          # [ant][chirp][range]
    range_spectrum = np.ascontiguousarray(range_spectrum.transpose(0, 2, 1))
    doppler_spectrum = sfft.fft(range_spectrum, n=n_fft_d, axis=-1)

    raw = doppler_spectrum.real ** 2 + doppler_spectrum.imag ** 2
    power = np.empty_like(raw)                                   # fftshift, v=0 centered
    half = n_fft_d // 2
    power[..., :n_fft_d - half] = raw[..., half:]
    power[..., n_fft_d - half:] = raw[..., :half]
    spacing = range_bin_spacing(config, range_pad)
    valid_from = leakage_bin(spacing)
    power[:, :valid_from, :] = 0.0
    return RangeDopplerMap(power=power, range_spacing=spacing,
                           velocity_spacing=derived.v_res / doppler_pad,
                           valid_from_bin=valid_from,
                           range_pad=range_pad, doppler_pad=doppler_pad)


def movement_power(rd_map: RangeDopplerMap) -> float:
    """L2 norm of all map magnitudes past the leakage floor (frame power)."""
    valid = rd_map.power[:, rd_map.valid_from_bin:, :]
    return float(np.sqrt(valid.sum(dtype=np.float64)))


def range_power_profile(rd_map: RangeDopplerMap) -> np.ndarray:
    """Movement power per range bin: L2 norm over antennas and velocity bins."""
    profile = np.zeros(rd_map.n_range)
    valid = rd_map.power[:, rd_map.valid_from_bin:, :]
    profile[rd_map.valid_from_bin:] = np.sqrt(valid.sum(axis=(0, 2), dtype=np.float64))
    return profile
