"""Validation metrics: accuracy figures comparing estimates to scene truth."""

from __future__ import annotations

import numpy as np

from .errors import HarnessError
from .vitals import VitalsEstimate


def rr_accuracy(estimates: list[VitalsEstimate], ground_truth_bpm: float) -> dict:
    """Respiration accuracy over estimation windows.

    accuracy_pct = 100 * (1 - mean(|est - gt| / gt)); also reports the MAE in
    bpm and the fraction of windows within +-2 bpm.  Windows with an absent
    estimate are excluded; if none remain, raises ``no-estimates``.
    """
    rates = np.array([e.rr_bpm for e in estimates if e.rr_bpm is not None])
    if rates.size == 0:
        raise HarnessError("no-estimates", "no respiration estimates to score")
    err = np.abs(rates - ground_truth_bpm)
    return {
        "rr_accuracy_pct": float(100.0 * (1.0 - np.mean(err / ground_truth_bpm))),
        "rr_mae_bpm": float(np.mean(err)),
        "rr_within_2bpm_pct": float(100.0 * np.mean(err <= 2.0)),
        "rr_max_err_bpm": float(np.max(err)),
        "n_windows": int(rates.size),
    }


def zone_accuracy(estimated: list[str | None], truth: list[str]) -> float:
    """Per-frame percentage of matching zone labels (missing estimate = miss)."""
    if len(estimated) != len(truth):
        raise ValueError(f"length mismatch: {len(estimated)} vs {len(truth)}")
    if not truth:
        raise ValueError("empty zone series")
    hits = sum(1 for e, t in zip(estimated, truth) if e == t)
    return 100.0 * hits / len(truth)


def activity_agreement(labels: np.ndarray, truth: np.ndarray) -> float:
    """Per-frame percentage of matching activity labels."""
    labels = np.asarray(labels, dtype=object)
    truth = np.asarray(truth, dtype=object)
    if labels.shape != truth.shape:
        raise ValueError(f"shape mismatch: {labels.shape} vs {truth.shape}")
    return float(100.0 * np.mean(labels == truth))


def range_mae(estimated_m: np.ndarray, truth_m: np.ndarray) -> float:
    """Mean absolute ranging error [m]; a NaN estimate scores as missing by |truth|."""
    est = np.asarray(estimated_m, dtype=np.float64)
    truth = np.asarray(truth_m, dtype=np.float64)
    err = np.abs(est - truth)
    err = np.where(np.isnan(err), np.abs(truth), err)
    return float(np.mean(err))


def spectral_peak_bpm(x: np.ndarray, rate_hz: float,
                      band_bpm: tuple[float, float] = (150.0, 300.0),
                      pad_factor: int = 8) -> float:
    """Location (bpm) of the strongest spectral line inside a bpm band."""
    x = np.asarray(x, dtype=np.float64)
    x = x - x.mean()
    n_fft = pad_factor * x.size
    mag = np.abs(np.fft.rfft(x, n=n_fft))
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / rate_hz)
    band = (freqs >= band_bpm[0] / 60.0) & (freqs <= band_bpm[1] / 60.0)
    if not np.any(band) or not np.any(mag[band] > 0):
        raise HarnessError("no-estimates", "no spectral content inside the band")
    return 60.0 * float(freqs[band][np.argmax(mag[band])])


def db_ratio(a: float, b: float) -> float:
    """20*log10(a/b) for amplitude-like quantities such as movement power."""
    return float(20.0 * np.log10(a / b))
