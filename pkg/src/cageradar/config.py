"""Radar acquisition configuration and the closed-form quantities derived from it.

Everything downstream (simulation, spectral processing, vitals) consumes chirp
geometry through :class:`RadarConfig` / :func:`derive_params`, so the unit
conventions live in one audited place.  All in-code values are SI; the on-disk
YAML format spells the unit in each key name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError

C_LIGHT = 299_792_458.0  # [m/s]

PRESET_NAMES = ("movement", "vital-sign")

_REL_TOL = 1e-9


@dataclass(frozen=True)
class RadarConfig:
    """Acquisition parameters of one FMCW radar configuration."""

    f_start: float           # sweep start frequency [Hz]
    f_end: float             # sweep end frequency [Hz]
    frame_rate: float        # frame repetition rate [Hz]
    adc_rate: float          # fast-time sampling rate F_s [Hz]
    n_antennas: int          # receive antennas N_a
    n_chirps: int            # chirps per frame N_c
    n_samples: int           # fast-time samples per chirp N_s
    chirp_slope: float       # sweep slope S [Hz/s]
    chirp_repetition: float  # chirp repetition time T_cr [s]
    frame_idle: float | None = None  # T_fi [s]; None = slack up to the frame period

    @property
    def bandwidth(self) -> float:
        """Swept bandwidth B [Hz]."""
        return self.f_end - self.f_start

    @property
    def center_frequency(self) -> float:
        return 0.5 * (self.f_start + self.f_end)

    @property
    def chirp_time(self) -> float:
        """Active chirp time T_c = B/S [s]."""
        return self.bandwidth / self.chirp_slope

    @property
    def frame_idle_s(self) -> float:
        """Frame idle time; defaults to the slack left by the frame rate."""
        if self.frame_idle is not None:
            return self.frame_idle
        return 1.0 / self.frame_rate - self.n_chirps * self.chirp_repetition

    @property
    def frame_time(self) -> float:
        """Total frame time T_f = N_c*T_cr + T_fi [s]."""
        return self.n_chirps * self.chirp_repetition + self.frame_idle_s

    def validate(self) -> None:
        """Raise ``ConfigError`` (code ``invalid-config``) naming the bad field."""

        def fail(field: str, msg: str) -> None:
            raise ConfigError("invalid-config", f"{field}: {msg}", field=field)

        if self.f_start <= 0:
            fail("f_start", f"must be > 0, got {self.f_start}")
        if self.f_end <= self.f_start:
            fail("f_end", f"must exceed f_start={self.f_start}, got {self.f_end}")
        if self.frame_rate <= 0:
            fail("frame_rate", f"must be > 0, got {self.frame_rate}")
        if self.adc_rate <= 0:
            fail("adc_rate", f"must be > 0, got {self.adc_rate}")
        if self.n_antennas < 1:
            fail("n_antennas", f"must be >= 1, got {self.n_antennas}")
        if self.n_chirps < 1:
            fail("n_chirps", f"must be >= 1, got {self.n_chirps}")
        if self.n_samples < 2:
            fail("n_samples", f"must be >= 2, got {self.n_samples}")
        if self.chirp_slope <= 0:
            fail("chirp_slope", f"must be > 0, got {self.chirp_slope}")
        t_c = self.chirp_time
        if self.chirp_repetition < t_c * (1.0 - _REL_TOL):
            fail("chirp_repetition",
                 f"must be >= active chirp time {t_c:.3e} s, got {self.chirp_repetition:.3e} s")
        idle = self.frame_idle_s
        if idle < -_REL_TOL / self.frame_rate:
            fail("frame_idle",
                 f"chirps do not fit the frame period: N_c*T_cr = "
                 f"{self.n_chirps * self.chirp_repetition:.3e} s > 1/frame_rate = "
                 f"{1.0 / self.frame_rate:.3e} s")
        if self.frame_time > (1.0 / self.frame_rate) * (1.0 + _REL_TOL):
            fail("frame_idle",
                 f"frame time {self.frame_time:.3e} s exceeds the frame period "
                 f"{1.0 / self.frame_rate:.3e} s")


@dataclass(frozen=True)
class DerivedParams:
    """Closed-form quantities implied by a :class:`RadarConfig`."""

    wavelength: float      # lambda at the sweep centre [m]
    d_res: float           # range resolution c/(2B) [m]
    d_max: float           # maximum mapped range F_s*c/(2S) [m]
    v_max: float           # unambiguous velocity lambda/(4*T_cr) [m/s]
    v_res: float           # velocity resolution lambda/(2*N_c*T_cr) [m/s]
    slow_time_rate: float  # frame rate [Hz]


def derive_params(config: RadarConfig) -> DerivedParams:
    """Evaluate all derived acquisition limits for a valid configuration."""
    config.validate()
    lam = C_LIGHT / config.center_frequency
    return DerivedParams(
        wavelength=lam,
        d_res=C_LIGHT / (2.0 * config.bandwidth),
        d_max=config.adc_rate * C_LIGHT / (2.0 * config.chirp_slope),
        v_max=lam / (4.0 * config.chirp_repetition),
        v_res=lam / (2.0 * config.n_chirps * config.chirp_repetition),
        slow_time_rate=config.frame_rate,
    )


def phase_to_displacement(delta_phi: float, wavelength: float) -> float:
    """Radial displacement for a slow-time phase change: lambda*dphi/(4*pi)."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength}")
    return wavelength * delta_phi / (4.0 * math.pi)


def displacement_to_phase(delta_d: float, wavelength: float) -> float:
    """Inverse of :func:`phase_to_displacement`: 4*pi*dd/lambda."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength}")
    return 4.0 * math.pi * delta_d / wavelength


def if_frequency(distance: float, slope: float) -> float:
    """Beat (IF) frequency of a reflector: S * 2d/c."""
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    if slope <= 0:
        raise ValueError(f"slope must be > 0, got {slope}")
    return slope * 2.0 * distance / C_LIGHT


def radome_spacing(wavelength: float, multiple: int = 1) -> float:
    """Radar-to-radome spacing at half-wavelength multiples."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength}")
    if multiple < 1:
        raise ValueError(f"multiple must be >= 1, got {multiple}")
    return multiple * wavelength / 2.0


# --- serialization -----------------------------------------------------------
#
# On-disk format: flat YAML mapping, SI values, unit spelled in the key.

_FIELD_TO_KEY = {
    "f_start": "f_start_hz",
    "f_end": "f_end_hz",
    "frame_rate": "frame_rate_hz",
    "adc_rate": "adc_rate_hz",
    "n_antennas": "n_antennas",
    "n_chirps": "n_chirps",
    "n_samples": "n_samples",
    "chirp_slope": "chirp_slope_hz_per_s",
    "chirp_repetition": "chirp_repetition_s",
    "frame_idle": "frame_idle_s",
}
_KEY_TO_FIELD = {v: k for k, v in _FIELD_TO_KEY.items()}
_INT_FIELDS = ("n_antennas", "n_chirps", "n_samples")


def config_to_dict(config: RadarConfig) -> dict:
    return {key: getattr(config, field) for field, key in _FIELD_TO_KEY.items()}


def config_from_dict(data: dict) -> RadarConfig:
    if not isinstance(data, dict):
        raise ConfigError("invalid-config", f"expected a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - set(_KEY_TO_FIELD))
    if unknown:
        raise ConfigError("invalid-config", f"unknown keys: {', '.join(unknown)}")
    missing = sorted(set(_KEY_TO_FIELD) - set(data) - {"frame_idle_s"})
    if missing:
        raise ConfigError("invalid-config", f"missing keys: {', '.join(missing)}")
    kwargs = {}
    for key, value in data.items():
        field = _KEY_TO_FIELD[key]
        if field == "frame_idle" and value is None:
            kwargs[field] = None
        elif field in _INT_FIELDS:
            kwargs[field] = int(value)
        else:
            if not isinstance(value, (int, float)):
                raise ConfigError("invalid-config", f"{key}: expected a number, got {value!r}",
                                  field=field)
            kwargs[field] = float(value)
    config = RadarConfig(**kwargs)
    config.validate()
    return config


def save_config(config: RadarConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(config), sort_keys=False))


def load_config(path: str | Path) -> RadarConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError("invalid-config", f"{path}: not valid YAML ({exc})") from exc
    return config_from_dict(data)


def load_preset(name: str) -> RadarConfig:
    """Load one of the shipped acquisition presets ("movement", "vital-sign")."""
    if name not in PRESET_NAMES:
        raise ConfigError("invalid-config",
                          f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    text = resources.files("cageradar.presets").joinpath(f"{name}.yaml").read_text()
    return config_from_dict(yaml.safe_load(text))
