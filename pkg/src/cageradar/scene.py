"""Ground-truth scene model and raw IF frame synthesis.

A scene is a set of point reflectors: targets with piecewise-linear
trajectories plus micro-motions, and static clutter.  Each chirp of a frame
accumulates, per reflector at instantaneous range ``d``,

    a * cos(2*pi * f_if(d) * t  +  4*pi * d / lambda),      f_if = 2*d*S/c

with ``a = reflectivity * range_ref / d`` (1/r amplitude roll-off, 1/r^2 in
power) and independent white Gaussian noise per antenna on top of the shared
deterministic signal.  The fast-time axis is referenced to the chirp centre so
that the spectral phase of a target's range bin equals the 4*pi*d/lambda term
regardless of the tone's sub-bin frequency offset.

Micro-motion displacement is evaluated at chirp-start times and held constant
within a chirp (chest motion is quasi-static over a <100 us chirp).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .config import C_LIGHT, RadarConfig, derive_params
from .errors import SceneError

MICRO_MOTION_KINDS = ("breathing", "cardiac", "fixed_tone")
WAVEFORMS = ("sinusoid", "rectified_sinusoid", "pulse_train")

# Gaussian pulse width of the pulse_train waveform, as a fraction of the period.
PULSE_SIGMA_FRACTION = 0.08

DEFAULT_V_CAP_MPS = 3.5      # caged-rodent top speed
DEFAULT_RANGE_REF_M = 0.1    # range at which a reflector of reflectivity 1 has unit amplitude


@dataclass(frozen=True)
class MicroMotion:
    """Periodic micro-displacement added to a target's range.

    ``amplitude_m`` is the peak displacement.  ``window_s`` optionally gates
    the motion to a [start, end) interval of scene time.
    """

    kind: str = "fixed_tone"
    rate_bpm: float = 200.0
    amplitude_m: float = 0.3e-3
    waveform: str = "sinusoid"
    phase_offset: float = 0.0               # [rad]
    window_s: tuple[float, float] | None = None

    def validate(self) -> None:
        if self.kind not in MICRO_MOTION_KINDS:
            raise SceneError("invalid-scene", f"unknown micro-motion kind {self.kind!r}")
        if self.waveform not in WAVEFORMS:
            raise SceneError("invalid-scene", f"unknown waveform {self.waveform!r}")
        if self.rate_bpm <= 0:
            raise SceneError("invalid-scene", f"micro-motion rate must be > 0, got {self.rate_bpm}")
        if self.amplitude_m < 0:
            raise SceneError("invalid-scene",
                             f"micro-motion amplitude must be >= 0, got {self.amplitude_m}")
        if self.window_s is not None and self.window_s[1] <= self.window_s[0]:
            raise SceneError("invalid-scene", f"empty micro-motion window {self.window_s}")

    def displacement(self, t: np.ndarray) -> np.ndarray:
        """Displacement [m] at scene times ``t`` [s]."""
        t = np.asarray(t, dtype=np.float64)
        f = self.rate_bpm / 60.0
        if self.waveform == "sinusoid":
            out = self.amplitude_m * np.sin(2.0 * np.pi * f * t + self.phase_offset)
        elif self.waveform == "rectified_sinusoid":
            out = self.amplitude_m * np.abs(np.sin(np.pi * f * t + self.phase_offset))
        else:  # pulse_train: periodic Gaussian pulses, one per beat
            period = 1.0 / f
            sigma = PULSE_SIGMA_FRACTION * period
            u = np.mod(t + self.phase_offset / (2.0 * np.pi * f), period) - 0.5 * period
            out = self.amplitude_m * np.exp(-0.5 * (u / sigma) ** 2)
        if self.window_s is not None:
            out = out * ((t >= self.window_s[0]) & (t < self.window_s[1]))
        return out


def breathing_motion(rate_bpm: float = 220.0, amplitude_m: float = 0.25e-3,
                     **kwargs) -> MicroMotion:
    """Respiratory preset: 150-300 bpm band, 0.1-0.5 mm chest excursion."""
    return MicroMotion(kind="breathing", rate_bpm=rate_bpm, amplitude_m=amplitude_m,
                       waveform="sinusoid", **kwargs)


def cardiac_motion(rate_bpm: float = 600.0, amplitude_m: float = 20e-6,
                   **kwargs) -> MicroMotion:
    """Cardiac preset: 500-700 bpm band, 3.9-32.4 um impulsive chest-wall motion."""
    return MicroMotion(kind="cardiac", rate_bpm=rate_bpm, amplitude_m=amplitude_m,
                       waveform="pulse_train", **kwargs)


@dataclass(frozen=True)
class Target:
    """Moving reflector: piecewise-linear trajectory plus micro-motions."""

    waypoints: tuple[tuple[float, float], ...]   # (time_s, range_m)
    rcs: float = 0.5                             # reflectivity in (0, 1]
    micro_motions: tuple[MicroMotion, ...] = ()
    label: str = "target"

    def validate(self, v_cap_mps: float = DEFAULT_V_CAP_MPS) -> None:
        if len(self.waypoints) < 1:
            raise SceneError("invalid-scene", f"target {self.label!r} has no waypoints")
        if not 0.0 < self.rcs <= 1.0:
            raise SceneError("invalid-scene",
                             f"target {self.label!r} rcs must be in (0, 1], got {self.rcs}")
        times = np.array([w[0] for w in self.waypoints])
        ranges = np.array([w[1] for w in self.waypoints])
        if np.any(np.diff(times) <= 0) and len(times) > 1:
            raise SceneError("invalid-scene",
                             f"target {self.label!r} waypoint times must increase")
        if np.any(ranges <= 0):
            raise SceneError("invalid-scene",
                             f"target {self.label!r} ranges must be > 0")
        if len(times) > 1:
            slopes = np.abs(np.diff(ranges) / np.diff(times))
            if np.any(slopes > v_cap_mps * (1 + 1e-9)):
                raise SceneError("invalid-scene",
                                 f"target {self.label!r} trajectory slope "
                                 f"{slopes.max():.3f} m/s exceeds cap {v_cap_mps} m/s")
        for m in self.micro_motions:
            m.validate()

    def base_range(self, t: np.ndarray) -> np.ndarray:
        """Trajectory range [m] without micro-motion."""
        times = [w[0] for w in self.waypoints]
        ranges = [w[1] for w in self.waypoints]
        return np.interp(np.asarray(t, dtype=np.float64), times, ranges)

    def range_at(self, t: np.ndarray) -> np.ndarray:
        """Instantaneous range: trajectory plus summed micro-displacements."""
        d = self.base_range(t)
        for m in self.micro_motions:
            d = d + m.displacement(t)
        return d

    def velocity_at(self, t: np.ndarray, dt: float = 1e-3) -> np.ndarray:
        """Trajectory range rate [m/s] (central difference, micro-motion excluded)."""
        t = np.asarray(t, dtype=np.float64)
        return (self.base_range(t + 0.5 * dt) - self.base_range(t - 0.5 * dt)) / dt


@dataclass(frozen=True)
class ClutterReflector:
    """Static reflector (cage wall, bottle, rack strut...)."""

    range_m: float
    reflectivity: float


@dataclass(frozen=True)
class Scene:
    """Ground-truth world: targets, clutter, noise and occlusion behaviour."""

    duration_s: float
    targets: tuple[Target, ...] = ()
    clutter: tuple[ClutterReflector, ...] = ()
    noise_std: float = 0.0           # per-sample AWGN std, full-scale units
    occlusion_factor: float = 1.0    # amplitude multiplier on a shadowed target
    seed: int = 0
    v_cap_mps: float = DEFAULT_V_CAP_MPS
    range_ref_m: float = DEFAULT_RANGE_REF_M

    def validate(self) -> None:
        if self.duration_s <= 0:
            raise SceneError("invalid-scene", f"duration must be > 0, got {self.duration_s}")
        if not 0.0 <= self.occlusion_factor <= 1.0:
            raise SceneError("invalid-scene",
                             f"occlusion_factor must be in [0, 1], got {self.occlusion_factor}")
        if self.noise_std < 0:
            raise SceneError("invalid-scene", f"noise_std must be >= 0, got {self.noise_std}")
        if self.seed < 0:
            raise SceneError("invalid-scene", f"seed must be >= 0, got {self.seed}")
        for target in self.targets:
            target.validate(self.v_cap_mps)
        for c in self.clutter:
            if c.range_m <= 0:
                raise SceneError("invalid-scene",
                                 f"clutter range must be > 0, got {c.range_m}")
            if not 0.0 < c.reflectivity <= 1.0:
                raise SceneError("invalid-scene",
                                 f"clutter reflectivity must be in (0, 1], got {c.reflectivity}")


@dataclass(frozen=True)
class RawFrame:
    """One frame of real IF samples, indexed [antenna][chirp][sample].

    Synthesized and stored frames are float32 and full-scale normalized to
    [-1, 1]; intermediate processing stages may carry float64 samples.
    ``clipped_samples`` reports how many samples hit the rails at synthesis.
    """

    timestamp: float
    samples: np.ndarray
    clipped_samples: int = 0


def _occlusion_multipliers(ranges: np.ndarray, d_res: float, factor: float) -> np.ndarray:
    """Per-target amplitude multipliers for shadowing.

    ``ranges`` has shape (n_targets, n_times); whenever two targets sit within
    one ``d_res`` of each other the farther one is attenuated by ``factor``.
    """
    n = ranges.shape[0]
    mult = np.ones_like(ranges)
    if factor == 1.0 or n < 2:
        return mult
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            shadowed = (np.abs(ranges[i] - ranges[j]) < d_res) & (ranges[j] < ranges[i])
            mult[i] = np.where(shadowed, mult[i] * factor, mult[i])
    return mult


def occlude(scene: Scene, config: RadarConfig, t: float) -> np.ndarray:
    """Effective per-target amplitude multipliers at scene time ``t``."""
    if not scene.targets:
        raise SceneError("invalid-scene", "occlude requires at least one target")
    derived = derive_params(config)
    ranges = np.array([[float(tg.range_at(t))] for tg in scene.targets])
    return _occlusion_multipliers(ranges, derived.d_res, scene.occlusion_factor)[:, 0]


def n_frames(scene: Scene, config: RadarConfig) -> int:
    """Number of whole frames the scene supports."""
    return int(scene.duration_s * config.frame_rate + 1e-9)


def synthesize_frame(scene: Scene, config: RadarConfig, frame_index: int,
                     seed: int | None = None) -> RawFrame:
    """Synthesize one raw IF frame.

    Reproducibility contract: the noise stream is derived from
    ``(seed, frame_index, antenna)`` so frames can be generated out of order
    or in parallel and still match a serial run bit for bit.
    """
    scene.validate()
    derived = derive_params(config)
    return _synthesize_validated(scene, config, derived, frame_index, seed)


def _synthesize_validated(scene: Scene, config: RadarConfig, derived,
                          frame_index: int, seed: int | None) -> RawFrame:
    t0 = frame_index / config.frame_rate
    if frame_index < 0 or t0 > scene.duration_s + 1e-12:
        raise SceneError("scene-exhausted",
                         f"frame {frame_index} at t={t0:.6f} s is outside the "
                         f"{scene.duration_s} s scene")

    n_a, n_c, n_s = config.n_antennas, config.n_chirps, config.n_samples
    chirp_t = t0 + np.arange(n_c) * config.chirp_repetition
    # Chirp-centre fast-time reference: see module docstring.
    fast_t = ((np.arange(n_s) - (n_s - 1) / 2.0) / config.adc_rate).astype(np.float32)

    signal = np.zeros((n_c, n_s), dtype=np.float32)
    reflectors: list[tuple[np.ndarray, np.ndarray]] = []  # (range per chirp, amplitude)
    if scene.targets:
        target_ranges = np.stack([tg.range_at(chirp_t) for tg in scene.targets])
        occ = _occlusion_multipliers(target_ranges, derived.d_res, scene.occlusion_factor)
        for tg, d, mult in zip(scene.targets, target_ranges, occ):
            reflectors.append((d, tg.rcs * mult))
    for c in scene.clutter:
        reflectors.append((np.full(n_c, c.range_m), np.full(n_c, c.reflectivity)))

    two_pi = 2.0 * np.pi
    for d, refl in reflectors:
        if np.any(d <= 0) or np.any(d >= derived.d_max):
            raise SceneError("config-mismatch",
                             f"reflector range [{d.min():.3f}, {d.max():.3f}] m is outside "
                             f"(0, d_max={derived.d_max:.3f}) m for this config")
        amp = (refl * scene.range_ref_m / d).astype(np.float32)
        omega_if = (two_pi * 2.0 * d * config.chirp_slope / C_LIGHT).astype(np.float32)
        # carrier phase reduced mod 2*pi in double before the float32 cos
        phase = np.mod(4.0 * np.pi * d / derived.wavelength, two_pi).astype(np.float32)
        arg = omega_if[:, None] * fast_t[None, :]
        arg += phase[:, None]
        signal += amp[:, None] * np.cos(arg)

    samples = np.broadcast_to(signal, (n_a, n_c, n_s)).copy()
    if scene.noise_std > 0:
        base_seed = scene.seed if seed is None else seed
        std = np.float32(scene.noise_std)
        for ant in range(n_a):
            rng = np.random.default_rng(
                np.random.SeedSequence((base_seed, frame_index, ant)))
            samples[ant] += rng.standard_normal((n_c, n_s), dtype=np.float32) * std

    clipped = int(np.count_nonzero(np.abs(samples) > 1.0))
    if clipped:
        np.clip(samples, -1.0, 1.0, out=samples)
    return RawFrame(timestamp=t0, samples=samples, clipped_samples=clipped)


def iter_frames(scene: Scene, config: RadarConfig, count: int | None = None,
                start: int = 0, seed: int | None = None):
    """Yield consecutive synthesized frames (``count`` defaults to the whole scene)."""
    scene.validate()
    derived = derive_params(config)
    total = n_frames(scene, config) if count is None else count
    for index in range(start, start + total):
        yield _synthesize_validated(scene, config, derived, index, seed)


# --- serialization -----------------------------------------------------------


def scene_to_dict(scene: Scene) -> dict:
    def motion(m: MicroMotion) -> dict:
        out = {
            "kind": m.kind,
            "rate_bpm": m.rate_bpm,
            "amplitude_um": m.amplitude_m * 1e6,
            "waveform": m.waveform,
            "phase_offset_rad": m.phase_offset,
        }
        if m.window_s is not None:
            out["window_s"] = [m.window_s[0], m.window_s[1]]
        return out

    return {
        "duration_s": scene.duration_s,
        "seed": scene.seed,
        "noise_std": scene.noise_std,
        "occlusion_factor": scene.occlusion_factor,
        "v_cap_mps": scene.v_cap_mps,
        "range_ref_m": scene.range_ref_m,
        "targets": [
            {
                "label": tg.label,
                "rcs": tg.rcs,
                "waypoints": [[t, r] for t, r in tg.waypoints],
                "micro_motions": [motion(m) for m in tg.micro_motions],
            }
            for tg in scene.targets
        ],
        "clutter": [{"range_m": c.range_m, "reflectivity": c.reflectivity}
                    for c in scene.clutter],
    }


def scene_from_dict(data: dict) -> Scene:
    if not isinstance(data, dict):
        raise SceneError("invalid-scene", f"expected a mapping, got {type(data).__name__}")
    try:
        targets = []
        for tdata in data.get("targets", []):
            motions = []
            for mdata in tdata.get("micro_motions", []):
                window = mdata.get("window_s")
                motions.append(MicroMotion(
                    kind=mdata.get("kind", "fixed_tone"),
                    rate_bpm=float(mdata["rate_bpm"]),
                    amplitude_m=float(mdata["amplitude_um"]) * 1e-6,
                    waveform=mdata.get("waveform", "sinusoid"),
                    phase_offset=float(mdata.get("phase_offset_rad", 0.0)),
                    window_s=None if window is None else (float(window[0]), float(window[1])),
                ))
            targets.append(Target(
                waypoints=tuple((float(t), float(r)) for t, r in tdata["waypoints"]),
                rcs=float(tdata.get("rcs", 0.5)),
                micro_motions=tuple(motions),
                label=str(tdata.get("label", "target")),
            ))
        clutter = tuple(ClutterReflector(float(c["range_m"]), float(c["reflectivity"]))
                        for c in data.get("clutter", []))
        scene = Scene(
            duration_s=float(data["duration_s"]),
            targets=tuple(targets),
            clutter=clutter,
            noise_std=float(data.get("noise_std", 0.0)),
            occlusion_factor=float(data.get("occlusion_factor", 1.0)),
            seed=int(data.get("seed", 0)),
            v_cap_mps=float(data.get("v_cap_mps", DEFAULT_V_CAP_MPS)),
            range_ref_m=float(data.get("range_ref_m", DEFAULT_RANGE_REF_M)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError("invalid-scene", f"malformed scene description: {exc}") from exc
    scene.validate()
    return scene


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(scene_to_dict(scene), sort_keys=False))


def load_scene(path: str | Path) -> Scene:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise SceneError("invalid-scene", f"{path}: not valid YAML ({exc})") from exc
    return scene_from_dict(data)


def noise_std_for_snr(target_amplitude: float, snr_db: float) -> float:
    """Per-sample noise std that puts a tone of the given amplitude at ``snr_db``."""
    return target_amplitude / np.sqrt(2.0 * 10.0 ** (snr_db / 10.0))
