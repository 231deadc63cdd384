"""Scripted validation scenarios and reusable scene builders.

The catalog mirrors the desk-scale validation protocol: a dragged puppet for
movement/ranging, a diapason-poked puppet vibrating at 200 bpm for the vitals
chain, and single-/two-mouse cage scenes with physiological presets.  Each
scenario can be instantiated at three cage-complexity levels modelled as
static clutter-reflector counts (empty / internal / full).

Mice are composed of two co-located reflectors (body + chest) so that
breathing moves only the chest portion of the echo; quasi-static, in-place
("static movement") and locomotion segments then land at distinct movement-
power levels, as a whole-body point reflector cannot reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import HarnessError
from .scene import (ClutterReflector, MicroMotion, Scene, Target,
                    breathing_motion, cardiac_motion, noise_std_for_snr)

CLUTTER_LEVELS = ("empty", "internal", "full")

# (range_m, reflectivity) of in-cage objects and, for "full", the metal rack.
_INTERNAL_CLUTTER = ((0.09, 0.10), (0.125, 0.12), (0.27, 0.08),
                     (0.355, 0.10), (0.385, 0.15))
_RACK_CLUTTER = ((0.44, 0.20), (0.50, 0.25), (0.57, 0.18))

DEFAULT_NOISE_STD = 0.005


def clutter_for_level(level: str) -> tuple[ClutterReflector, ...]:
    if level not in CLUTTER_LEVELS:
        raise HarnessError("unknown-scenario",
                           f"unknown clutter level {level!r}; use one of {CLUTTER_LEVELS}")
    if level == "empty":
        return ()
    reflectors = _INTERNAL_CLUTTER if level == "internal" else _INTERNAL_CLUTTER + _RACK_CLUTTER
    return tuple(ClutterReflector(r, a) for r, a in reflectors)


def _zigzag_waypoints(t0: float, t1: float, lo: float, hi: float, speed: float,
                      start: float | None = None) -> list[tuple[float, float]]:
    """Constant-|speed| triangle trajectory bouncing between lo and hi."""
    pos = lo if start is None else start
    heading_up = pos < hi
    t = t0
    points = [(t, pos)]
    while t < t1:
        goal = hi if heading_up else lo
        if goal == pos:
            heading_up = not heading_up
            continue
        dt = abs(goal - pos) / speed
        if t + dt >= t1:
            frac = (t1 - t) / dt
            points.append((t1, pos + (goal - pos) * frac))
            break
        t += dt
        pos = goal
        points.append((t, pos))
        heading_up = not heading_up
    return points


def mouse_targets(label: str, waypoints, *, body_rcs: float = 0.45,
                  chest_rcs: float = 0.15, rr_bpm: float = 220.0,
                  breathing_amplitude_m: float = 0.15e-3,
                  hr_bpm: float | None = 600.0,
                  extra_chest_motions: tuple[MicroMotion, ...] = (),
                  extra_body_motions: tuple[MicroMotion, ...] = ()) -> list[Target]:
    """Body + chest reflector pair sharing one trajectory."""
    chest_motions = [breathing_motion(rr_bpm, breathing_amplitude_m)]
    if hr_bpm is not None:
        chest_motions.append(cardiac_motion(hr_bpm))
    chest_motions.extend(extra_chest_motions)
    wp = tuple(waypoints)
    return [
        Target(waypoints=wp, rcs=body_rcs, micro_motions=tuple(extra_body_motions),
               label=f"{label}-body"),
        Target(waypoints=wp, rcs=chest_rcs, micro_motions=tuple(chest_motions),
               label=f"{label}-chest"),
    ]


# --- free-standing builders (used by the catalog and the acceptance suite) ----


def puppet_move_scene(clutter: str = "internal", seed: int = 11) -> Scene:
    """Agar puppet dragged along the cage: moves 5-10 s and 20-25 s, else still."""
    puppet = Target(
        waypoints=((0.0, 0.06), (5.0, 0.06), (10.0, 0.36),
                   (20.0, 0.36), (25.0, 0.06), (30.0, 0.06)),
        rcs=0.8, label="puppet")
    return Scene(duration_s=30.0, targets=(puppet,),
                 clutter=clutter_for_level(clutter),
                 noise_std=DEFAULT_NOISE_STD, seed=seed)


def vibration_scene(clutter: str = "internal", seed: int = 12,
                    rate_bpm: float = 200.0, amplitude_m: float = 0.3e-3) -> Scene:
    """Stationary puppet poked by a diapason at 200 bpm (sub-millimeter tone)."""
    puppet = Target(
        waypoints=((0.0, 0.20),),
        rcs=0.8,
        micro_motions=(MicroMotion(kind="fixed_tone", rate_bpm=rate_bpm,
                                   amplitude_m=amplitude_m, waveform="sinusoid"),),
        label="puppet")
    return Scene(duration_s=20.0, targets=(puppet,),
                 clutter=clutter_for_level(clutter),
                 noise_std=DEFAULT_NOISE_STD, seed=seed)


# Rest spots and transit times of the single-mouse script (first 25 s visit
# all three zones; from 35 s the mouse dozes for the vitals segment).
_SINGLE_MOUSE_WAYPOINTS = (
    (0.0, 0.10), (6.0, 0.10), (9.0, 0.20), (15.0, 0.20),
    (18.0, 0.31), (25.0, 0.31), (29.0, 0.14), (180.0, 0.14),
)
SINGLE_MOUSE_RR_BPM = 220.0
SINGLE_MOUSE_QUIET_FROM_S = 35.0


def single_mouse_scene(clutter: str = "internal", seed: int = 13) -> Scene:
    mouse = mouse_targets("mouse", _SINGLE_MOUSE_WAYPOINTS,
                          rr_bpm=SINGLE_MOUSE_RR_BPM,
                          breathing_amplitude_m=0.25e-3)
    return Scene(duration_s=180.0, targets=tuple(mouse),
                 clutter=clutter_for_level(clutter),
                 noise_std=DEFAULT_NOISE_STD, occlusion_factor=0.5, seed=seed)


TWO_MICE_SPEEDS = (0.20, 0.12)   # [m/s], deliberately distinct Doppler signatures


def two_mice_scene(clutter: str = "internal", seed: int = 14,
                   duration_s: float = 180.0) -> Scene:
    m1 = mouse_targets("mouse-1",
                       _zigzag_waypoints(0.0, duration_s, 0.08, 0.30,
                                         TWO_MICE_SPEEDS[0]),
                       rr_bpm=240.0)
    m2 = mouse_targets("mouse-2",
                       _zigzag_waypoints(0.0, duration_s, 0.12, 0.34,
                                         TWO_MICE_SPEEDS[1], start=0.34),
                       body_rcs=0.40, chest_rcs=0.13, rr_bpm=190.0)
    return Scene(duration_s=duration_s, targets=tuple(m1 + m2),
                 clutter=clutter_for_level(clutter),
                 noise_std=DEFAULT_NOISE_STD, occlusion_factor=0.5, seed=seed)


def activity_scene(segments: tuple[tuple[float, float], ...] = ((0.0, 5.0), (5.0, 8.0), (8.0, 15.0)),
                   clutter: str = "internal", seed: int = 15) -> tuple[Scene, tuple]:
    """Scripted DM / QS / SM scene plus its (t0, t1, label) ground truth.

    Locomotion from 0.10 m to a rest spot during the first segment, pure
    breathing in the second, windowed in-place jitter (grooming) in the third.
    """
    from . import tracking

    (dm0, dm1), (qs0, qs1), (sm0, sm1) = segments
    rest = 0.26
    jitter_window = (sm0, sm1)
    body_jitter = MicroMotion(kind="fixed_tone", rate_bpm=132.0, amplitude_m=0.34e-3,
                              waveform="sinusoid", window_s=jitter_window)
    chest_jitter = MicroMotion(kind="fixed_tone", rate_bpm=168.0, amplitude_m=0.55e-3,
                               waveform="sinusoid", window_s=jitter_window)
    mouse = mouse_targets(
        "mouse", ((dm0, 0.10), (dm1, rest), (sm1, rest)),
        rr_bpm=216.0, breathing_amplitude_m=0.15e-3, hr_bpm=None,
        extra_body_motions=(body_jitter,), extra_chest_motions=(chest_jitter,))
    scene = Scene(duration_s=sm1, targets=tuple(mouse),
                  clutter=clutter_for_level(clutter),
                  noise_std=0.002, seed=seed)
    truth = ((dm0, dm1, tracking.DYNAMIC),
             (qs0, qs1, tracking.QUASI_STATIC),
             (sm0, sm1, tracking.STATIC_MOVEMENT))
    return scene, truth


def quasi_static_scene(range_m: float = 0.26, duration_s: float = 6.0,
                       seed: int = 16, clutter: str = "internal") -> Scene:
    """Calibration scene: a resting, breathing mouse (activity baseline)."""
    mouse = mouse_targets("mouse", ((0.0, range_m),), rr_bpm=216.0,
                          breathing_amplitude_m=0.15e-3, hr_bpm=None)
    return Scene(duration_s=duration_s, targets=tuple(mouse),
                 clutter=clutter_for_level(clutter), noise_std=0.002, seed=seed)


def breathing_scene(rate_bpm: float, amplitude_m: float = 0.3e-3,
                    duration_s: float = 70.0, range_m: float = 0.20,
                    rcs: float = 0.8, snr_db: float | None = 20.0,
                    seed: int = 17, clutter: str = "empty",
                    waveform: str = "sinusoid") -> Scene:
    """Stationary breathing-only target, noise set by per-sample tone SNR."""
    target = Target(
        waypoints=((0.0, range_m),), rcs=rcs,
        micro_motions=(MicroMotion(kind="breathing", rate_bpm=rate_bpm,
                                   amplitude_m=amplitude_m, waveform=waveform),),
        label="chest")
    amp = rcs * 0.1 / range_m
    noise = 0.0 if snr_db is None else noise_std_for_snr(amp, snr_db)
    return Scene(duration_s=duration_s, targets=(target,),
                 clutter=clutter_for_level(clutter), noise_std=noise, seed=seed)


def cardiac_scene(hr_bpm: float = 550.0, amplitude_m: float = 20e-6,
                  breathing_bpm: float | None = None,
                  breathing_amplitude_m: float = 0.3e-3,
                  duration_s: float = 30.0, range_m: float = 0.20,
                  rcs: float = 0.8, snr_db: float | None = 30.0,
                  seed: int = 18) -> Scene:
    """Stationary target with a cardiac pulse train, optional breathing on top."""
    motions = [MicroMotion(kind="cardiac", rate_bpm=hr_bpm, amplitude_m=amplitude_m,
                           waveform="pulse_train")]
    if breathing_bpm is not None:
        motions.append(MicroMotion(kind="breathing", rate_bpm=breathing_bpm,
                                   amplitude_m=breathing_amplitude_m,
                                   waveform="sinusoid"))
    target = Target(waypoints=((0.0, range_m),), rcs=rcs,
                    micro_motions=tuple(motions), label="chest")
    amp = rcs * 0.1 / range_m
    noise = 0.0 if snr_db is None else noise_std_for_snr(amp, snr_db)
    return Scene(duration_s=duration_s, targets=(target,), noise_std=noise, seed=seed)


def static_reflectors_scene(ranges, reflectivity: float = 0.5,
                            duration_s: float = 1.0, seed: int = 19,
                            noise_std: float = 0.0) -> Scene:
    targets = tuple(Target(waypoints=((0.0, r),), rcs=reflectivity,
                           label=f"reflector-{i}")
                    for i, r in enumerate(ranges))
    return Scene(duration_s=duration_s, targets=targets, noise_std=noise_std, seed=seed)


def constant_velocity_scene(velocity_mps: float, start_m: float = 0.15,
                            duration_s: float = 1.0, rcs: float = 0.6,
                            seed: int = 20, noise_std: float = 0.0) -> Scene:
    end = start_m + velocity_mps * duration_s
    target = Target(waypoints=((0.0, start_m), (duration_s, end)), rcs=rcs,
                    label="mover")
    return Scene(duration_s=duration_s, targets=(target,), noise_std=noise_std,
                 seed=seed)


# --- catalog ------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """Catalog entry: scene builder, processing modes and ground truth."""

    name: str
    description: str
    modes: tuple[str, ...]                 # "movement" and/or "vitals"
    build: Callable[[str, int], Scene]
    default_seed: int
    rr_gt_bpm: float | None = None
    movement_segments: tuple[tuple[float, float], ...] | None = None
    quiet_from_s: float | None = None
    n_targets: int = 1


def scripted_scenarios() -> dict[str, Scenario]:
    """The named validation catalog."""
    return {
        "puppet-move": Scenario(
            name="puppet-move",
            description="30 s puppet dragged 0.06-0.36 m during 5-10 s and 20-25 s",
            modes=("movement",),
            build=lambda clutter, seed: puppet_move_scene(clutter, seed),
            default_seed=11,
            movement_segments=((5.0, 10.0), (20.0, 25.0)),
        ),
        "vibration-200bpm": Scenario(
            name="vibration-200bpm",
            description="20 s stationary puppet vibrating at 200 bpm",
            modes=("vitals",),
            build=lambda clutter, seed: vibration_scene(clutter, seed),
            default_seed=12,
            rr_gt_bpm=200.0,
        ),
        "single-mouse": Scenario(
            name="single-mouse",
            description="180 s single mouse: roams all zones, then dozes",
            modes=("movement", "vitals"),
            build=lambda clutter, seed: single_mouse_scene(clutter, seed),
            default_seed=13,
            rr_gt_bpm=SINGLE_MOUSE_RR_BPM,
            quiet_from_s=SINGLE_MOUSE_QUIET_FROM_S,
        ),
        "two-mice": Scenario(
            name="two-mice",
            description="180 s two mice roaming at distinct speeds",
            modes=("movement",),
            build=lambda clutter, seed: two_mice_scene(clutter, seed),
            default_seed=14,
            n_targets=2,
        ),
    }


def get_scenario(name: str) -> Scenario:
    catalog = scripted_scenarios()
    if name not in catalog:
        raise HarnessError("unknown-scenario",
                           f"unknown scenario {name!r}; available: "
                           f"{', '.join(sorted(catalog))}")
    return catalog[name]
