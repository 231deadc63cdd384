"""Plot-data and report emission: plain-text numeric tables plus run.json.

All writes are atomic (tmp file + rename) and numbers are formatted with a
fixed %.9g so repeated seeded runs produce byte-identical artifacts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsp import RangeDopplerMap
from .tracking import TrackEstimate
from .vitals import VitalsEstimate

PLOT_KINDS = ("frame_power", "range_doppler_sequence", "displacement_zoom", "spectrum")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, float) and np.isnan(value):
        return ""
    return f"{value:.9g}"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def write_track_csv(path: str | Path, estimates: list[TrackEstimate]) -> Path:
    header = ["t_s", "range_m", "zone", "movement_power", "activity",
              "peak1_range_m", "peak1_vel_mps", "peak2_range_m", "peak2_vel_mps"]
    rows = []
    for e in estimates:
        p1 = e.peaks[0] if len(e.peaks) > 0 else None
        p2 = e.peaks[1] if len(e.peaks) > 1 else None
        rows.append([e.t, e.range_m, e.zone or "", e.movement_power, e.activity or "",
                     p1.range_m if p1 else None, p1.velocity_mps if p1 else None,
                     p2.range_m if p2 else None, p2.velocity_mps if p2 else None])
    return write_csv(path, header, rows)


def write_vitals_csv(path: str | Path, estimates: list[VitalsEstimate]) -> Path:
    header = ["window_start_s", "rr_bpm", "rr_confidence", "hr_bpm",
              "rr_ant1_bpm", "rr_ant2_bpm", "rr_ant3_bpm"]
    rows = []
    for e in estimates:
        per_ant = list(e.per_antenna_rr) + [None] * (3 - len(e.per_antenna_rr))
        rows.append([e.window_start_s, e.rr_bpm, e.rr_confidence, e.hr_bpm,
                     per_ant[0], per_ant[1], per_ant[2]])
    return write_csv(path, header, rows)


def emit_plot_data(out_dir: str | Path, kind: str, **series) -> list[Path]:
    """Write plot-ready numeric tables for one plot kind.

    frame_power:            t_s [s], frame_power
    range_doppler_sequence: one file per map; rows = range bins, cols = velocity bins
    displacement_zoom:      t_s [s] and displacement_m over a 0.5 s window
    spectrum:               freq_hz, bpm, magnitude
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; use one of {PLOT_KINDS}")

    if kind == "frame_power":
        t, power = np.asarray(series["t_s"]), np.asarray(series["power"])
        if t.size == 0:
            raise ValueError("frame_power series is empty")
        return [write_csv(out_dir / "frame_power.csv", ["t_s", "frame_power"],
                          zip(t, power))]

    if kind == "range_doppler_sequence":
        maps: list[RangeDopplerMap] = list(series["maps"])
        stamps = list(series["t_s"])
        if not maps:
            raise ValueError("range_doppler_sequence is empty")
        max_range = float(series.get("max_range_m", 0.6))
        paths = []
        for i, (stamp, rd) in enumerate(zip(stamps, maps)):
            n_keep = min(rd.n_range, int(np.ceil(max_range / rd.range_spacing)))
            power = rd.power.mean(axis=0)[:n_keep]
            header = ["range_m"] + [_fmt(v) for v in rd.velocities()]
            rows = [[r] + list(row)
                    for r, row in zip(rd.ranges()[:n_keep], power)]
            paths.append(write_csv(out_dir / f"range_doppler_{i:03d}_t{stamp:.2f}s.csv",
                                   header, rows))
        return paths

    if kind == "displacement_zoom":
        t = np.asarray(series["t_s"])
        x = np.asarray(series["displacement_m"])
        if t.size == 0:
            raise ValueError("displacement series is empty")
        center = float(series.get("center_s", t[t.size // 2]))
        width = float(series.get("width_s", 0.5))
        mask = (t >= center - width / 2) & (t <= center + width / 2)
        return [write_csv(out_dir / "displacement_zoom.csv",
                          ["t_s", "displacement_m"], zip(t[mask], x[mask]))]

    # spectrum
    freqs = np.asarray(series["freq_hz"])
    mag = np.asarray(series["magnitude"])
    if freqs.size == 0:
        raise ValueError("spectrum series is empty")
    rows = zip(freqs, 60.0 * freqs, mag)
    return [write_csv(out_dir / "spectrum.csv", ["freq_hz", "bpm", "magnitude"], rows)]


@dataclass
class RunReport:
    """Summary of one validation run: metrics plus their ground-truth definitions."""

    scenario: str
    preset: str
    mode: str
    clutter: str
    seed: int
    metrics: dict = field(default_factory=dict)
    definitions: dict = field(default_factory=dict)   # metric -> ground-truth text
    passed: bool | None = None
    artifacts: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "preset": self.preset,
            "mode": self.mode,
            "clutter": self.clutter,
            "seed": self.seed,
            "metrics": self.metrics,
            "definitions": self.definitions,
            "passed": self.passed,
            "artifacts": self.artifacts,
        }


def save_run_report(out_dir: str | Path, report: RunReport) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "run.json"
    _atomic_write(path, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def load_run_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
