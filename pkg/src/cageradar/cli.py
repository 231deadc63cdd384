"""Command-line interface.

Subcommands: simulate (scene -> frame-stream file), process (frame-stream file
-> CSV series), validate (run a scripted scenario end to end), report
(aggregate run directories).  Exit codes: 0 ok, 2 usage, 3 data error,
4 validation failure.  Errors print one machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import metrics
from .config import PRESET_NAMES, load_preset
from .errors import CageRadarError, ConfigError
from .framestream import open_stream, write_stream
from .pipeline import MovementPipeline, VitalsPipeline
from .report import (RunReport, emit_plot_data, load_run_report, save_run_report,
                     write_track_csv, write_vitals_csv)
from .runner import run_validation
from .scenarios import CLUTTER_LEVELS, scripted_scenarios
from .scene import iter_frames, load_scene, n_frames

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA_ERROR = 3
EXIT_VALIDATION_FAILED = 4


def _error_line(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)


def _cmd_simulate(args) -> int:
    scene = load_scene(args.scene)
    config = load_preset(args.config_preset)
    total = n_frames(scene, config)
    frames = iter_frames(scene, config, count=total, seed=args.seed)
    write_stream(args.out, config, frames, total, quantize_bits=args.quantize_bits)
    print(f"wrote {total} frames ({config.n_antennas}x{config.n_chirps}x"
          f"{config.n_samples} float32) to {args.out}")
    return EXIT_OK


def _cmd_process(args) -> int:
    config, frame_count, frames = open_stream(args.infile)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.mode == "movement":
        pipe = MovementPipeline(config)
        for frame in frames:
            pipe.push(frame)
        result = pipe.finalize(thresholds="auto" if frame_count else None)
        write_track_csv(out_dir / "track.csv", result.estimates())
        emit_plot_data(out_dir, "frame_power", t_s=result.t,
                       power=result.movement_power)
        print(f"processed {frame_count} frames -> {out_dir / 'track.csv'}")
    else:
        pipe = VitalsPipeline(config)
        for frame in frames:
            pipe.push(frame)
        result = pipe.finalize()
        write_vitals_csv(out_dir / "vitals.csv", result.estimates)
        if result.series is not None:
            displacement = result.series.displacement.mean(axis=0)
            t = np.arange(displacement.size) / result.rate_hz
            emit_plot_data(out_dir, "displacement_zoom", t_s=t,
                           displacement_m=displacement)
            n_fft = 8 * displacement.size
            mag = np.abs(np.fft.rfft(displacement - displacement.mean(), n=n_fft))
            freqs = np.fft.rfftfreq(n_fft, d=1.0 / result.rate_hz)
            keep = freqs <= 12.0
            emit_plot_data(out_dir, "spectrum", freq_hz=freqs[keep],
                           magnitude=mag[keep])
        print(f"processed {frame_count} frames -> {out_dir / 'vitals.csv'}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    reports = run_validation(args.scenario, clutter=args.clutter, seed=args.seed,
                             out_dir=args.out_dir,
                             max_duration_s=args.max_duration)
    all_passed = True
    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        all_passed &= bool(report.passed)
        print(f"[{status}] {report.scenario} ({report.mode}, clutter={report.clutter})")
        for name, value in sorted(report.metrics.items()):
            print(f"    {name} = {value:.4g}" if isinstance(value, float)
                  else f"    {name} = {value}")
    return EXIT_OK if all_passed else EXIT_VALIDATION_FAILED


def _cmd_report(args) -> int:
    rows = []
    for run_dir in args.run_dirs:
        for path in sorted(Path(run_dir).rglob("run.json")):
            rows.append(load_run_report(path))
    if not rows:
        _error_line("no-estimates", "no run.json files found under the given directories")
        return EXIT_DATA_ERROR
    for row in rows:
        status = {True: "PASS", False: "FAIL", None: "-"}[row.get("passed")]
        metric_text = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                                for k, v in sorted(row.get("metrics", {}).items()))
        print(f"{row['scenario']:<18} {row['mode']:<9} {row['clutter']:<9} "
              f"{status:<5} {metric_text}")
    if args.out is not None:
        Path(args.out).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
        print(f"aggregate written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cageradar",
        description="FMCW radar simulation and processing for in-cage rodent "
                    "activity and vital-sign monitoring")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="synthesize a scene into a frame-stream file")
    p_sim.add_argument("--scene", required=True, help="scene YAML file")
    p_sim.add_argument("--config-preset", choices=PRESET_NAMES, required=True)
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the scene's noise seed")
    p_sim.add_argument("--out", required=True, help="output .rad file")
    p_sim.add_argument("--quantize-bits", type=int, default=None,
                       help="optionally quantize samples to an N-bit ADC grid")
    p_sim.set_defaults(func=_cmd_simulate)

    p_proc = sub.add_parser("process", help="run the pipeline over a frame-stream file")
    p_proc.add_argument("--in", dest="infile", required=True)
    p_proc.add_argument("--mode", choices=("movement", "vitals"), required=True)
    p_proc.add_argument("--out-dir", required=True)
    p_proc.set_defaults(func=_cmd_process)

    p_val = sub.add_parser("validate", help="run a scripted validation scenario")
    p_val.add_argument("--scenario", required=True,
                       help=f"one of: {', '.join(sorted(scripted_scenarios()))}")
    p_val.add_argument("--clutter", choices=CLUTTER_LEVELS, default="internal")
    p_val.add_argument("--seed", type=int, default=None)
    p_val.add_argument("--out-dir", default=None)
    p_val.add_argument("--max-duration", type=float, default=None,
                       help="trim the scene to the first N seconds")
    p_val.set_defaults(func=_cmd_validate)

    p_rep = sub.add_parser("report", help="aggregate validation run directories")
    p_rep.add_argument("run_dirs", nargs="+")
    p_rep.add_argument("--out", default=None, help="write combined JSON here")
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _error_line("malformed-file", str(exc))
        return EXIT_DATA_ERROR
    except CageRadarError as exc:
        _error_line(exc.code, str(exc))
        return EXIT_DATA_ERROR
    except ValueError as exc:
        _error_line("invalid-argument", str(exc))
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
