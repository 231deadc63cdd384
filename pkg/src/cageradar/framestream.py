"""Binary frame-stream file format.

Layout (all little-endian):

    magic "FMCW" | u16 format_version | u32 config_len | config YAML (UTF-8)
    | u64 frame_count | frames...

    frame := u64 timestamp [us] | float32 samples, [antenna][chirp][sample]
             in C order, (N_a, N_c, N_s) from the header config

Samples are stored as float32, so decode(encode(x)) is bit-identical for the
float32 frames the simulator produces.  Timestamps round-trip exactly when
they sit on the microsecond grid (every 1/frame_rate of the shipped presets
does).
"""

from __future__ import annotations

import io
import os
import struct
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .config import RadarConfig, config_from_dict, config_to_dict
from .errors import ConfigError, StreamError
from .scene import RawFrame

import yaml

MAGIC = b"FMCW"
FORMAT_VERSION = 1

_HEAD = struct.Struct("<4sHI")   # magic, version, config_len
_COUNT = struct.Struct("<Q")
_STAMP = struct.Struct("<Q")


def quantize_samples(samples: np.ndarray, bits: int = 12) -> np.ndarray:
    """Round full-scale samples to a signed ADC grid (quantization-noise studies)."""
    if bits < 2:
        raise ValueError(f"bits must be >= 2, got {bits}")
    levels = 2 ** (bits - 1) - 1
    return (np.round(np.asarray(samples, dtype=np.float64) * levels) / levels).astype(
        np.float32)


def write_frames(stream: BinaryIO, config: RadarConfig,
                 frames: Iterable[RawFrame], frame_count: int,
                 quantize_bits: int | None = None) -> None:
    config_blob = yaml.safe_dump(config_to_dict(config), sort_keys=False).encode()
    stream.write(_HEAD.pack(MAGIC, FORMAT_VERSION, len(config_blob)))
    stream.write(config_blob)
    stream.write(_COUNT.pack(frame_count))
    shape = (config.n_antennas, config.n_chirps, config.n_samples)
    written = 0
    for frame in frames:
        samples = np.asarray(frame.samples)
        if samples.shape != shape:
            raise StreamError("malformed-file",
                              f"frame shape {samples.shape} does not match config {shape}")
        if quantize_bits is not None:
            samples = quantize_samples(samples, quantize_bits)
        stream.write(_STAMP.pack(round(frame.timestamp * 1e6)))
        stream.write(np.ascontiguousarray(samples, dtype="<f4").tobytes())
        written += 1
    if written != frame_count:
        raise StreamError("malformed-file",
                          f"declared {frame_count} frames but wrote {written}")


def encode_stream(config: RadarConfig, frames: Iterable[RawFrame],
                  frame_count: int | None = None,
                  quantize_bits: int | None = None) -> bytes:
    frames = list(frames)
    buf = io.BytesIO()
    write_frames(buf, config, frames,
                 frame_count if frame_count is not None else len(frames),
                 quantize_bits=quantize_bits)
    return buf.getvalue()


def write_stream(path: str | Path, config: RadarConfig, frames: Iterable[RawFrame],
                 frame_count: int, quantize_bits: int | None = None) -> None:
    """Write a stream file atomically (tmp file + rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        write_frames(fh, config, frames, frame_count, quantize_bits=quantize_bits)
    os.replace(tmp, path)


def read_header(stream: BinaryIO) -> tuple[RadarConfig, int]:
    head = stream.read(_HEAD.size)
    if len(head) < _HEAD.size:
        raise StreamError("malformed-file", "truncated header")
    magic, version, config_len = _HEAD.unpack(head)
    if magic != MAGIC:
        raise StreamError("malformed-file", f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise StreamError("malformed-file",
                          f"unsupported format version {version}, expected {FORMAT_VERSION}")
    blob = stream.read(config_len)
    if len(blob) < config_len:
        raise StreamError("malformed-file", "truncated config block")
    try:
        config = config_from_dict(yaml.safe_load(blob.decode()))
    except (ConfigError, yaml.YAMLError, UnicodeDecodeError) as exc:
        raise StreamError("malformed-file", f"bad embedded config: {exc}") from exc
    count_raw = stream.read(_COUNT.size)
    if len(count_raw) < _COUNT.size:
        raise StreamError("malformed-file", "truncated frame count")
    (frame_count,) = _COUNT.unpack(count_raw)
    return config, frame_count


def iter_stream(stream: BinaryIO) -> tuple[RadarConfig, int, Iterator[RawFrame]]:
    """Header plus a lazy frame iterator over an open binary stream."""
    config, frame_count = read_header(stream)
    shape = (config.n_antennas, config.n_chirps, config.n_samples)
    frame_bytes = int(np.prod(shape)) * 4

    def frames() -> Iterator[RawFrame]:
        for i in range(frame_count):
            stamp_raw = stream.read(_STAMP.size)
            if len(stamp_raw) < _STAMP.size:
                raise StreamError("malformed-file",
                                  f"truncated at frame {i} of {frame_count}")
            (stamp_us,) = _STAMP.unpack(stamp_raw)
            raw = stream.read(frame_bytes)
            if len(raw) < frame_bytes:
                raise StreamError("malformed-file",
                                  f"truncated samples at frame {i} of {frame_count}")
            samples = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
            yield RawFrame(timestamp=stamp_us / 1e6, samples=samples)

    return config, frame_count, frames()


def decode_stream(blob: bytes) -> tuple[RadarConfig, list[RawFrame]]:
    config, _, frames = iter_stream(io.BytesIO(blob))
    return config, list(frames)


def read_stream(path: str | Path) -> tuple[RadarConfig, list[RawFrame]]:
    with open(path, "rb") as fh:
        config, _, frames = iter_stream(fh)
        return config, list(frames)


def open_stream(path: str | Path):
    """Open a stream file for sequential reading.

    Returns (config, frame_count, frame_iterator); the file handle closes when
    the iterator is exhausted.
    """
    fh = open(path, "rb")
    try:
        config, frame_count, frames = iter_stream(fh)
    except StreamError:
        fh.close()
        raise

    def closing() -> Iterator[RawFrame]:
        try:
            yield from frames
        finally:
            fh.close()

    return config, frame_count, closing()
