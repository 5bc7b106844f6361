"""Bit-exact binary container for latent trajectories.

Layout: 8-byte magic ``V2SGTRJ1``, 4-byte little-endian unsigned manifest
length, UTF-8 JSON manifest, then ``frame_count * layer_count * 512``
little-endian float32 values (frame-major, then layer-major). The container
is deterministic: identical trajectories serialize to identical bytes.
"""

from __future__ import annotations

import io
import json
from typing import BinaryIO

import numpy as np

from .errors import CorruptionError, FormatError, UnsupportedVersionError, ValidationError
from .types import LATENT_DIM, LatentTrajectory, LatentWPlus

TRAJECTORY_MAGIC = b"V2SGTRJ1"
_VERSION = 1


def write_trajectory(traj: LatentTrajectory, destination: BinaryIO) -> int:
    """Serialize *traj* to *destination*; returns the number of bytes written."""
    payload = traj.as_array()
    if not np.all(np.isfinite(payload)):
        raise ValidationError("trajectory contains non-finite values")
    manifest = {
        "version": _VERSION,
        "frame_count": traj.frame_count,
        "layer_count": traj.layer_count,
        "dim": LATENT_DIM,
        "dtype": "f32le",
        "fps": traj.fps,
        "source_id": traj.source_id,
    }
    header = json.dumps(manifest, separators=(",", ":")).encode("utf-8")
    blob = payload.astype("<f4", copy=False).tobytes()
    destination.write(TRAJECTORY_MAGIC)
    destination.write(len(header).to_bytes(4, "little"))
    destination.write(header)
    destination.write(blob)
    return len(TRAJECTORY_MAGIC) + 4 + len(header) + len(blob)


def read_trajectory(source: BinaryIO) -> LatentTrajectory:
    """Inverse of :func:`write_trajectory`."""
    magic = source.read(len(TRAJECTORY_MAGIC))
    if magic != TRAJECTORY_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {TRAJECTORY_MAGIC!r}")
    raw_len = source.read(4)
    if len(raw_len) != 4:
        raise CorruptionError("truncated manifest length")
    header_len = int.from_bytes(raw_len, "little")
    header = source.read(header_len)
    if len(header) != header_len:
        raise CorruptionError("truncated manifest")
    try:
        manifest = json.loads(header.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptionError(f"unreadable manifest: {exc}") from exc
    version = manifest.get("version")
    if version != _VERSION:
        raise UnsupportedVersionError(f"unsupported container version {version!r}")
    if manifest.get("dtype") != "f32le" or manifest.get("dim") != LATENT_DIM:
        raise CorruptionError(
            f"unexpected dtype/dim: {manifest.get('dtype')!r}/{manifest.get('dim')!r}"
        )
    frame_count = manifest["frame_count"]
    layer_count = manifest["layer_count"]
    expected = frame_count * layer_count * LATENT_DIM * 4
    blob = source.read(expected)
    if len(blob) != expected:
        raise CorruptionError(f"payload holds {len(blob)} bytes, expected {expected}")
    codes = np.frombuffer(blob, dtype="<f4").reshape(frame_count, layer_count, LATENT_DIM)
    frames = tuple(LatentWPlus(codes[i]) for i in range(frame_count))
    return LatentTrajectory(frames, source_id=manifest["source_id"], fps=manifest["fps"])


def trajectory_to_bytes(traj: LatentTrajectory) -> bytes:
    buf = io.BytesIO()
    write_trajectory(traj, buf)
    return buf.getvalue()


def trajectory_from_bytes(data: bytes) -> LatentTrajectory:
    return read_trajectory(io.BytesIO(data))


def save_trajectory(traj: LatentTrajectory, path) -> int:
    with open(path, "wb") as fh:
        return write_trajectory(traj, fh)


def load_trajectory(path) -> LatentTrajectory:
    with open(path, "rb") as fh:
        return read_trajectory(fh)
