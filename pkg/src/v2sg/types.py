"""Domain types shared across the toolkit.

All types are immutable values after construction and safe to share across
threads. Latent codes are float32 (matching the on-disk container); style
values and geometry are float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping

import numpy as np

from .errors import ValidationError

LATENT_DIM = 512


def _as_f32_matrix(code: np.ndarray) -> np.ndarray:
    code = np.array(code, dtype=np.float32, copy=True)
    if code.ndim != 2 or code.shape[1] != LATENT_DIM:
        raise ValidationError(f"latent code must be (layers, {LATENT_DIM}), got {code.shape}")
    if not np.all(np.isfinite(code)):
        raise ValidationError("latent code contains non-finite values")
    return code


@dataclass(frozen=True)
class LatentWPlus:
    """Per-layer extended latent code, one 512-vector per synthesis layer."""

    code: np.ndarray  # (layer_count, 512) float32

    def __post_init__(self):
        object.__setattr__(self, "code", _as_f32_matrix(self.code))
        self.code.setflags(write=False)

    @property
    def layer_count(self) -> int:
        return self.code.shape[0]

    def replace_layers(self, start: int, stop: int, block: np.ndarray) -> "LatentWPlus":
        """New code with rows ``start:stop`` replaced; other rows bit-identical."""
        out = self.code.copy()
        out[start:stop] = block
        return LatentWPlus(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, LatentWPlus) and np.array_equal(self.code, other.code)


@dataclass(frozen=True)
class LatentTrajectory:
    """Ordered per-frame latent codes for a projected video (or single image)."""

    frames: tuple[LatentWPlus, ...]
    source_id: str = ""
    fps: float = 30.0

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise ValidationError("trajectory must contain at least one frame")
        layer_counts = {f.layer_count for f in frames}
        if len(layer_counts) != 1:
            raise ValidationError(f"frames disagree on layer_count: {sorted(layer_counts)}")
        if not (math.isfinite(self.fps) and self.fps > 0):
            raise ValidationError(f"fps must be positive, got {self.fps}")
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def layer_count(self) -> int:
        return self.frames[0].layer_count

    def reversed(self) -> "LatentTrajectory":
        return LatentTrajectory(tuple(reversed(self.frames)), self.source_id, self.fps)

    def as_array(self) -> np.ndarray:
        """(frames, layers, 512) float32 view of the trajectory."""
        return np.stack([f.code for f in self.frames])


@dataclass(frozen=True, order=True)
class SChannelAddress:
    """Index of one scalar style parameter: (synthesis layer, channel)."""

    layer: int
    channel: int


class StyleVector:
    """Per-channel style parameters, stored as one float64 vector per layer.

    Logically a mapping ``SChannelAddress -> float``; may be partial (only
    some layers present), e.g. when sliced to layers 3-7.
    """

    __slots__ = ("_layers",)

    def __init__(self, layers: Mapping[int, np.ndarray]):
        store: dict[int, np.ndarray] = {}
        for l, vec in layers.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.ndim != 1:
                raise ValidationError(f"style layer {l} must be a vector, got shape {arr.shape}")
            arr = arr.copy()
            arr.setflags(write=False)
            store[int(l)] = arr
        self._layers = store

    @property
    def layers(self) -> dict[int, np.ndarray]:
        return dict(self._layers)

    def layer(self, l: int) -> np.ndarray:
        return self._layers[l]

    def has_layer(self, l: int) -> bool:
        return l in self._layers

    def __getitem__(self, addr: SChannelAddress) -> float:
        return float(self._layers[addr.layer][addr.channel])

    def __contains__(self, addr: SChannelAddress) -> bool:
        return addr.layer in self._layers and 0 <= addr.channel < self._layers[addr.layer].size

    def addresses(self) -> Iterator[SChannelAddress]:
        for l in sorted(self._layers):
            for c in range(self._layers[l].size):
                yield SChannelAddress(l, c)

    def with_values(self, updates: Mapping[SChannelAddress, float]) -> "StyleVector":
        """Copy with the given addresses replaced; everything else bit-equal."""
        out = {l: v.copy() for l, v in self._layers.items()}
        for addr, value in updates.items():
            if addr.layer not in out or not (0 <= addr.channel < out[addr.layer].size):
                raise ValidationError(f"invalid style address {addr}")
            out[addr.layer][addr.channel] = value
        return StyleVector(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StyleVector):
            return NotImplemented
        if set(self._layers) != set(other._layers):
            return False
        return all(np.array_equal(self._layers[l], other._layers[l]) for l in self._layers)

    def __repr__(self) -> str:
        widths = {l: v.size for l, v in sorted(self._layers.items())}
        return f"StyleVector(layers={widths})"


@dataclass(frozen=True)
class RigidParams:
    """Per-frame rigid alignment: translation as a fraction of the frame,
    rotation in radians (positive = counter-clockwise on screen, y down)."""

    t_x: float
    t_y: float
    r: float

    def __post_init__(self):
        for name in ("t_x", "t_y", "r"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"rigid parameter {name} must be finite, got {v}")
        if abs(self.r) > math.pi + 1e-12:
            raise ValidationError(f"|r| must be <= pi, got {self.r}")


class MotionSource(str, Enum):
    DRIVING = "driving"
    CODRIVING = "codriving"
    NONE = "none"


@dataclass(frozen=True)
class BlendCoefficients:
    """Mixing coefficients and routing toggles for the style blend."""

    alpha: float = -1.0
    beta: float = 1.0
    gamma: float = 1.0
    zeta: float = 0.5
    use_rigid: bool = True
    use_pose: bool = True
    use_local: bool = True
    rigid_source: MotionSource = MotionSource.DRIVING
    pose_source: MotionSource = MotionSource.DRIVING
    local_source: MotionSource = MotionSource.DRIVING

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "zeta"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"coefficient {name} must be finite")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValidationError(f"zeta must lie in [0, 1], got {self.zeta}", field="zeta")
        for name in ("rigid_source", "pose_source", "local_source"):
            object.__setattr__(self, name, MotionSource(getattr(self, name)))


@dataclass(frozen=True)
class PoseAngles:
    """Head orientation in radians."""

    yaw: float
    pitch: float
    roll: float

    def __post_init__(self):
        for name in ("yaw", "pitch", "roll"):
            v = getattr(self, name)
            if not math.isfinite(v) or abs(v) > math.pi:
                raise ValidationError(f"{name} must be finite and within [-pi, pi], got {v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.yaw, self.pitch, self.roll], dtype=np.float64)


@dataclass(frozen=True)
class InputTransform:
    """Rigid map applied to the generator's continuous input coordinate frame.

    Acts on coordinates as ``x -> rotation @ (x - translation)``; the rendered
    image then appears translated by ``translation`` and rotated by the inverse
    of ``rotation``.
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(2))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64).reshape(2, 2).copy()
        tr = np.asarray(self.translation, dtype=np.float64).reshape(2).copy()
        if not (np.all(np.isfinite(rot)) and np.all(np.isfinite(tr))):
            raise ValidationError("transform entries must be finite")
        if not np.allclose(rot.T @ rot, np.eye(2), atol=1e-9) or not np.isclose(
            np.linalg.det(rot), 1.0, atol=1e-9
        ):
            raise ValidationError("rotation block must be orthonormal with determinant +1")
        rot.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @staticmethod
    def identity() -> "InputTransform":
        return InputTransform()

    def map_coords(self, coords: np.ndarray) -> np.ndarray:
        """Apply to points of shape (..., 2)."""
        return (np.asarray(coords, dtype=np.float64) - self.translation) @ self.rotation.T

    def compose(self, other: "InputTransform") -> "InputTransform":
        """Transform whose image motion is self's motion followed by other's."""
        rot = self.rotation @ other.rotation
        tr = other.translation + other.rotation.T @ self.translation
        return InputTransform(rot, tr)

    def inverse(self) -> "InputTransform":
        return InputTransform(self.rotation.T, -self.rotation @ self.translation)

    def is_identity(self, tol: float = 0.0) -> bool:
        return bool(
            np.all(np.abs(self.rotation - np.eye(2)) <= tol)
            and np.all(np.abs(self.translation) <= tol)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, InputTransform):
            return NotImplemented
        return np.array_equal(self.rotation, other.rotation) and np.array_equal(
            self.translation, other.translation
        )
