"""Rigid head alignment from facial landmarks.

Coordinate conventions used throughout the toolkit:

* landmark pixels are normalized to ``[0, 1]^2`` by image width/height,
  y increasing downward;
* the canonical eye-to-mouth axis is ``u = (0, 1)``;
* rotation angles are positive counter-clockwise as seen on screen
  (y-down frame), so ``rotation_matrix(theta) = [[c, s], [-s, c]]``.

The per-frame parameters are ``(t_x, t_y, r)``: the eye midpoint's offset
from the canonical midpoint plus the signed angle between the canonical
axis and the current eye-to-mouth vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateFaceError, ValidationError
from .types import InputTransform, RigidParams

# iBUG-68 landmark layout.
LEFT_EYE_IDX = tuple(range(36, 42))
RIGHT_EYE_IDX = tuple(range(42, 48))
MOUTH_IDX = tuple(range(48, 68))

UP_AXIS = np.array([0.0, 1.0])  # canonical eye-to-mouth direction, y down


def rotation_matrix(theta: float) -> np.ndarray:
    """Counter-clockwise (on screen, y down) rotation by *theta* radians."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def signed_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle theta with ``rotation_matrix(theta) @ u`` parallel to ``v``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(np.arctan2(u[1] * v[0] - u[0] * v[1], u @ v))


@dataclass(frozen=True)
class LandmarkSet:
    """68 facial keypoints in pixels plus the eye/mouth group indices."""

    points: np.ndarray  # (68, 2) pixels
    image_width: int
    image_height: int
    left_eye: tuple[int, ...] = LEFT_EYE_IDX
    right_eye: tuple[int, ...] = RIGHT_EYE_IDX
    mouth: tuple[int, ...] = MOUTH_IDX

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (68, 2):
            raise ValidationError(f"expected 68 (x, y) points, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("landmarks contain non-finite values")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValidationError("image dimensions must be positive")
        groups = [tuple(self.left_eye), tuple(self.right_eye), tuple(self.mouth)]
        seen: set[int] = set()
        for g in groups:
            if any(not 0 <= i < 68 for i in g):
                raise ValidationError("group index out of range [0, 68)")
            if seen & set(g):
                raise ValidationError("landmark groups must be disjoint")
            seen |= set(g)
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "left_eye", tuple(self.left_eye))
        object.__setattr__(self, "right_eye", tuple(self.right_eye))
        object.__setattr__(self, "mouth", tuple(self.mouth))

    def normalized(self) -> np.ndarray:
        """Points divided by (width, height), mapping the frame to [0, 1]^2."""
        return self.points / np.array([self.image_width, self.image_height], dtype=np.float64)


def face_axis(lm: LandmarkSet) -> tuple[np.ndarray, np.ndarray]:
    """Eye midpoint ``e`` and eye-to-mouth vector ``v`` in normalized coords."""
    if not (lm.left_eye and lm.right_eye and lm.mouth):
        raise ValidationError("landmark groups must be non-empty")
    pts = lm.normalized()
    e = 0.5 * (pts[list(lm.left_eye)].mean(axis=0) + pts[list(lm.right_eye)].mean(axis=0))
    v = pts[list(lm.mouth)].mean(axis=0) - e
    return e, v


def rigid_from_landmarks(lm: LandmarkSet, canonical_midpoint: Sequence[float]) -> RigidParams:
    """Recover ``(t_x, t_y, r)`` relative to the canonical alignment.

    ``r`` is the signed angle from the canonical axis ``u = (0, 1)`` to the
    eye-to-mouth vector; its cosine equals the cosine similarity of the two.
    ``t`` is the eye midpoint minus *canonical_midpoint*, in normalized
    coordinates.
    """
    e, v = face_axis(lm)
    norm = float(np.hypot(v[0], v[1]))
    if norm == 0.0:
        raise DegenerateFaceError("eye-to-mouth vector has zero length")
    r = signed_angle(UP_AXIS, v)
    mid = np.asarray(canonical_midpoint, dtype=np.float64)
    t = e - mid
    return RigidParams(t_x=float(t[0]), t_y=float(t[1]), r=r)


@dataclass(frozen=True)
class RigidTrack:
    """Per-frame rigid parameters over time."""

    params: tuple[RigidParams, ...]
    fps: float = 30.0

    def __post_init__(self):
        params = tuple(self.params)
        if not params:
            raise ValidationError("rigid track must be non-empty")
        object.__setattr__(self, "params", params)

    def __len__(self) -> int:
        return len(self.params)

    def as_array(self) -> np.ndarray:
        """(frames, 3) array of (t_x, t_y, r)."""
        return np.array([[p.t_x, p.t_y, p.r] for p in self.params], dtype=np.float64)

    def to_json(self) -> str:
        return json.dumps(
            {"fps": self.fps, "params": [{"tx": p.t_x, "ty": p.t_y, "r": p.r} for p in self.params]},
            separators=(",", ":"),
        )

    @staticmethod
    def from_json(text: str) -> "RigidTrack":
        doc = json.loads(text)
        params = tuple(RigidParams(p["tx"], p["ty"], p["r"]) for p in doc["params"])
        return RigidTrack(params, fps=doc["fps"])


def smooth_track(track: RigidTrack, kernel: int = 3) -> RigidTrack:
    """Mean-filter each parameter sequence over time.

    Boundaries are handled by edge replication, so output length equals
    input length and constant tracks pass through unchanged.
    """
    if kernel < 3 or kernel % 2 == 0:
        raise ValidationError(f"kernel must be an odd integer >= 3, got {kernel}")
    arr = track.as_array()  # (n, 3)
    half = kernel // 2
    padded = np.pad(arr, ((half, half), (0, 0)), mode="edge")
    window = np.ones(kernel)
    smoothed = np.stack(
        [np.convolve(padded[:, k], window, mode="valid") / kernel for k in range(3)], axis=1
    )
    params = tuple(RigidParams(*row) for row in smoothed)
    return RigidTrack(params, fps=track.fps)


def compose_input_transform(p: RigidParams) -> InputTransform:
    """Input-feature transform that translates the render by ``t`` and
    rotates it by ``r`` (coordinates map as ``x -> R(-r) (x - t)``)."""
    return InputTransform(
        rotation=rotation_matrix(-p.r),
        translation=np.array([p.t_x, p.t_y], dtype=np.float64),
    )
