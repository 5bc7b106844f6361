"""Perception backends: landmarks, head pose, part segmentation, face embedding.

Real detectors plug in behind these interfaces; the synthetic family shipped
here is closed-form and deterministic so every downstream computation can be
verified end to end. Backends are immutable and reentrant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
import torch

from .errors import CapabilityError, DetectionError, ValidationError
from .rigid import LandmarkSet
from .synthetic import decode_header, decode_landmarks
from .types import PoseAngles

PARTS = ("eyes", "nose", "mouth")
BACKGROUND = "background_other"


@dataclass(frozen=True)
class PartMask:
    """Binary mask for one semantic part at the segmenter's output size."""

    part: str
    mask: np.ndarray  # bool (S, S)

    def __post_init__(self):
        m = np.asarray(self.mask)
        if m.dtype != np.bool_:
            if not np.isin(m, (0, 1)).all():
                raise ValidationError("mask values must be 0/1")
            m = m.astype(bool)
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)


@dataclass(frozen=True)
class FaceEmbedding:
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64).reshape(-1).copy()
        if not np.all(np.isfinite(v)):
            raise ValidationError("embedding contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.size


@runtime_checkable
class Landmarker(Protocol):
    def detect_landmarks(self, image: np.ndarray) -> LandmarkSet: ...


@runtime_checkable
class PoseRegressor(Protocol):
    def regress_pose(self, image: np.ndarray) -> PoseAngles: ...


@runtime_checkable
class Segmenter(Protocol):
    output_size: int

    def segment_parts(self, image: np.ndarray) -> dict[str, PartMask]: ...


@runtime_checkable
class Embedder(Protocol):
    def embed_face(self, image: np.ndarray) -> FaceEmbedding: ...


def require_pose_gradients(pose: PoseRegressor) -> None:
    """Pose optimization needs d(angles)/d(image); stubs provide it via torch."""
    if not hasattr(pose, "regress_pose_torch"):
        raise CapabilityError(
            f"{type(pose).__name__} exposes no gradients; pose optimization needs a "
            "differentiable pose backend"
        )


# -- synthetic family ------------------------------------------------------


class SyntheticLandmarker:
    """Inverse of the synthetic face renderer: reads the ground-truth header."""

    def detect_landmarks(self, image: np.ndarray) -> LandmarkSet:
        pts = decode_landmarks(image)
        return LandmarkSet(pts, image_width=image.shape[1], image_height=image.shape[0])


class CentroidGridLandmarker:
    """Deterministic pseudo-landmarks for arbitrary renders.

    Lays a 7x10 cell grid over the frame and returns the intensity centroid
    of the first 68 cells; content-sensitive, works on images with no face.
    """

    _ROWS, _COLS = 7, 10

    def detect_landmarks(self, image: np.ndarray) -> LandmarkSet:
        if image.ndim != 3:
            raise DetectionError("expected an (H, W, C) image")
        h, w = image.shape[:2]
        gray = np.asarray(image, dtype=np.float64).mean(axis=2)
        pts = np.zeros((68, 2))
        k = 0
        for r in range(self._ROWS):
            for c in range(self._COLS):
                if k >= 68:
                    break
                r0, r1 = r * h // self._ROWS, (r + 1) * h // self._ROWS
                c0, c1 = c * w // self._COLS, (c + 1) * w // self._COLS
                cell = gray[r0:r1, c0:c1]
                wgt = cell - cell.min() + 1e-9
                ys, xs = np.mgrid[r0:r1, c0:c1]
                total = wgt.sum()
                pts[k] = (float((wgt * xs).sum() / total), float((wgt * ys).sum() / total))
                k += 1
        return LandmarkSet(pts, image_width=w, image_height=h)


class StegoPoseRegressor:
    """Reads yaw/pitch/roll from the synthetic face header (no gradients)."""

    def regress_pose(self, image: np.ndarray) -> PoseAngles:
        scene = decode_header(image)
        if scene is None:
            raise DetectionError("no pose header in image")
        return scene.pose


class LinearPoseRegressor:
    """Differentiable probe: angles are a fixed linear map of the pooled image."""

    def __init__(self, seed: int = 0, pool: int = 8):
        self.pool = pool
        rng = np.random.default_rng(seed)
        d = pool * pool
        self.matrix = rng.normal(0.0, 0.25 / np.sqrt(d), size=(3, d))
        self._matrix_t = torch.from_numpy(self.matrix.copy())
        self.matrix.setflags(write=False)

    def _pooled(self, image: np.ndarray) -> np.ndarray:
        h, w = image.shape[:2]
        p = self.pool
        if h % p or w % p:
            raise ValidationError(f"image size must be divisible by pool={p}")
        gray = np.asarray(image, dtype=np.float64).mean(axis=2)
        return gray.reshape(p, h // p, p, w // p).mean(axis=(1, 3)).reshape(-1)

    def regress_pose(self, image: np.ndarray) -> PoseAngles:
        yaw, pitch, roll = self.matrix @ self._pooled(image)
        return PoseAngles(float(yaw), float(pitch), float(roll))

    def regress_pose_torch(self, image: torch.Tensor) -> torch.Tensor:
        h, w = image.shape[:2]
        p = self.pool
        gray = image.mean(dim=2)
        pooled = gray.reshape(p, h // p, p, w // p).mean(dim=(1, 3)).reshape(-1)
        return self._matrix_t @ pooled


class RectangleSegmenter:
    """Fixed-geometry part masks; the four parts partition the frame."""

    BOXES = {  # (x0, y0, x1, y1) as frame fractions
        "eyes": (0.25, 0.33, 0.75, 0.48),
        "nose": (0.42, 0.50, 0.58, 0.62),
        "mouth": (0.35, 0.64, 0.65, 0.78),
    }

    def __init__(self, output_size: int = 64, boxes: dict[str, tuple] | None = None):
        self.output_size = output_size
        self.boxes = dict(boxes or self.BOXES)

    def segment_parts(self, image: np.ndarray) -> dict[str, PartMask]:
        s = self.output_size
        out: dict[str, PartMask] = {}
        taken = np.zeros((s, s), dtype=bool)
        for part in PARTS:
            x0, y0, x1, y1 = self.boxes[part]
            mask = np.zeros((s, s), dtype=bool)
            mask[int(round(y0 * s)) : int(round(y1 * s)), int(round(x0 * s)) : int(round(x1 * s))] = True
            mask &= ~taken  # keep the partition exact even for touching boxes
            taken |= mask
            out[part] = PartMask(part, mask)
        out[BACKGROUND] = PartMask(BACKGROUND, ~taken)
        return out


class BlockMeanEmbedder:
    """Per-block per-channel mean colors as the identity embedding."""

    def __init__(self, blocks: int = 4):
        self.blocks = blocks

    @property
    def dim(self) -> int:
        return self.blocks * self.blocks * 3

    def embed_face(self, image: np.ndarray) -> FaceEmbedding:
        h, w = image.shape[:2]
        b = self.blocks
        if h % b or w % b:
            raise ValidationError(f"image size must be divisible by blocks={b}")
        arr = np.asarray(image, dtype=np.float64)
        pooled = arr.reshape(b, h // b, b, w // b, 3).mean(axis=(1, 3))
        return FaceEmbedding(pooled.reshape(-1))


@dataclass(frozen=True)
class PerceptionSuite:
    landmarker: Landmarker
    pose: PoseRegressor
    segmenter: Segmenter
    embedder: Embedder


def synthetic_suite(image_size: int = 64, seed: int = 0) -> PerceptionSuite:
    return PerceptionSuite(
        landmarker=SyntheticLandmarker(),
        pose=LinearPoseRegressor(seed=seed),
        segmenter=RectangleSegmenter(output_size=image_size),
        embedder=BlockMeanEmbedder(),
    )


_LANDMARKERS = {"synthetic": SyntheticLandmarker, "grid": CentroidGridLandmarker}
_POSE = {"synthetic": LinearPoseRegressor, "linear": LinearPoseRegressor, "stego": StegoPoseRegressor}
_SEGMENTERS = {"synthetic": RectangleSegmenter, "rectangles": RectangleSegmenter}
_EMBEDDERS = {"synthetic": BlockMeanEmbedder, "blockmean": BlockMeanEmbedder}


def _make(table: dict, kind: str, name: str, **kwargs):
    if name not in table:
        raise ValidationError(f"unknown {kind} backend {name!r}; known: {sorted(table)}")
    return table[name](**kwargs)


def make_landmarker(name: str, **kwargs) -> Landmarker:
    return _make(_LANDMARKERS, "landmarker", name, **kwargs)


def make_pose_regressor(name: str, **kwargs) -> PoseRegressor:
    return _make(_POSE, "pose", name, **kwargs)


def make_segmenter(name: str, **kwargs) -> Segmenter:
    return _make(_SEGMENTERS, "segmenter", name, **kwargs)


def make_embedder(name: str, **kwargs) -> Embedder:
    return _make(_EMBEDDERS, "embedder", name, **kwargs)
