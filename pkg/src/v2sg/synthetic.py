"""Parameterized synthetic faces for desk-scale testing.

The renderer draws a schematic face under known rigid parameters and embeds
its ground truth (landmarks, pose angles, identity, expression) in the first
pixel rows as 16-bit fixed-point values stored at exact uint8 levels. The
header therefore survives float/uint8/PNG round trips bit-exactly; the
synthetic perception stubs decode it, which makes every downstream geometric
computation verifiable end to end without model weights. Lossy codecs and
geometric warps destroy the header, as they would destroy a real watermark.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DetectionError, ValidationError
from .rigid import LandmarkSet, rotation_matrix
from .types import PoseAngles, RigidParams

_MAGIC = (137, 42, 212, 19)
_VERSION = 1
_COORD_SPAN = (-0.5, 1.5)  # normalized landmark range the header can carry
_POSE_SPAN = (-math.pi, math.pi)
_EXPR_SPAN = (-4.0, 4.0)
_SLOTS = 5 + 68 * 2 * 2 + 3 * 2 + 2 + 2  # magic+version, coords, pose, id, expr


def _ellipse(center: tuple[float, float], rx: float, ry: float, n: int) -> np.ndarray:
    a = np.arange(n) * (2.0 * np.pi / n)
    return np.stack([center[0] + rx * np.cos(a), center[1] + ry * np.sin(a)], axis=1)


def _build_template() -> np.ndarray:
    pts = np.zeros((68, 2))
    jaw_a = np.linspace(np.pi, 0.0, 17)
    pts[0:17, 0] = 0.5 + 0.30 * np.cos(jaw_a)
    pts[0:17, 1] = 0.50 + 0.35 * np.sin(jaw_a)
    brow_x = np.linspace(0.28, 0.45, 5)
    pts[17:22, 0] = brow_x
    pts[17:22, 1] = 0.35 - 0.02 * np.sin(np.linspace(0, np.pi, 5))
    pts[22:27, 0] = 1.0 - brow_x[::-1]
    pts[22:27, 1] = pts[17:22, 1][::-1]
    pts[27:31, 0] = 0.5
    pts[27:31, 1] = np.linspace(0.42, 0.58, 4)
    pts[31:36, 0] = np.linspace(0.44, 0.56, 5)
    pts[31:36, 1] = 0.62
    pts[36:42] = _ellipse((0.38, 0.42), 0.05, 0.025, 6)
    pts[42:48] = _ellipse((0.62, 0.42), 0.05, 0.025, 6)
    pts[48:60] = _ellipse((0.50, 0.70), 0.10, 0.050, 12)
    pts[60:68] = _ellipse((0.50, 0.70), 0.06, 0.020, 8)
    return pts


TEMPLATE = _build_template()
TEMPLATE.setflags(write=False)

# Eye midpoint of the canonical template; the FFHQ-style anchor every rigid
# parameter is measured against.
CANONICAL_MIDPOINT: tuple[float, float] = (
    float(0.5 * (TEMPLATE[36:42, 0].mean() + TEMPLATE[42:48, 0].mean())),
    float(0.5 * (TEMPLATE[36:42, 1].mean() + TEMPLATE[42:48, 1].mean())),
)


def face_landmarks(params: RigidParams, image_size: int, expression: float = 0.0) -> np.ndarray:
    """Template landmarks under ``params``, in pixels of an image_size frame.

    Points rotate about the canonical eye midpoint and then translate, so
    :func:`v2sg.rigid.rigid_from_landmarks` recovers ``params`` exactly.
    """
    pts = TEMPLATE.copy()
    if expression != 0.0:
        mouth = slice(48, 68)
        center_y = 0.70
        pts[mouth, 1] = center_y + (pts[mouth, 1] - center_y) * (1.0 + 0.6 * expression)
    mid = np.array(CANONICAL_MIDPOINT)
    rot = rotation_matrix(params.r)
    moved = (pts - mid) @ rot.T + mid + np.array([params.t_x, params.t_y])
    return moved * image_size


@dataclass(frozen=True)
class FaceScene:
    """Everything the renderer knows about one synthetic frame."""

    params: RigidParams = field(default_factory=lambda: RigidParams(0.0, 0.0, 0.0))
    pose: PoseAngles = field(default_factory=lambda: PoseAngles(0.0, 0.0, 0.0))
    identity: int = 0
    expression: float = 0.0


# -- 16-bit header codec ------------------------------------------------------
# Bytes live at exact uint8 levels: float value = (u / 255) * 2 - 1, which
# round-trips through to_uint8/from_uint8 and PNG without loss.


def _bytes_to_floats(bytes_seq: np.ndarray) -> np.ndarray:
    return (bytes_seq.astype(np.float32) / 255.0) * 2.0 - 1.0


def _floats_to_bytes(values: np.ndarray) -> np.ndarray:
    return np.round((np.asarray(values, dtype=np.float64) + 1.0) * 0.5 * 255.0).astype(np.int64)


def _quant16(values: np.ndarray, span: tuple[float, float]) -> np.ndarray:
    lo, hi = span
    q = np.round((np.clip(values, lo, hi) - lo) / (hi - lo) * 65535.0).astype(np.int64)
    out = np.empty(q.size * 2, dtype=np.int64)
    out[0::2] = q >> 8
    out[1::2] = q & 0xFF
    return out


def _dequant16(bytes_seq: np.ndarray, span: tuple[float, float]) -> np.ndarray:
    lo, hi = span
    q = bytes_seq[0::2] * 256 + bytes_seq[1::2]
    return q.astype(np.float64) / 65535.0 * (hi - lo) + lo


def _header_rows(width: int) -> int:
    return -(-_SLOTS // (width * 3))


def render_face(scene: FaceScene, image_size: int = 64) -> np.ndarray:
    """Render a (H, W, 3) float32 frame carrying a ground-truth header."""
    if image_size < 32:
        raise ValidationError("synthetic faces need image_size >= 32 for the header rows")
    n = image_size
    rng = np.random.default_rng(1000 + scene.identity)
    coarse = rng.uniform(-0.25, 0.25, size=(4, 4, 3))
    img = np.repeat(np.repeat(coarse, n // 4, axis=0), n // 4, axis=1).astype(np.float64)

    # Evaluate canonical-space masks at inversely transformed pixel coords.
    c = (np.arange(n) + 0.5) / n
    px, py = np.meshgrid(c, c, indexing="xy")
    p = np.stack([px, py], axis=-1)
    mid = np.array(CANONICAL_MIDPOINT)
    inv = rotation_matrix(-scene.params.r)
    q = (p - mid - np.array([scene.params.t_x, scene.params.t_y])) @ inv.T + mid

    def blob(center, rx, ry):
        return ((q[..., 0] - center[0]) / rx) ** 2 + ((q[..., 1] - center[1]) / ry) ** 2 <= 1.0

    face = blob((0.5, 0.55), 0.32, 0.40)
    tone = 0.1 * ((scene.identity * 0.37) % 0.5)
    img[face] = np.array([0.55 + tone, 0.40 + tone, 0.30])
    mouth_ry = 0.05 * (1.0 + 0.6 * scene.expression)
    for mask, color in (
        (blob((0.38, 0.42), 0.05, 0.025), (-0.6, -0.6, -0.2)),
        (blob((0.62, 0.42), 0.05, 0.025), (-0.6, -0.6, -0.2)),
        (blob((0.5 + 0.05 * scene.pose.yaw, 0.55 + 0.05 * scene.pose.pitch), 0.05, 0.08),
         (0.2, 0.1, 0.0)),
        (blob((0.50, 0.70), 0.10, max(mouth_ry, 1e-3)), (-0.3, -0.55, -0.5)),
    ):
        img[mask] = color

    lm = face_landmarks(scene.params, image_size, scene.expression) / image_size
    slots = np.zeros(_SLOTS, dtype=np.int64)
    slots[0:4] = _MAGIC
    slots[4] = _VERSION
    pos = 5
    coords = _quant16(lm.reshape(-1), _COORD_SPAN)
    slots[pos : pos + coords.size] = coords
    pos += coords.size
    pose = _quant16(scene.pose.as_array(), _POSE_SPAN)
    slots[pos : pos + 6] = pose
    pos += 6
    ident = np.int64(max(0, min(scene.identity, 65535)))
    slots[pos : pos + 2] = (ident >> 8, ident & 0xFF)
    pos += 2
    slots[pos : pos + 2] = _quant16(np.array([scene.expression]), _EXPR_SPAN)

    rows = _header_rows(n)
    header = np.zeros(rows * n * 3, dtype=np.int64)
    header[: slots.size] = slots
    out = img.astype(np.float32)
    out[:rows] = _bytes_to_floats(header).reshape(rows, n, 3)
    return out


def _read_slots(image: np.ndarray) -> np.ndarray | None:
    if image.ndim != 3 or image.shape[2] != 3:
        return None
    rows = _header_rows(image.shape[1])
    if image.shape[0] < rows:
        return None
    flat = _floats_to_bytes(np.asarray(image[:rows], dtype=np.float64).reshape(-1))
    if flat.size < _SLOTS:
        return None
    slots = flat[:_SLOTS]
    if tuple(slots[0:4]) != _MAGIC or slots[4] != _VERSION:
        return None
    return slots


def decode_header(image: np.ndarray) -> FaceScene | None:
    """Recover pose/identity/expression from a headered frame; None if absent."""
    slots = _read_slots(image)
    if slots is None:
        return None
    pos = 5 + 272
    pose_vals = _dequant16(slots[pos : pos + 6], _POSE_SPAN)
    pos += 6
    identity = int(slots[pos] * 256 + slots[pos + 1])
    pos += 2
    expression = float(_dequant16(slots[pos : pos + 2], _EXPR_SPAN)[0])
    return FaceScene(
        pose=PoseAngles(*(float(v) for v in pose_vals)),
        identity=identity,
        expression=expression,
    )


def decode_landmarks(image: np.ndarray) -> np.ndarray:
    """Landmarks in pixels from a headered frame; raises if absent."""
    slots = _read_slots(image)
    if slots is None:
        raise DetectionError("no face found (missing synthetic ground-truth header)")
    coords = _dequant16(slots[5 : 5 + 272], _COORD_SPAN).reshape(68, 2)
    scale = np.array([image.shape[1], image.shape[0]], dtype=np.float64)
    return coords * scale
