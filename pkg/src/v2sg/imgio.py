"""Image and video I/O. Images are float32 (H, W, 3), nominal range [-1, 1]."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import cv2
import numpy as np
from PIL import Image

from .errors import ValidationError

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}


def to_uint8(image: np.ndarray) -> np.ndarray:
    arr = np.clip((np.asarray(image, dtype=np.float64) + 1.0) * 0.5, 0.0, 1.0)
    return np.round(arr * 255.0).astype(np.uint8)


def from_uint8(arr: np.ndarray) -> np.ndarray:
    return (np.asarray(arr, dtype=np.float32) / 255.0) * 2.0 - 1.0


def image_to_png_bytes(image: np.ndarray) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(to_uint8(image)).save(buf, format="PNG")
    return buf.getvalue()


def png_bytes_to_image(data: bytes) -> np.ndarray:
    import io

    return from_uint8(np.asarray(Image.open(io.BytesIO(data)).convert("RGB")))


def save_png(image: np.ndarray, path) -> None:
    Image.fromarray(to_uint8(image)).save(path, format="PNG")


def load_image(path) -> np.ndarray:
    return from_uint8(np.asarray(Image.open(path).convert("RGB")))


def read_video(path) -> tuple[list[np.ndarray], float]:
    """Decode a video file into float32 RGB frames plus its fps."""
    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise ValidationError(f"cannot open video {path}")
    fps = cap.get(cv2.CAP_PROP_FPS) or 30.0
    frames: list[np.ndarray] = []
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        frames.append(from_uint8(cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)))
    cap.release()
    if not frames:
        raise ValidationError(f"video {path} holds no frames")
    return frames, float(fps)


def write_video(frames: Sequence[np.ndarray], path, fps: float) -> bool:
    """Encode frames as mp4; returns False if no encoder is available."""
    if not frames:
        raise ValidationError("no frames to encode")
    h, w = frames[0].shape[:2]
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"mp4v"), fps, (w, h))
    if not writer.isOpened():
        return False
    for f in frames:
        writer.write(cv2.cvtColor(to_uint8(f), cv2.COLOR_RGB2BGR))
    writer.release()
    return True


def read_frames_dir(path) -> list[np.ndarray]:
    files = sorted(Path(path).glob("*.png"))
    if not files:
        raise ValidationError(f"no PNG frames under {path}")
    return [load_image(f) for f in files]


def count_video_frames(path) -> int:
    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise ValidationError(f"cannot open video {path}")
    n = 0
    while True:
        ok, _ = cap.read()
        if not ok:
            break
        n += 1
    cap.release()
    return n
