"""Evaluation metrics: keypoint MSE, identity distance, Fréchet distance,
and the forward/reverse driving consistency protocol."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import ValidationError
from .perception import Embedder, FaceEmbedding, Landmarker
from .rigid import LandmarkSet

Normalization = Literal["frame", "interocular"]


@dataclass(frozen=True)
class MetricReport:
    dk_x: float
    dk_y: float
    id: float
    fid: float
    direction: Literal["forward", "reverse"]
    normalization: Normalization = "frame"

    def __post_init__(self):
        for name in ("dk_x", "dk_y", "id", "fid"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValidationError(f"metric {name} must be finite and >= 0, got {v}")

    def to_json(self) -> str:
        return json.dumps(
            {
                "dk_x": self.dk_x,
                "dk_y": self.dk_y,
                "id": self.id,
                "fid": self.fid,
                "direction": self.direction,
                "normalization": self.normalization,
            },
            separators=(",", ":"),
        )

    @staticmethod
    def from_json(text: str) -> "MetricReport":
        return MetricReport(**json.loads(text))


def _interocular(lm: LandmarkSet) -> float:
    pts = lm.normalized()
    left = pts[list(lm.left_eye)].mean(axis=0)
    right = pts[list(lm.right_eye)].mean(axis=0)
    d = float(np.hypot(*(left - right)))
    if d == 0.0:
        raise ValidationError("target frame has zero inter-ocular distance")
    return d


def keypoint_distance(
    pred: Sequence[LandmarkSet],
    target: Sequence[LandmarkSet],
    normalization: Normalization = "frame",
) -> tuple[float, float]:
    """Mean squared keypoint error per coordinate, averaged over frames.

    Coordinates are first normalized by frame size; with
    ``normalization='interocular'`` they are additionally divided by the
    target frame's inter-ocular distance.
    """
    if len(pred) != len(target):
        raise ValidationError(f"frame counts differ: {len(pred)} vs {len(target)}")
    if not pred:
        raise ValidationError("no frames to compare")
    sx = sy = 0.0
    for p, t in zip(pred, target):
        dp = p.normalized() - t.normalized()
        if normalization == "interocular":
            dp = dp / _interocular(t)
        sx += float((dp[:, 0] ** 2).mean())
        sy += float((dp[:, 1] ** 2).mean())
    n = len(pred)
    return sx / n, sy / n


def identity_distance(
    embedder: Embedder, ref: FaceEmbedding, frames: Sequence[np.ndarray]
) -> float:
    """Mean L2 distance between each frame's embedding and the reference's."""
    if not frames:
        raise ValidationError("no frames to embed")
    total = 0.0
    for f in frames:
        e = embedder.embed_face(f)
        if e.dim != ref.dim:
            raise ValidationError(f"embedding dims differ: {e.dim} vs {ref.dim}")
        total += float(np.linalg.norm(e.vector - ref.vector))
    return total / len(frames)


def _psd_sqrt(sym: np.ndarray) -> np.ndarray:
    sym = (sym + sym.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(features_a: np.ndarray, features_b: np.ndarray) -> float:
    """Fréchet distance between Gaussian fits of two feature sets.

    ``|mu_a - mu_b|^2 + Tr(Sa + Sb - 2 (Sa Sb)^(1/2))``, with the matrix root
    taken through the symmetric product ``Sa^(1/2) Sb Sa^(1/2)`` and negative
    eigenvalues clipped to zero.
    """
    a = np.asarray(features_a, dtype=np.float64)
    b = np.asarray(features_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValidationError(f"feature sets must be (n, d) with equal d: {a.shape} vs {b.shape}")
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise ValidationError("need at least 2 samples per feature set")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    cov_a = np.atleast_2d(np.cov(a, rowvar=False))
    cov_b = np.atleast_2d(np.cov(b, rowvar=False))
    root_a = _psd_sqrt(cov_a)
    cross = _psd_sqrt(root_a @ cov_b @ root_a)
    value = float(((mu_a - mu_b) ** 2).sum() + np.trace(cov_a + cov_b - 2.0 * cross))
    return max(value, 0.0)


def embed_frames(embedder: Embedder, frames: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack([embedder.embed_face(f).vector for f in frames])


@dataclass
class ProtocolSession:
    """Hooks the consistency protocol drives.

    ``render(reverse)`` produces the edited frames for the driving video or
    its frame-reversed copy; ``targets(reverse)`` yields the matching driving
    keypoints the edit is supposed to reproduce.
    """

    render: Callable[[bool], Sequence[np.ndarray]]
    targets: Callable[[bool], Sequence[LandmarkSet]]
    landmarker: Landmarker
    embedder: Embedder
    ref_image: np.ndarray
    normalization: Normalization = "frame"


def consistency_protocol(session: ProtocolSession) -> tuple[MetricReport, MetricReport]:
    """Render forward and reversed edits, score both, and report.

    The FID is computed between the forward-edited and reverse-edited frame
    feature sets (one number, repeated in both reports).
    """
    frames = {False: list(session.render(False)), True: list(session.render(True))}
    feats = {rev: embed_frames(session.embedder, frames[rev]) for rev in (False, True)}
    fid_value = fid(feats[False], feats[True])
    ref_emb = session.embedder.embed_face(session.ref_image)

    reports = []
    for rev, direction in ((False, "forward"), (True, "reverse")):
        pred = [session.landmarker.detect_landmarks(f) for f in frames[rev]]
        dk_x, dk_y = keypoint_distance(pred, list(session.targets(rev)), session.normalization)
        dists = np.linalg.norm(feats[rev] - ref_emb.vector, axis=1)
        reports.append(
            MetricReport(
                dk_x=dk_x,
                dk_y=dk_y,
                id=float(dists.mean()),
                fid=fid_value,
                direction=direction,
                normalization=session.normalization,
            )
        )
    return reports[0], reports[1]
