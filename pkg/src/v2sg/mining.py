"""S-space channel discovery by overlap with part segmentations.

Each tapped feature map is min-max normalized, bilinearly upsampled to the
segmenter's output size and thresholded into a binary mask; a channel is
attributed to a semantic part when its mask overlaps the part (IOU+ above
``t_fg``) while avoiding everything else (IOU- against the complement,
below ``t_bg`` by default). Scores are averaged over a set of probe codes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import ValidationError
from .perception import PARTS, Segmenter
from .types import LatentWPlus, SChannelAddress

BgDirection = Literal["exclude", "literal"]


def normalize_map(m: np.ndarray) -> np.ndarray:
    """Min-max normalize to [0, 1]; constant maps normalize to all zeros."""
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise ValidationError("feature map contains non-finite values")
    lo, hi = m.min(), m.max()
    if hi == lo:
        return np.zeros_like(m)
    return (m - lo) / (hi - lo)


def binarize_and_upsample(m: np.ndarray, target_size: int, threshold: float) -> np.ndarray:
    """Bilinear upsample (corner-aligned) to ``target_size``, then ``>= threshold``."""
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"threshold must lie in (0, 1), got {threshold}")
    m = np.asarray(m, dtype=np.float64)
    sh, sw = m.shape
    t = int(target_size)
    if t < sh or t < sw:
        raise ValidationError(f"target size {t} smaller than source {m.shape}")
    if (sh, sw) == (t, t):
        return m >= threshold

    def src_coords(src: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pos = np.arange(t) * ((src - 1) / (t - 1)) if src > 1 else np.zeros(t)
        i0 = np.floor(pos).astype(int)
        i1 = np.minimum(i0 + 1, src - 1)
        return i0, i1, pos - i0

    y0, y1, fy = src_coords(sh)
    x0, x1, fx = src_coords(sw)
    top = (1.0 - fx)[None, :] * m[np.ix_(y0, x0)] + fx[None, :] * m[np.ix_(y0, x1)]
    bot = (1.0 - fx)[None, :] * m[np.ix_(y1, x0)] + fx[None, :] * m[np.ix_(y1, x1)]
    vals = (1.0 - fy)[:, None] * top + fy[:, None] * bot
    return vals >= threshold


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two binary masks; 0 when the union is empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValidationError(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0
    return np.count_nonzero(a & b) / union


@dataclass(frozen=True)
class CatalogEntry:
    address: SChannelAddress
    part: str
    iou_fg: float
    iou_bg: float

    def __post_init__(self):
        if not (0.0 <= self.iou_fg <= 1.0 and 0.0 <= self.iou_bg <= 1.0):
            raise ValidationError("IOU scores must lie in [0, 1]")


@dataclass(frozen=True)
class ChannelCatalog:
    """Mined channel-to-part attributions for one generator's weights."""

    entries: tuple[CatalogEntry, ...]
    t_fg: float
    t_bg: float
    probe_count: int
    backend_fingerprint: str

    def __post_init__(self):
        entries = tuple(self.entries)
        keys = [(e.address, e.part) for e in entries]
        if len(set(keys)) != len(keys):
            raise ValidationError("catalog entries must be unique by (address, part)")
        object.__setattr__(self, "entries", entries)

    def addresses(self) -> tuple[SChannelAddress, ...]:
        seen: dict[SChannelAddress, None] = {}
        for e in self.entries:
            seen.setdefault(e.address)
        return tuple(seen)

    def by_part(self) -> dict[str, list[CatalogEntry]]:
        out: dict[str, list[CatalogEntry]] = {}
        for e in self.entries:
            out.setdefault(e.part, []).append(e)
        return out

    def to_json(self) -> str:
        doc = {
            "version": 1,
            "thresholds": {"t_fg": self.t_fg, "t_bg": self.t_bg},
            "probe_count": self.probe_count,
            "backend_fingerprint": self.backend_fingerprint,
            "entries": [
                {
                    "layer": e.address.layer,
                    "channel": e.address.channel,
                    "part": e.part,
                    "iou_fg": e.iou_fg,
                    "iou_bg": e.iou_bg,
                }
                for e in self.entries
            ],
        }
        return json.dumps(doc, separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> "ChannelCatalog":
        doc = json.loads(text)
        if doc.get("version") != 1:
            raise ValidationError(f"unsupported catalog version {doc.get('version')!r}")
        entries = tuple(
            CatalogEntry(
                SChannelAddress(e["layer"], e["channel"]), e["part"], e["iou_fg"], e["iou_bg"]
            )
            for e in doc["entries"]
        )
        return ChannelCatalog(
            entries=entries,
            t_fg=doc["thresholds"]["t_fg"],
            t_bg=doc["thresholds"]["t_bg"],
            probe_count=doc["probe_count"],
            backend_fingerprint=doc["backend_fingerprint"],
        )

    def validate_for(self, backend) -> None:
        if self.backend_fingerprint != backend.fingerprint:
            raise ValidationError(
                "catalog was mined for a different backend "
                f"({self.backend_fingerprint} != {backend.fingerprint})"
            )
        for e in self.entries:
            if not (0 <= e.address.layer < backend.layer_count):
                raise ValidationError(f"catalog layer {e.address.layer} out of range")
            if not (0 <= e.address.channel < backend.channel_widths[e.address.layer]):
                raise ValidationError(f"catalog channel {e.address} out of range")


def mine_channels(
    backend,
    segmenter: Segmenter,
    probes: Sequence[LatentWPlus],
    t_fg: float = 0.3,
    t_bg: float = 0.1,
    *,
    binarize_threshold: float = 0.5,
    bg_direction: BgDirection = "exclude",
) -> ChannelCatalog:
    """Score every (channel, part) pair over the probe set and select.

    Selection keeps pairs with mean IOU+ >= ``t_fg`` whose mean IOU- is at
    most ``t_bg``; ``bg_direction='literal'`` flips the background comparison
    to >= for the alternative reading of the selection rule.
    """
    probes = list(probes)
    if not probes:
        raise ValidationError("probe set must be non-empty")
    if not (0.0 <= t_fg <= 1.0 and 0.0 <= t_bg <= 1.0):
        raise ValidationError("thresholds must lie in [0, 1]")
    if bg_direction not in ("exclude", "literal"):
        raise ValidationError(f"unknown bg_direction {bg_direction!r}")

    widths = backend.channel_widths
    fg_sum = [np.zeros((w, len(PARTS))) for w in widths]
    bg_sum = [np.zeros((w, len(PARTS))) for w in widths]

    for w in probes:
        backend.check_wplus(w)
        result = backend.render_wplus(w)
        masks = segmenter.segment_parts(result.image)
        part_masks = [masks[p].mask for p in PARTS]
        for l in range(len(widths)):
            stack = result.features.layer(l)
            for c in range(widths[l]):
                bm = binarize_and_upsample(
                    normalize_map(stack[c]), segmenter.output_size, binarize_threshold
                )
                for pi, pm in enumerate(part_masks):
                    fg_sum[l][c, pi] += iou(bm, pm)
                    bg_sum[l][c, pi] += iou(bm, ~pm)

    n = len(probes)
    entries: list[CatalogEntry] = []
    for l in range(len(widths)):
        mean_fg = fg_sum[l] / n
        mean_bg = bg_sum[l] / n
        for c in range(widths[l]):
            for pi, part in enumerate(PARTS):
                ok_fg = mean_fg[c, pi] >= t_fg
                ok_bg = mean_bg[c, pi] >= t_bg if bg_direction == "literal" else mean_bg[c, pi] <= t_bg
                if ok_fg and ok_bg:
                    entries.append(
                        CatalogEntry(
                            SChannelAddress(l, c), part, float(mean_fg[c, pi]), float(mean_bg[c, pi])
                        )
                    )
    return ChannelCatalog(
        entries=tuple(entries),
        t_fg=t_fg,
        t_bg=t_bg,
        probe_count=n,
        backend_fingerprint=backend.fingerprint,
    )
