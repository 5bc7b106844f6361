"""Generator backend contract.

A backend exposes four capabilities over a StyleGAN3-shaped synthesis stack:
the per-layer affine maps ``w -> s``, rendering from a complete style vector
under a rigid input-feature transform, per-layer feature-map taps for channel
mining, and (for optimization) torch-differentiable variants of the above.
Backends are immutable after construction; all methods are reentrant.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..types import InputTransform, LatentWPlus, StyleVector


@dataclass(frozen=True)
class GeneratorSpec:
    """Architecture parameters of the deterministic toy generator."""

    layer_count: int = 16
    channel_widths: tuple[int, ...] = ()
    image_size: int = 64
    frequency_count: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.layer_count < 2:
            raise ValidationError(f"layer_count must be >= 2, got {self.layer_count}")
        n = self.image_size
        if n < 16 or (n & (n - 1)) != 0:
            raise ValidationError(f"image_size must be a power of two >= 16, got {n}")
        if self.frequency_count < 2:
            raise ValidationError("frequency_count must be >= 2")
        widths = tuple(self.channel_widths) or (64,) * self.layer_count
        if len(widths) != self.layer_count:
            raise ValidationError(
                f"channel_widths has {len(widths)} entries for {self.layer_count} layers"
            )
        if any(w < 1 for w in widths):
            raise ValidationError("channel widths must be positive")
        object.__setattr__(self, "channel_widths", widths)


class FeatureMapStack:
    """Per-layer activation maps: one 2D map per style channel."""

    __slots__ = ("maps",)

    def __init__(self, maps: list[np.ndarray], channel_widths: tuple[int, ...] | None = None):
        store = []
        for l, m in enumerate(maps):
            arr = np.asarray(m, dtype=np.float64)
            if arr.ndim != 3:
                raise ValidationError(f"layer {l} maps must be (channels, h, w), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"layer {l} maps contain non-finite values")
            if channel_widths is not None and arr.shape[0] != channel_widths[l]:
                raise ValidationError(
                    f"layer {l} has {arr.shape[0]} maps, spec says {channel_widths[l]}"
                )
            store.append(arr)
        self.maps = tuple(store)

    def layer(self, l: int) -> np.ndarray:
        return self.maps[l]

    def __len__(self) -> int:
        return len(self.maps)


@dataclass(frozen=True)
class SynthesisResult:
    image: np.ndarray  # (H, W, 3) float32
    features: FeatureMapStack = field(repr=False, default=None)


class GeneratorBackend(ABC):
    """Contract shared by the toy generator and pretrained adapters."""

    @property
    @abstractmethod
    def layer_count(self) -> int: ...

    @property
    @abstractmethod
    def channel_widths(self) -> tuple[int, ...]: ...

    @property
    @abstractmethod
    def image_size(self) -> int: ...

    @property
    @abstractmethod
    def fingerprint(self) -> str:
        """Stable identifier of architecture + weights, embedded in catalogs."""

    @abstractmethod
    def wplus_to_style(self, w: LatentWPlus) -> StyleVector:
        """Apply every layer's affine map: ``s[(l, c)] = (A_l w_l + b_l)_c``."""

    @abstractmethod
    def synthesize(
        self, s: StyleVector, xform: InputTransform | None = None
    ) -> SynthesisResult:
        """Render from a complete style vector; taps feature maps per layer."""

    def check_wplus(self, w: LatentWPlus) -> None:
        if w.layer_count != self.layer_count:
            raise ValidationError(
                f"latent has {w.layer_count} layers, backend expects {self.layer_count}"
            )

    def check_style(self, s: StyleVector) -> None:
        for l, width in enumerate(self.channel_widths):
            if not s.has_layer(l):
                raise ValidationError(f"style vector missing layer {l}")
            if s.layer(l).size != width:
                raise ValidationError(
                    f"style layer {l} has {s.layer(l).size} channels, backend expects {width}"
                )

    def render_wplus(self, w: LatentWPlus, xform: InputTransform | None = None) -> SynthesisResult:
        return self.synthesize(self.wplus_to_style(w), xform)
