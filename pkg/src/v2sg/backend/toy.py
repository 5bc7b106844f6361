"""Deterministic desk-scale generator with StyleGAN3-shaped plumbing.

The input layer produces sinusoidal Fourier features; a rigid
:class:`~v2sg.types.InputTransform` acts on them by rotating each frequency
and shifting each phase, so the continuous identity
``F'(x) = F(R(-r)(x - t))`` holds exactly. Synthesis is a stack of 1x1
channel mixes followed by tanh nonlinearities, each modulated per-channel
by the style vector; because every synthesis op is pointwise in space,
integer-pixel translations of the render are exact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import torch

from ..errors import ValidationError
from ..types import InputTransform, LatentWPlus, StyleVector
from .base import FeatureMapStack, GeneratorBackend, GeneratorSpec, SynthesisResult

_TWO_PI = 2.0 * np.pi


@dataclass
class ToyWeights:
    """All learnable-equivalent tensors of the toy generator (float64)."""

    freqs: torch.Tensor       # (F, 2)
    phases: torch.Tensor      # (F,)
    affine_w: list[torch.Tensor]  # per layer (C_l, 512)
    affine_b: list[torch.Tensor]  # per layer (C_l,)
    mix: list[torch.Tensor]       # per layer (C_l, C_{l-1}); C_{-1} = F
    rgb: torch.Tensor         # (3, C_last)

    def synthesis_tensors(self) -> list[torch.Tensor]:
        return [self.freqs, self.phases, *self.mix, self.rgb]

    def all_tensors(self) -> list[torch.Tensor]:
        return [self.freqs, self.phases, *self.affine_w, *self.affine_b, *self.mix, self.rgb]


def _init_weights(spec: GeneratorSpec) -> ToyWeights:
    rng = np.random.default_rng(spec.seed)
    f = spec.frequency_count
    angles = rng.uniform(0.0, _TWO_PI, size=f)
    mags = rng.uniform(1.0, spec.image_size / 4.0, size=f)
    freqs = np.stack([mags * np.cos(angles), mags * np.sin(angles)], axis=1)
    phases = rng.uniform(0.0, _TWO_PI, size=f)

    affine_w, affine_b, mix = [], [], []
    prev = f
    for width in spec.channel_widths:
        affine_w.append(rng.normal(0.0, 0.25 / np.sqrt(512.0), size=(width, 512)))
        affine_b.append(np.ones(width))
        mix.append(rng.normal(0.0, 1.0, size=(width, prev)) * (1.6 / np.sqrt(prev)))
        prev = width
    rgb = rng.normal(0.0, 1.0, size=(3, prev)) * (1.5 / np.sqrt(prev))

    t = lambda a: torch.from_numpy(np.ascontiguousarray(a, dtype=np.float64))
    return ToyWeights(
        freqs=t(freqs),
        phases=t(phases),
        affine_w=[t(a) for a in affine_w],
        affine_b=[t(b) for b in affine_b],
        mix=[t(m) for m in mix],
        rgb=t(rgb),
    )


def _pixel_grid(n: int) -> torch.Tensor:
    """Centered pixel-center coordinates, exact dyadic values: (n*n, 2)."""
    c = (torch.arange(n, dtype=torch.float64) + 0.5) / n - 0.5
    ys, xs = torch.meshgrid(c, c, indexing="ij")
    return torch.stack([xs.reshape(-1), ys.reshape(-1)], dim=1)


class ToyGenerator(GeneratorBackend):
    """Seed-deterministic generator; same spec and seed give identical renders."""

    def __init__(self, spec: GeneratorSpec, weights: ToyWeights | None = None):
        self.spec = spec
        self.weights = weights if weights is not None else _init_weights(spec)
        self._grid = _pixel_grid(spec.image_size)
        self._fingerprint = self._compute_fingerprint()

    # -- contract surface -------------------------------------------------

    @property
    def layer_count(self) -> int:
        return self.spec.layer_count

    @property
    def channel_widths(self) -> tuple[int, ...]:
        return self.spec.channel_widths

    @property
    def image_size(self) -> int:
        return self.spec.image_size

    @property
    def fingerprint(self) -> str:
        return self._fingerprint

    def _compute_fingerprint(self) -> str:
        h = hashlib.sha256()
        for t in self.weights.all_tensors():
            h.update(np.ascontiguousarray(t.numpy(), dtype="<f8").tobytes())
        widths = ",".join(str(w) for w in self.spec.channel_widths)
        return (
            f"toy:v1:L{self.spec.layer_count}:N{self.spec.image_size}"
            f":F{self.spec.frequency_count}:W{widths}:{h.hexdigest()[:16]}"
        )

    def wplus_to_style(self, w: LatentWPlus) -> StyleVector:
        self.check_wplus(w)
        with torch.no_grad():
            styles = self.style_torch(torch.from_numpy(np.asarray(w.code, dtype=np.float64)))
        return StyleVector({l: s.numpy() for l, s in enumerate(styles)})

    def synthesize(self, s: StyleVector, xform: InputTransform | None = None) -> SynthesisResult:
        self.check_style(s)
        s_t = [torch.from_numpy(s.layer(l).copy()) for l in range(self.layer_count)]
        with torch.no_grad():
            image, taps = self._forward(s_t, xform)
        features = FeatureMapStack([t.numpy() for t in taps], self.spec.channel_widths)
        return SynthesisResult(image=image.numpy().astype(np.float32), features=features)

    # -- torch (differentiable) surface ------------------------------------

    def style_torch(self, w: torch.Tensor) -> list[torch.Tensor]:
        """Per-layer ``A_l w_l + b_l`` for a (layer_count, 512) float64 tensor."""
        if w.shape != (self.layer_count, 512):
            raise ValidationError(f"expected ({self.layer_count}, 512) latent, got {tuple(w.shape)}")
        wt = self.weights
        return [wt.affine_w[l] @ w[l] + wt.affine_b[l] for l in range(self.layer_count)]

    def render_wplus_torch(
        self, w: torch.Tensor, xform: InputTransform | None = None
    ) -> torch.Tensor:
        """Differentiable render, (H, W, 3) float64."""
        image, _ = self._forward(self.style_torch(w), xform, want_taps=False)
        return image

    def _features(self, xform: InputTransform | None) -> torch.Tensor:
        """Fourier features at every pixel center: (F, n*n) float64."""
        freqs, phases = self.weights.freqs, self.weights.phases
        if xform is not None and not xform.is_identity():
            rot = torch.from_numpy(xform.rotation.copy())
            t = torch.from_numpy(xform.translation.copy())
            freqs = freqs @ rot          # row k becomes R^T f_k
            phases = phases - _TWO_PI * (freqs @ t)
        args = _TWO_PI * (self._grid @ freqs.T) + phases  # (n*n, F)
        feat = torch.empty_like(args)
        feat[:, 0::2] = torch.cos(args[:, 0::2])
        feat[:, 1::2] = torch.sin(args[:, 1::2])
        return feat.T

    def _forward(
        self,
        styles: list[torch.Tensor],
        xform: InputTransform | None,
        want_taps: bool = True,
    ) -> tuple[torch.Tensor, list[torch.Tensor]]:
        n = self.spec.image_size
        h = self._features(xform)  # (F, n*n)
        taps: list[torch.Tensor] = []
        for l in range(self.layer_count):
            z = self.weights.mix[l] @ h
            h = torch.tanh(styles[l].unsqueeze(1) * z)
            if want_taps:
                taps.append(h.reshape(-1, n, n))
        image = torch.tanh(self.weights.rgb @ h)  # (3, n*n)
        return image.T.reshape(n, n, 3), taps

    def with_synthesis_weights(self, other: "ToyGenerator") -> "ToyGenerator":
        """Backend using *other*'s synthesis weights but this one's affine maps,
        mirroring a generator fine-tune that leaves the style addresses intact."""
        if other.spec.channel_widths != self.spec.channel_widths or (
            other.spec.image_size != self.spec.image_size
            or other.spec.frequency_count != self.spec.frequency_count
        ):
            raise ValidationError("fine-tuned weights must match the base architecture")
        merged = ToyWeights(
            freqs=other.weights.freqs,
            phases=other.weights.phases,
            affine_w=self.weights.affine_w,
            affine_b=self.weights.affine_b,
            mix=other.weights.mix,
            rgb=other.weights.rgb,
        )
        return ToyGenerator(self.spec, merged)


def toy_generator(spec: GeneratorSpec) -> ToyGenerator:
    return ToyGenerator(spec)
