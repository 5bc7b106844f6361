"""Per-frame style blending across the latent spaces.

Routing for each final style value:

* mined catalog addresses (local transfer on): ``alpha*s_ref + beta*s_drv +
  gamma*s_base``, where ``s_drv`` comes from the motion frame's own code;
* all other channels in layers 3-7: the convex mix ``zeta*s_ref +
  (1 - zeta)*s_base``;
* every other layer: the baseline code's style (the global motion carrier);
  with pose transfer disabled, layers 0-2 are pinned to the reference.

The baseline code accumulates the motion trajectory's per-frame W+ deltas
onto the pose-matched reference; ``literal_baseline`` selects the single
backward difference ``w_(j-1) - w_j`` instead of the cumulative form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .mining import ChannelCatalog
from .rigid import RigidTrack, compose_input_transform
from .types import (
    BlendCoefficients,
    InputTransform,
    LatentTrajectory,
    LatentWPlus,
    MotionSource,
    SChannelAddress,
    StyleVector,
)

LOCAL_LAYERS = (3, 8)  # half-open range of the style-mix window
POSE_LAYERS = (0, 3)  # pinned to the reference when pose transfer is off


def baseline_code(
    w_ref_pose: LatentWPlus, driving: LatentTrajectory, j: int, literal: bool = False
) -> LatentWPlus:
    """Reference code carrying the driving trajectory's W+ motion at frame *j*.

    Cumulative form: ``w_ref + (w_j - w_0)`` (the sum of consecutive-frame
    differences). Literal form: ``w_ref + (w_(j-1) - w_j)``, a single backward
    difference. Both give exactly ``w_ref`` at frame 0.
    """
    if not 0 <= j < driving.frame_count:
        raise ValidationError(f"frame index {j} out of range [0, {driving.frame_count})")
    if driving.layer_count != w_ref_pose.layer_count:
        raise ValidationError("driving trajectory and reference disagree on layer_count")
    if j == 0:
        return w_ref_pose
    if literal:
        delta = driving.frames[j - 1].code - driving.frames[j].code
    else:
        delta = driving.frames[j].code - driving.frames[0].code
    return LatentWPlus(w_ref_pose.code + delta)


def style_slices(backend, w: LatentWPlus, layers: tuple[int, int] = LOCAL_LAYERS) -> StyleVector:
    """Style values restricted to the given half-open layer range."""
    lo, hi = layers
    if lo < 0 or hi > backend.layer_count or lo >= hi:
        raise ValidationError(f"layer range {layers} invalid for {backend.layer_count} layers")
    full = backend.wplus_to_style(w)
    return StyleVector({l: full.layer(l) for l in range(lo, hi)})


@dataclass(frozen=True)
class FrameBlendInput:
    """Everything blend_frame needs for one output frame."""

    w_ref_pose: LatentWPlus
    driving: LatentTrajectory
    catalog: ChannelCatalog
    coeffs: BlendCoefficients
    frame_index: int
    codriving: LatentTrajectory | None = None
    literal_baseline: bool = False


def combine_styles(
    s_ref: StyleVector,
    s_drv: StyleVector | None,
    s_base: StyleVector,
    catalog_addresses: Sequence[SChannelAddress],
    coeffs: BlendCoefficients,
    *,
    layer_count: int,
    local_layers: tuple[int, int] = LOCAL_LAYERS,
) -> StyleVector:
    """Pure mixing kernel over three aligned style vectors."""
    lo, hi = local_layers
    out: dict[int, np.ndarray] = {}
    for l in range(layer_count):
        ref = s_ref.layer(l)
        base = s_base.layer(l)
        if lo <= l < hi:
            out[l] = coeffs.zeta * ref + (1.0 - coeffs.zeta) * base
        elif not coeffs.use_pose and POSE_LAYERS[0] <= l < POSE_LAYERS[1]:
            out[l] = ref.copy()
        else:
            out[l] = base.copy()
    if s_drv is not None:
        for addr in catalog_addresses:
            if not (0 <= addr.layer < layer_count):
                raise ValidationError(f"catalog address {addr} outside backend layers")
            ref_v = s_ref.layer(addr.layer)[addr.channel]
            drv_v = s_drv.layer(addr.layer)[addr.channel]
            base_v = s_base.layer(addr.layer)[addr.channel]
            out[addr.layer][addr.channel] = (
                coeffs.alpha * ref_v + coeffs.beta * drv_v
            ) + coeffs.gamma * base_v
    return StyleVector(out)


def _motion_trajectory(inp: FrameBlendInput) -> LatentTrajectory | None:
    src = inp.coeffs.local_source
    if not inp.coeffs.use_local or src == MotionSource.NONE:
        return None
    if src == MotionSource.DRIVING:
        return inp.driving
    if inp.codriving is None:
        raise ValidationError("local_source is 'codriving' but no co-driving trajectory given")
    return inp.codriving


def blend_frame(backend, inp: FrameBlendInput) -> StyleVector:
    """Final style vector for one frame under the current coefficients."""
    inp.catalog.validate_for(backend)
    traj = _motion_trajectory(inp)
    if traj is None:
        w_base = inp.w_ref_pose
        s_drv = None
        addrs: Sequence[SChannelAddress] = ()
    else:
        w_base = baseline_code(inp.w_ref_pose, traj, inp.frame_index, inp.literal_baseline)
        s_drv = backend.wplus_to_style(traj.frames[inp.frame_index])
        addrs = inp.catalog.addresses()
    s_ref = backend.wplus_to_style(inp.w_ref_pose)
    s_base = backend.wplus_to_style(w_base)
    return combine_styles(
        s_ref, s_drv, s_base, addrs, inp.coeffs, layer_count=backend.layer_count
    )


def video_blend_inputs(
    w_ref_pose: LatentWPlus,
    driving: LatentTrajectory,
    catalog: ChannelCatalog,
    coeffs: BlendCoefficients,
    codriving: LatentTrajectory | None = None,
    frame_count: int | None = None,
    literal_baseline: bool = False,
) -> list[FrameBlendInput]:
    count = driving.frame_count if frame_count is None else frame_count
    return [
        FrameBlendInput(
            w_ref_pose=w_ref_pose,
            driving=driving,
            catalog=catalog,
            coeffs=coeffs,
            frame_index=j,
            codriving=codriving,
            literal_baseline=literal_baseline,
        )
        for j in range(count)
    ]


def render_frame(
    backend,
    inp: FrameBlendInput,
    rigid_params=None,
    overrides: Mapping[SChannelAddress, float] | None = None,
) -> np.ndarray:
    """One output frame: blended style (plus manual channel overrides applied
    after the blend) synthesized under the frame's rigid input transform."""
    if inp.coeffs.use_rigid and rigid_params is not None:
        xform: InputTransform | None = compose_input_transform(rigid_params)
    else:
        xform = None
    s = blend_frame(backend, inp)
    if overrides:
        s = s.with_values(overrides)
    return backend.synthesize(s, xform).image


def render_video(
    backend,
    frames: Sequence[FrameBlendInput],
    rigid: RigidTrack | None = None,
    overrides: Mapping[SChannelAddress, float] | None = None,
) -> list[np.ndarray]:
    """Render every frame: input transform from the rigid track (when enabled)
    plus the blended style vector, with optional manual channel overrides."""
    if rigid is not None and len(rigid) != len(frames):
        raise ValidationError(
            f"rigid track has {len(rigid)} frames, blend inputs have {len(frames)}"
        )
    return [
        render_frame(backend, inp, rigid.params[j] if rigid is not None else None, overrides)
        for j, inp in enumerate(frames)
    ]
