"""Head-pose matching by restricted latent optimization.

Optimizes the first-half W+ layers of a reference code so the rendered head
pose matches a target, while an L1 penalty keeps the iterate near the initial
code (identity preservation). First-order descent with backtracking halving;
accepted steps strictly decrease the loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .errors import CapabilityError, OptimizationError, ValidationError
from .perception import PoseRegressor, require_pose_gradients
from .types import LatentWPlus, PoseAngles

_MAX_HALVINGS = 40


@dataclass(frozen=True)
class PoseMatchConfig:
    optimized_layers: tuple[int, int] = (0, 8)  # half-open [start, stop)
    pose_weight: float = 2.0
    identity_weight: float = 0.04
    max_steps: int = 100
    step_size: float = 0.1
    tolerance: float = 1e-5

    def __post_init__(self):
        start, stop = self.optimized_layers
        if start < 0 or stop <= start:
            raise ValidationError(f"bad layer range {self.optimized_layers}")
        if self.pose_weight < 0 or self.identity_weight < 0:
            raise ValidationError("loss weights must be >= 0")
        if self.max_steps < 1:
            raise ValidationError("max_steps must be >= 1")
        if self.step_size <= 0:
            raise ValidationError("step_size must be positive")


def pose_of_frame(backend, pose_backend: PoseRegressor, w: LatentWPlus) -> PoseAngles:
    """Render *w* and regress its pose (the composition used as the target)."""
    result = backend.render_wplus(w)
    return pose_backend.regress_pose(result.image)


def match_pose(
    backend,
    pose_backend: PoseRegressor,
    w_ref: LatentWPlus,
    target: PoseAngles,
    cfg: PoseMatchConfig | None = None,
) -> LatentWPlus:
    """Return the reference code with its pose layers optimized toward *target*.

    Layers outside ``cfg.optimized_layers`` are bit-identical to the input.
    The objective is ``sum_a pose_weight * (angle_a - target_a)^2 +
    identity_weight * ||block - block_0||_1``; iteration stops when the
    Euclidean pose residual reaches ``cfg.tolerance``, when no halved step
    improves the loss, or at ``cfg.max_steps``.
    """
    cfg = cfg or PoseMatchConfig()
    require_pose_gradients(pose_backend)
    if not hasattr(backend, "render_wplus_torch"):
        raise CapabilityError(f"{type(backend).__name__} has no differentiable render")
    start, stop = cfg.optimized_layers
    if stop > w_ref.layer_count:
        raise ValidationError(
            f"optimized layers {cfg.optimized_layers} exceed layer_count {w_ref.layer_count}"
        )

    w0 = np.asarray(w_ref.code, dtype=np.float64)
    lo = torch.from_numpy(w0[:start])
    hi = torch.from_numpy(w0[stop:])
    block0 = w0[start:stop].copy()
    target_t = torch.from_numpy(target.as_array())

    def objective(block: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        full = torch.cat([lo, block, hi], dim=0)
        angles = pose_backend.regress_pose_torch(backend.render_wplus_torch(full))
        pose_term = (cfg.pose_weight * (angles - target_t) ** 2).sum()
        id_term = cfg.identity_weight * (block - torch.from_numpy(block0)).abs().sum()
        return pose_term + id_term, angles

    def evaluate(block_np: np.ndarray, with_grad: bool):
        block = torch.tensor(block_np, dtype=torch.float64, requires_grad=with_grad)
        grad = None
        if with_grad:
            loss, angles = objective(block)
            loss.backward()
            grad = block.grad.numpy().copy()
        else:
            with torch.no_grad():
                loss, angles = objective(block)
        return float(loss.detach()), grad, angles.detach().numpy()

    block = block0.copy()
    trace: list[tuple[int, float]] = []
    loss, grad, angles = evaluate(block, with_grad=True)
    for step in range(cfg.max_steps):
        if not np.isfinite(loss):
            raise OptimizationError("loss became non-finite", trace)
        trace.append((step, loss))
        residual = float(np.linalg.norm(angles - target.as_array()))
        if residual <= cfg.tolerance:
            break
        eta = cfg.step_size
        accepted = False
        for _ in range(_MAX_HALVINGS):
            trial = block - eta * grad
            trial_loss, _, _ = evaluate(trial, with_grad=False)
            if np.isfinite(trial_loss) and trial_loss < loss:
                block = trial
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break  # stalled: no descent direction at any step size
        loss, grad, angles = evaluate(block, with_grad=True)

    if np.array_equal(block, block0):
        return w_ref
    return w_ref.replace_layers(start, stop, block.astype(np.float32))
