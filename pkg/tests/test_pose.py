import numpy as np
import pytest
import torch

from v2sg.errors import CapabilityError, OptimizationError, ValidationError
from v2sg.perception import LinearPoseRegressor, StegoPoseRegressor
from v2sg.pose import PoseMatchConfig, match_pose, pose_of_frame
from v2sg.types import LatentWPlus, PoseAngles

from conftest import random_code


class FlatRender:
    """Duck-typed backend whose 'image' is the flattened first-k latent block,
    making the composed pose map exactly linear in w."""

    def __init__(self, layers: int = 16, block: int = 8):
        self.layer_count = layers
        self.block = block

    def render_wplus_torch(self, w: torch.Tensor, xform=None) -> torch.Tensor:
        return w[: self.block].reshape(-1)


class LinearProbe:
    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self._t = torch.from_numpy(matrix.copy())

    def regress_pose_torch(self, img: torch.Tensor) -> torch.Tensor:
        return self._t @ img

    def regress_pose(self, img) -> PoseAngles:
        vec = np.asarray(img, dtype=np.float64).reshape(-1)
        return PoseAngles(*(self.matrix @ vec))


def _linear_rig(seed=7):
    rng = np.random.default_rng(seed)
    d = 8 * 512
    matrix = rng.normal(0.0, 1.0 / np.sqrt(d), size=(3, d))
    w = LatentWPlus(rng.normal(0, 1, size=(16, 512)).astype(np.float32))
    return FlatRender(), LinearProbe(matrix), w, matrix


def test_fixed_point_returns_input_unchanged(small_backend, rng):
    reg = LinearPoseRegressor(seed=1)
    w = random_code(rng, 4)
    target = pose_of_frame(small_backend, reg, w)
    out = match_pose(small_backend, reg, w, target,
                     PoseMatchConfig(optimized_layers=(0, 2), max_steps=10, tolerance=1e-9))
    assert out is w


def test_linear_stub_reaches_least_squares_residual():
    backend, probe, w, matrix = _linear_rig()
    target = np.array([0.3, -0.2, 0.15])
    cfg = PoseMatchConfig(optimized_layers=(0, 8), pose_weight=2.0, identity_weight=0.0,
                          max_steps=400, step_size=0.25, tolerance=1e-5)
    out = match_pose(backend, probe, w, PoseAngles(*target), cfg)
    # least-squares oracle: underdetermined system, exact solution exists
    flat0 = w.code[:8].reshape(-1).astype(np.float64)
    delta, *_ = np.linalg.lstsq(matrix, target - matrix @ flat0, rcond=None)
    oracle_residual = np.linalg.norm(matrix @ (flat0 + delta) - target)
    got_residual = np.linalg.norm(matrix @ out.code[:8].reshape(-1).astype(np.float64) - target)
    assert got_residual < oracle_residual + 1e-3


def test_huge_identity_weight_pins_latent():
    backend, probe, w, matrix = _linear_rig(seed=9)
    target = np.array([0.3, -0.2, 0.15])
    cfg = PoseMatchConfig(optimized_layers=(0, 8), pose_weight=2.0, identity_weight=1e6,
                          max_steps=60, step_size=0.25, tolerance=1e-9)
    out = match_pose(backend, probe, w, PoseAngles(*target), cfg)
    drift = np.abs(out.code[:8].astype(np.float64) - w.code[:8].astype(np.float64)).sum()
    assert drift < 1e-3
    before = np.linalg.norm(matrix @ w.code[:8].reshape(-1).astype(np.float64) - target)
    after = np.linalg.norm(matrix @ out.code[:8].reshape(-1).astype(np.float64) - target)
    assert after == pytest.approx(before, rel=1e-3)


def test_layers_outside_range_bit_identical():
    backend, probe, w, _ = _linear_rig(seed=3)
    cfg = PoseMatchConfig(optimized_layers=(0, 8), identity_weight=0.0,
                          max_steps=50, step_size=0.25, tolerance=1e-4)
    out = match_pose(backend, probe, w, PoseAngles(0.1, 0.0, -0.1), cfg)
    assert np.array_equal(out.code[8:], w.code[8:])
    assert not np.array_equal(out.code[:8], w.code[:8])


def test_loss_monotone_over_accepted_steps():
    """Residual never increases when the step budget grows (accepted steps
    strictly decrease the loss, and with identity_weight 0 the loss is the
    weighted squared residual)."""
    backend, probe, w, _ = _linear_rig(seed=5)
    target = np.array([0.2, 0.1, -0.3])
    res = []
    for steps in (1, 5, 20, 40):
        cfg = PoseMatchConfig(optimized_layers=(0, 8), identity_weight=0.0,
                              max_steps=steps, step_size=0.25, tolerance=0.0)
        out = match_pose(backend, probe, w, PoseAngles(*target), cfg)
        angles = probe.regress_pose(out.code[:8].reshape(-1))
        res.append(np.linalg.norm(angles.as_array() - target))
    assert all(res[i + 1] <= res[i] + 1e-12 for i in range(len(res) - 1))


def test_capability_error_for_gradient_free_backend(small_backend, rng):
    w = random_code(rng, 4)
    with pytest.raises(CapabilityError):
        match_pose(small_backend, StegoPoseRegressor(), w, PoseAngles(0, 0, 0))


def test_divergence_raises_with_trace():
    class ExplodingProbe:
        def regress_pose_torch(self, img):
            s = img.sum() * 1e200  # squared in the loss -> immediate overflow
            return torch.stack([s, s, s])

        def regress_pose(self, img):
            return PoseAngles(0, 0, 0)

    backend = FlatRender()
    rng = np.random.default_rng(1)
    w = LatentWPlus(rng.normal(0, 1, size=(16, 512)).astype(np.float32) * 1e3)
    with pytest.raises(OptimizationError) as err:
        match_pose(backend, ExplodingProbe(), w, PoseAngles(0.0, 0.0, 0.0),
                   PoseMatchConfig(optimized_layers=(0, 8), max_steps=5, step_size=1e3))
    assert isinstance(err.value.trace, list)


def test_pose_of_frame_is_exact_composition(small_backend, rng):
    reg = LinearPoseRegressor(seed=2)
    w = random_code(rng, 4)
    direct = reg.regress_pose(small_backend.render_wplus(w).image)
    composed = pose_of_frame(small_backend, reg, w)
    assert composed == direct
    assert pose_of_frame(small_backend, reg, w) == composed  # deterministic


def test_config_validation():
    with pytest.raises(ValidationError):
        PoseMatchConfig(optimized_layers=(4, 2))
    with pytest.raises(ValidationError):
        PoseMatchConfig(max_steps=0)
    with pytest.raises(ValidationError):
        PoseMatchConfig(pose_weight=-1)
    with pytest.raises(ValidationError):
        PoseMatchConfig(step_size=0.0)


def test_range_exceeding_layer_count_rejected(rng):
    backend, probe, w, _ = _linear_rig()
    cfg = PoseMatchConfig(optimized_layers=(0, 20))
    with pytest.raises(ValidationError):
        match_pose(backend, probe, w, PoseAngles(0, 0, 0), cfg)
