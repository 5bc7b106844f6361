import numpy as np
import pytest

from v2sg.blend import (
    LOCAL_LAYERS,
    FrameBlendInput,
    baseline_code,
    blend_frame,
    combine_styles,
    render_video,
    style_slices,
    video_blend_inputs,
)
from v2sg.errors import ValidationError
from v2sg.mining import CatalogEntry, ChannelCatalog
from v2sg.rigid import RigidTrack, compose_input_transform
from v2sg.types import (
    BlendCoefficients,
    LatentTrajectory,
    LatentWPlus,
    RigidParams,
    SChannelAddress,
    StyleVector,
)

from conftest import random_code


def _traj(codes, fps=30.0) -> LatentTrajectory:
    return LatentTrajectory(tuple(codes), source_id="t", fps=fps)


def _catalog_for(backend, addrs=((3, 5), (4, 2))) -> ChannelCatalog:
    entries = tuple(
        CatalogEntry(SChannelAddress(l, c), "mouth", 0.9, 0.01) for l, c in addrs
    )
    return ChannelCatalog(entries, t_fg=0.3, t_bg=0.1, probe_count=1,
                          backend_fingerprint=backend.fingerprint)


# -- baseline_code ------------------------------------------------------------------


def test_baseline_static_driving(rng):
    ref = random_code(rng, 4)
    frame = random_code(rng, 4)
    traj = _traj([frame] * 5)
    for j in range(5):
        out = baseline_code(ref, traj, j)
        assert np.array_equal(out.code, ref.code)


def test_baseline_telescoping_oracle(rng):
    ref = random_code(rng, 4)
    w0 = random_code(rng, 4)
    d = rng.normal(0, 0.1, size=(4, 512)).astype(np.float32)
    frames = [LatentWPlus(w0.code + j * d) for j in range(6)]
    traj = _traj(frames)
    for j in range(6):
        # telescoping oracle: sum of consecutive differences
        acc = np.zeros((4, 512), dtype=np.float32)
        for k in range(1, j + 1):
            acc = acc + (frames[k].code - frames[k - 1].code)
        expected = ref.code + acc
        got = baseline_code(ref, traj, j)
        assert np.allclose(got.code, expected, atol=1e-5)


def test_baseline_j0_identity(rng):
    ref = random_code(rng, 4)
    traj = _traj([random_code(rng, 4) for _ in range(3)])
    assert baseline_code(ref, traj, 0) is ref


def test_baseline_literal_form(rng):
    ref = random_code(rng, 4)
    frames = [random_code(rng, 4) for _ in range(4)]
    traj = _traj(frames)
    for j in range(1, 4):
        got = baseline_code(ref, traj, j, literal=True)
        expected = ref.code + (frames[j - 1].code - frames[j].code)
        assert np.array_equal(got.code, expected.astype(np.float32))
    assert baseline_code(ref, traj, 0, literal=True) is ref


def test_literal_and_cumulative_differ_on_moving_input(rng):
    ref = random_code(rng, 4)
    w0 = random_code(rng, 4)
    d = rng.normal(0, 0.1, size=(4, 512)).astype(np.float32)
    traj = _traj([LatentWPlus(w0.code + j * d) for j in range(4)])
    cum = baseline_code(ref, traj, 2).code
    lit = baseline_code(ref, traj, 2, literal=True).code
    assert not np.allclose(cum, lit)
    # cumulative accumulates 2d; literal stays one backward step (-d)
    assert np.allclose(cum - ref.code, 2 * d, atol=1e-5)
    assert np.allclose(lit - ref.code, -d, atol=1e-5)


def test_baseline_index_out_of_range(rng):
    ref = random_code(rng, 4)
    traj = _traj([random_code(rng, 4)])
    with pytest.raises(ValidationError):
        baseline_code(ref, traj, 1)


# -- style_slices --------------------------------------------------------------------


def test_style_slices_match_full_map(mid_backend, rng):
    w = random_code(rng, 16)
    sl = style_slices(mid_backend, w)
    full = mid_backend.wplus_to_style(w)
    assert sorted(sl.layers) == [3, 4, 5, 6, 7]
    for l in range(3, 8):
        assert np.array_equal(sl.layer(l), full.layer(l))


def test_style_slices_union_size(mid_backend, rng):
    sl = style_slices(mid_backend, random_code(rng, 16))
    total = sum(sl.layer(l).size for l in sl.layers)
    assert total == sum(mid_backend.channel_widths[3:8])


def test_style_slices_range_validation(small_backend, rng):
    with pytest.raises(ValidationError):
        style_slices(small_backend, random_code(rng, 4), layers=(3, 8))


# -- combine_styles kernel --------------------------------------------------------------


def _vec(rng, widths):
    return StyleVector({l: rng.normal(size=w) for l, w in enumerate(widths)})


def test_catalog_scalar_arithmetic_oracle():
    widths = (4,) * 9
    base_fill = np.zeros(4)
    layers_ref = {l: base_fill.copy() for l in range(9)}
    layers_ref[3] = np.array([1.0, 0.0, 0.0, 0.0])
    s_ref = StyleVector(layers_ref)
    layers_j = {l: base_fill.copy() for l in range(9)}
    layers_j[3] = np.array([1.5, 0.0, 0.0, 0.0])
    s_j = StyleVector(layers_j)
    s_base = StyleVector({l: (np.array([1.0, 0, 0, 0]) if l == 3 else base_fill.copy())
                          for l in range(9)})
    out = combine_styles(
        s_ref, s_j, s_base, [SChannelAddress(3, 0)], BlendCoefficients(),
        layer_count=9,
    )
    assert out[SChannelAddress(3, 0)] == pytest.approx(-1.0 + 1.5 + 1.0)


def test_zeta_midpoint_non_catalog():
    widths = (2,) * 9
    s_ref = StyleVector({l: np.full(2, 1.0) for l in range(9)})
    s_base = StyleVector({l: np.full(2, 3.0) for l in range(9)})
    out = combine_styles(s_ref, None, s_base, [], BlendCoefficients(zeta=0.5), layer_count=9)
    assert out[SChannelAddress(5, 0)] == pytest.approx(2.0)
    # outside 3..7, baseline carries through
    assert out[SChannelAddress(0, 0)] == pytest.approx(3.0)
    assert out[SChannelAddress(8, 1)] == pytest.approx(3.0)


def test_pose_disabled_pins_first_layers():
    s_ref = StyleVector({l: np.full(2, 1.0) for l in range(9)})
    s_base = StyleVector({l: np.full(2, 3.0) for l in range(9)})
    coeffs = BlendCoefficients(use_pose=False)
    out = combine_styles(s_ref, None, s_base, [], coeffs, layer_count=9)
    for l in range(0, 3):
        assert out[SChannelAddress(l, 0)] == pytest.approx(1.0)
    assert out[SChannelAddress(8, 0)] == pytest.approx(3.0)


def test_affine_superposition_on_random_vectors(rng):
    """blend output is affine in each input with the stated coefficients."""
    widths = (6,) * 10
    addrs = [SChannelAddress(3, 1), SChannelAddress(6, 4), SChannelAddress(9, 0)]
    coeffs = BlendCoefficients(alpha=-1.0, beta=1.0, gamma=1.0, zeta=0.5)
    for _ in range(100):
        s_ref, s_j, s_base = (_vec(rng, widths) for _ in range(3))
        d_ref, d_j, d_base = (_vec(rng, widths) for _ in range(3))
        t = rng.uniform()

        def mix(a, b):
            return StyleVector({l: t * a.layer(l) + (1 - t) * b.layer(l) for l in a.layers})

        out_mixed = combine_styles(mix(s_ref, d_ref), mix(s_j, d_j), mix(s_base, d_base),
                                   addrs, coeffs, layer_count=10)
        out_a = combine_styles(s_ref, s_j, s_base, addrs, coeffs, layer_count=10)
        out_b = combine_styles(d_ref, d_j, d_base, addrs, coeffs, layer_count=10)
        for l in range(10):
            lin = t * out_a.layer(l) + (1 - t) * out_b.layer(l)
            assert np.allclose(out_mixed.layer(l), lin, atol=1e-9)


def test_gamma_doubling_doubles_base_contribution(rng):
    widths = (6,) * 10
    addr = SChannelAddress(4, 2)
    s_ref, s_j, s_base = (_vec(rng, widths) for _ in range(3))
    zero_base = StyleVector({l: np.zeros(6) for l in range(10)})
    one = combine_styles(s_ref, s_j, s_base, [addr], BlendCoefficients(gamma=1.0), layer_count=10)
    two = combine_styles(s_ref, s_j, s_base, [addr], BlendCoefficients(gamma=2.0), layer_count=10)
    none = combine_styles(s_ref, s_j, zero_base, [addr], BlendCoefficients(gamma=1.0), layer_count=10)
    base_term_one = one[addr] - (-1.0 * s_ref[addr] + 1.0 * s_j[addr])
    base_term_two = two[addr] - (-1.0 * s_ref[addr] + 1.0 * s_j[addr])
    assert base_term_two == pytest.approx(2 * base_term_one, abs=1e-9)
    assert none[addr] == pytest.approx(-1.0 * s_ref[addr] + 1.0 * s_j[addr], abs=1e-12)


# -- blend_frame / render_video ------------------------------------------------------------


def _null_session(backend, rng, n_frames=4):
    ref = random_code(rng, backend.layer_count)
    driving = _traj([ref] * n_frames)
    catalog = _catalog_for(backend, addrs=((3, 2),) if backend.layer_count > 3 else ((1, 0),))
    coeffs = BlendCoefficients(use_pose=False)
    return ref, driving, catalog, coeffs


def test_full_identity_case(mid_backend, rng):
    """Static driving equal to the reference: every value collapses to s_ref
    and the rendered frame is bit-identical to the reference render."""
    ref, driving, catalog, coeffs = _null_session(mid_backend, rng)
    s_ref = mid_backend.wplus_to_style(ref)
    for j in range(driving.frame_count):
        inp = FrameBlendInput(ref, driving, catalog, coeffs, j)
        out = blend_frame(mid_backend, inp)
        for l in range(mid_backend.layer_count):
            assert np.array_equal(out.layer(l), s_ref.layer(l))
    frames = render_video(mid_backend, video_blend_inputs(ref, driving, catalog, coeffs))
    ref_render = mid_backend.render_wplus(ref).image
    for f in frames:
        assert np.array_equal(f, ref_render)


def test_constant_driving_constant_output(mid_backend, rng):
    """Any constant driving trajectory yields frame-identical output."""
    ref = random_code(rng, 16)
    other = random_code(rng, 16)
    driving = _traj([other] * 3)
    catalog = _catalog_for(mid_backend)
    coeffs = BlendCoefficients(use_pose=False)
    frames = render_video(mid_backend, video_blend_inputs(ref, driving, catalog, coeffs))
    for f in frames[1:]:
        assert np.array_equal(f, frames[0])


def test_locality_of_catalog_outputs(mid_backend, rng):
    """Perturbing the driving frame's code outside layers 3-7 and outside the
    catalog layers leaves catalog-address blend outputs unchanged."""
    ref = random_code(rng, 16)
    codes = [random_code(rng, 16) for _ in range(3)]
    catalog = _catalog_for(mid_backend, addrs=((3, 5), (4, 2)))
    coeffs = BlendCoefficients()
    driving = _traj(codes)
    j = 2
    out = blend_frame(mid_backend, FrameBlendInput(ref, driving, catalog, coeffs, j))

    perturbed = [c.code.copy() for c in codes]
    perturbed[j][10] += 5.0  # layer 10: outside 3-7 and outside catalog layers
    driving2 = _traj([LatentWPlus(c) for c in perturbed])
    out2 = blend_frame(mid_backend, FrameBlendInput(ref, driving2, catalog, coeffs, j))
    for addr in catalog.addresses():
        assert out[addr] == out2[addr]
    assert not np.array_equal(out.layer(10), out2.layer(10))


def test_local_source_none_reduces_to_reference_styles(mid_backend, rng):
    ref = random_code(rng, 16)
    driving = _traj([random_code(rng, 16) for _ in range(3)])
    catalog = _catalog_for(mid_backend)
    coeffs = BlendCoefficients(use_pose=False, use_local=False)
    s_ref = mid_backend.wplus_to_style(ref)
    out = blend_frame(mid_backend, FrameBlendInput(ref, driving, catalog, coeffs, 2))
    for l in range(16):
        assert np.array_equal(out.layer(l), s_ref.layer(l))


def test_codriving_local_source(mid_backend, rng):
    ref = random_code(rng, 16)
    driving = _traj([random_code(rng, 16) for _ in range(3)])
    codriving = _traj([random_code(rng, 16) for _ in range(3)])
    catalog = _catalog_for(mid_backend)
    coeffs = BlendCoefficients(local_source="codriving")
    out_cd = blend_frame(
        mid_backend,
        FrameBlendInput(ref, driving, catalog, coeffs, 1, codriving=codriving),
    )
    direct = blend_frame(
        mid_backend,
        FrameBlendInput(ref, codriving, catalog, BlendCoefficients(), 1),
    )
    for l in range(16):
        assert np.array_equal(out_cd.layer(l), direct.layer(l))
    with pytest.raises(ValidationError):
        blend_frame(mid_backend, FrameBlendInput(ref, driving, catalog, coeffs, 1))


def test_fingerprint_mismatch_rejected(mid_backend, small_backend, rng):
    ref = random_code(rng, 16)
    driving = _traj([ref])
    catalog = _catalog_for(small_backend)  # wrong backend
    with pytest.raises(ValidationError):
        blend_frame(mid_backend, FrameBlendInput(ref, driving, catalog, BlendCoefficients(), 0))


def test_render_video_per_frame_composition_oracle(mid_backend, rng):
    """Rigid from co-driving track, local from driving: each output frame must
    equal synthesize(blend_frame(j), transform(codriving_track[j]))."""
    ref = random_code(rng, 16)
    driving = _traj([random_code(rng, 16) for _ in range(3)])
    catalog = _catalog_for(mid_backend)
    coeffs = BlendCoefficients(rigid_source="codriving", use_pose=False)
    track = RigidTrack(
        tuple(RigidParams(0.02 * j, -0.01 * j, 0.1 * j) for j in range(3)), fps=30.0
    )
    inputs = video_blend_inputs(ref, driving, catalog, coeffs)
    frames = render_video(mid_backend, inputs, track)
    for j in range(3):
        s = blend_frame(mid_backend, inputs[j])
        expected = mid_backend.synthesize(s, compose_input_transform(track.params[j])).image
        assert np.array_equal(frames[j], expected)


def test_render_video_length_mismatch(mid_backend, rng):
    ref = random_code(rng, 16)
    driving = _traj([random_code(rng, 16) for _ in range(3)])
    catalog = _catalog_for(mid_backend)
    inputs = video_blend_inputs(ref, driving, catalog, BlendCoefficients())
    short = RigidTrack((RigidParams(0, 0, 0),), fps=30.0)
    with pytest.raises(ValidationError):
        render_video(mid_backend, inputs, short)


def test_protocol_length_160_frames(small_backend, rng):
    """A 160-frame driving input produces 160 output frames."""
    ref = random_code(rng, 4)
    driving = _traj([ref] * 160)
    catalog = _catalog_for(small_backend, addrs=((3, 1),))
    coeffs = BlendCoefficients(use_pose=False)
    frames = render_video(small_backend, video_blend_inputs(ref, driving, catalog, coeffs))
    assert len(frames) == 160
