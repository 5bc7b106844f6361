"""End-to-end session orchestration and on-disk persistence.

A session executes: ingest -> align -> project (or load trajectories) ->
pose match -> mine-or-load catalog -> blend/render -> optional evaluation.
Every stage persists its outputs under the session directory and is skipped
on re-runs when those outputs already exist, so sessions are resumable and,
given a fixed seed, byte-reproducible.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, Field

from . import imgio
from .backend import GeneratorBackend, GeneratorSpec, ToyGenerator, load_pretrained
from .blend import render_video, video_blend_inputs
from .container import load_trajectory, save_trajectory
from .errors import DetectionError, SessionBusyError, StageError, ValidationError
from .metrics import MetricReport, ProtocolSession, consistency_protocol
from .mining import ChannelCatalog, mine_channels
from .perception import (
    CentroidGridLandmarker,
    make_embedder,
    make_landmarker,
    make_pose_regressor,
    make_segmenter,
)
from .pose import PoseMatchConfig, match_pose, pose_of_frame
from .projector import make_projector
from .rigid import RigidTrack, rigid_from_landmarks, smooth_track
from .synthetic import CANONICAL_MIDPOINT
from .types import BlendCoefficients, LatentTrajectory, LatentWPlus, MotionSource

CACHE_ENV = "V2SG_CACHE"


# -- configuration schema ----------------------------------------------------


class BackendRef(BaseModel):
    name: str
    checkpoint: str | None = None
    finetuned: str | None = None
    spec: dict | None = None
    params: dict = Field(default_factory=dict)


class InputRef(BaseModel):
    trajectory: str | None = None
    video: str | None = None
    image: str | None = None

    def kind(self) -> str:
        set_fields = [k for k in ("trajectory", "video", "image") if getattr(self, k)]
        if len(set_fields) != 1:
            raise ValidationError(f"input must set exactly one of trajectory/video/image, got {set_fields}")
        return set_fields[0]


class CoefficientsModel(BaseModel):
    alpha: float = -1.0
    beta: float = 1.0
    gamma: float = 1.0
    zeta: float = 0.5
    use_rigid: bool = True
    use_pose: bool = True
    use_local: bool = True
    rigid_source: str = "driving"
    pose_source: str = "driving"
    local_source: str = "driving"
    literal_baseline: bool = False

    def to_coeffs(self) -> BlendCoefficients:
        return BlendCoefficients(
            alpha=self.alpha,
            beta=self.beta,
            gamma=self.gamma,
            zeta=self.zeta,
            use_rigid=self.use_rigid,
            use_pose=self.use_pose,
            use_local=self.use_local,
            rigid_source=MotionSource(self.rigid_source),
            pose_source=MotionSource(self.pose_source),
            local_source=MotionSource(self.local_source),
        )


class PoseMatchModel(BaseModel):
    optimized_layers: tuple[int, int] = (0, 8)
    pose_weight: float = 2.0
    identity_weight: float = 0.04
    max_steps: int = 60
    step_size: float = 0.1
    tolerance: float = 1e-5
    anchor_frame: int = 0

    def to_config(self) -> PoseMatchConfig:
        return PoseMatchConfig(
            optimized_layers=tuple(self.optimized_layers),
            pose_weight=self.pose_weight,
            identity_weight=self.identity_weight,
            max_steps=self.max_steps,
            step_size=self.step_size,
            tolerance=self.tolerance,
        )


class MiningModel(BaseModel):
    catalog: str | None = None
    probes: int = 8
    t_fg: float = 0.3
    t_bg: float = 0.1
    binarize_threshold: float = 0.5
    bg_direction: Literal["exclude", "literal"] = "exclude"


class OutputModel(BaseModel):
    video: str | None = "out.mp4"
    frames: bool = True


class EvalModel(BaseModel):
    enabled: bool = False
    protocol: bool = False
    normalization: Literal["frame", "interocular"] = "frame"


class SessionConfig(BaseModel):
    seed: int = 0
    reference: InputRef
    driving: InputRef
    codriving: InputRef | None = None
    rigid_track: str | None = None
    rigid_kernel: int = 3
    align_policy: Literal["abort", "interpolate"] = "abort"
    generator: BackendRef = Field(default_factory=lambda: BackendRef(name="toy"))
    projector: BackendRef = Field(default_factory=lambda: BackendRef(name="synthetic"))
    landmarker: BackendRef = Field(default_factory=lambda: BackendRef(name="synthetic"))
    pose_backend: BackendRef = Field(default_factory=lambda: BackendRef(name="linear"))
    segmenter: BackendRef = Field(default_factory=lambda: BackendRef(name="rectangles"))
    embedder: BackendRef = Field(default_factory=lambda: BackendRef(name="blockmean"))
    coefficients: CoefficientsModel = Field(default_factory=CoefficientsModel)
    pose_match: PoseMatchModel = Field(default_factory=PoseMatchModel)
    mining: MiningModel = Field(default_factory=MiningModel)
    output: OutputModel = Field(default_factory=OutputModel)
    evaluation: EvalModel = Field(default_factory=EvalModel)

    @staticmethod
    def from_json(text: str) -> "SessionConfig":
        return SessionConfig.model_validate(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True)

    def validate_paths(self, base: Path) -> None:
        """Check that every referenced file exists; errors name the field."""
        def check(field: str, ref: str | None):
            if ref is not None and not _resolve_path(base, ref).exists():
                raise ValidationError(f"missing file for {field}: {ref}", field=field)

        for name, inp in (("reference", self.reference), ("driving", self.driving),
                          ("codriving", self.codriving)):
            if inp is None:
                continue
            kind = inp.kind()
            check(f"{name}.{kind}", getattr(inp, kind))
        check("rigid_track", self.rigid_track)
        check("generator.checkpoint", self.generator.checkpoint)
        check("generator.finetuned", self.generator.finetuned)
        if self.mining.catalog:
            check("mining.catalog", self.mining.catalog)
        if "trajectory" in self.projector.params:
            check("projector.trajectory", self.projector.params["trajectory"])


# -- ingestion and alignment --------------------------------------------------


def ingest_video(path, fps_policy: float | None = None) -> tuple[list[np.ndarray], float]:
    """Frames + fps from a video file, a directory of PNGs, or a single image."""
    p = Path(path)
    if p.is_dir():
        frames, fps = imgio.read_frames_dir(p), 30.0
    elif p.suffix.lower() in imgio.IMAGE_EXTENSIONS:
        frames, fps = [imgio.load_image(p)], 30.0
    else:
        frames, fps = imgio.read_video(p)
    if fps_policy is not None and fps_policy > 0 and abs(fps_policy - fps) > 1e-9:
        step = fps / fps_policy
        picks = [min(int(round(i * step)), len(frames) - 1) for i in range(int(len(frames) / step))]
        frames = [frames[i] for i in picks] or frames[:1]
        fps = fps_policy
    return frames, fps


def _warp_to_canonical(frame: np.ndarray, params, midpoint) -> np.ndarray:
    import cv2

    from .rigid import rotation_matrix

    h, w = frame.shape[:2]
    mid = np.array([midpoint[0] * w, midpoint[1] * h])
    t = np.array([params.t_x * w, params.t_y * h])
    rot = rotation_matrix(params.r)
    offset = mid + t - rot @ mid
    m = np.concatenate([rot, offset[:, None]], axis=1)
    return cv2.warpAffine(
        frame, m.astype(np.float64), (w, h),
        flags=cv2.INTER_LINEAR | cv2.WARP_INVERSE_MAP,
        borderMode=cv2.BORDER_REPLICATE,
    )


def canonical_align(
    frames: Sequence[np.ndarray],
    landmarker,
    *,
    canonical_midpoint=CANONICAL_MIDPOINT,
    kernel: int = 3,
    fps: float = 30.0,
    policy: Literal["abort", "interpolate"] = "abort",
) -> tuple[list[np.ndarray], RigidTrack]:
    """Warp frames to the canonical crop; the returned track records the
    removed rigid motion, mean-filtered with the given kernel (0 = raw)."""
    rows: list[np.ndarray | None] = []
    for idx, frame in enumerate(frames):
        try:
            lm = landmarker.detect_landmarks(frame)
            p = rigid_from_landmarks(lm, canonical_midpoint)
            rows.append(np.array([p.t_x, p.t_y, p.r]))
        except DetectionError:
            if policy == "abort":
                raise DetectionError(f"no face in frame {idx}")
            rows.append(None)
    known = [i for i, r in enumerate(rows) if r is not None]
    if not known:
        raise DetectionError("no face found in any frame")
    arr = np.zeros((len(rows), 3))
    for k in range(3):
        vals = [rows[i][k] for i in known]
        arr[:, k] = np.interp(np.arange(len(rows)), known, vals)
    from .types import RigidParams

    track = RigidTrack(tuple(RigidParams(*row) for row in arr), fps=fps)
    if kernel:
        track = smooth_track(track, kernel)
    aligned = [
        _warp_to_canonical(f, p, canonical_midpoint) for f, p in zip(frames, track.params)
    ]
    return aligned, track


# -- session running -----------------------------------------------------------


@dataclass
class SessionResult:
    session_dir: Path
    frames: list[np.ndarray]
    reports: list[MetricReport] = dc_field(default_factory=list)
    video_path: Path | None = None
    manifest: dict = dc_field(default_factory=dict)


def _resolve_path(base: Path, ref: str) -> Path:
    p = Path(ref)
    if p.is_absolute():
        return p
    if (base / p).exists():
        return base / p
    cache = os.environ.get(CACHE_ENV)
    if cache and (Path(cache) / p).exists():
        return Path(cache) / p
    return base / p


def _build_generators(cfg: SessionConfig, base: Path) -> tuple[GeneratorBackend, GeneratorBackend]:
    """(original, render) pair; they differ only when fine-tuned weights are given."""
    ref = cfg.generator
    if ref.name == "toy":
        spec_fields = dict(ref.spec or {})
        spec_fields.setdefault("seed", cfg.seed)
        if "channel_widths" in spec_fields:
            spec_fields["channel_widths"] = tuple(spec_fields["channel_widths"])
        backend = ToyGenerator(GeneratorSpec(**spec_fields))
        return backend, backend
    if ref.name == "file":
        if not ref.checkpoint:
            raise ValidationError("generator.checkpoint required", field="generator.checkpoint")
        original = load_pretrained(_resolve_path(base, ref.checkpoint))
        if ref.finetuned:
            render = load_pretrained(
                _resolve_path(base, ref.checkpoint), _resolve_path(base, ref.finetuned)
            )
        else:
            render = original
        return original, render
    raise ValidationError(f"unknown generator backend {ref.name!r}", field="generator.name")


def _load_input(
    cfg: SessionConfig, inp: InputRef, base: Path, role: str
) -> tuple[LatentTrajectory, list[np.ndarray] | None, float]:
    kind = inp.kind()
    if kind == "trajectory":
        traj = load_trajectory(_resolve_path(base, inp.trajectory))
        return traj, None, traj.fps
    frames, fps = ingest_video(_resolve_path(base, getattr(inp, kind)))
    params = dict(cfg.projector.params)
    if "trajectory" in params:
        params["trajectory"] = str(_resolve_path(base, params["trajectory"]))
    projector = make_projector(cfg.projector.name, **params)
    traj = projector.project(frames, fps)
    return traj, frames, fps


class _Manifest:
    def __init__(self, path: Path, cfg: SessionConfig):
        self.path = path
        if path.exists():
            self.doc = json.loads(path.read_text())
        else:
            self.doc = {"version": 1, "config": cfg.model_dump(), "stages": {}}

    def done(self, stage: str, outputs: list[str]) -> None:
        self.doc["stages"][stage] = {"status": "done", "outputs": outputs}
        self.path.write_text(json.dumps(self.doc, indent=2, sort_keys=True))


@dataclass
class PreparedSession:
    """Everything a renderer needs after the non-render stages have run."""

    cfg: SessionConfig
    session_dir: Path
    base: Path
    original: GeneratorBackend
    renderer: GeneratorBackend
    landmarker: object
    pose_reg: object
    segmenter: object
    embedder: object
    reference: LatentTrajectory
    driving: LatentTrajectory
    codriving: LatentTrajectory | None
    w_ref_pose: LatentWPlus
    catalog: ChannelCatalog
    tracks: dict[str, RigidTrack]
    coeffs: BlendCoefficients
    manifest: _Manifest

    @property
    def frame_count(self) -> int:
        return self.driving.frame_count


def _locked(sdir: Path):
    lock = sdir / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
    except FileExistsError:
        raise SessionBusyError(f"session directory {sdir} is locked by another writer")
    return lock


def prepare_session(cfg: SessionConfig, session_dir, base_dir=None) -> PreparedSession:
    """Run ingest/align/project/pose/catalog stages, persisting each output."""
    base = Path(base_dir) if base_dir else Path.cwd()
    sdir = Path(session_dir)
    sdir.mkdir(parents=True, exist_ok=True)
    cfg.validate_paths(base)
    manifest = _Manifest(sdir / "manifest.json", cfg)

    coeffs = cfg.coefficients.to_coeffs()
    original, renderer = _build_generators(cfg, base)
    landmarker = make_landmarker(cfg.landmarker.name, **cfg.landmarker.params)
    pose_reg = make_pose_regressor(cfg.pose_backend.name, **cfg.pose_backend.params)
    seg_params = dict(cfg.segmenter.params)
    seg_params.setdefault("output_size", renderer.image_size)
    segmenter = make_segmenter(cfg.segmenter.name, **seg_params)
    embedder = make_embedder(cfg.embedder.name, **cfg.embedder.params)

    # stage: inputs
    tdir = sdir / "trajectories"
    tdir.mkdir(exist_ok=True)
    source_frames: dict[str, list[np.ndarray] | None] = {}
    trajectories: dict[str, LatentTrajectory] = {}
    try:
        for role, inp in (("reference", cfg.reference), ("driving", cfg.driving),
                          ("codriving", cfg.codriving)):
            if inp is None:
                continue
            out = tdir / f"{role}.traj"
            if out.exists():
                trajectories[role] = load_trajectory(out)
                source_frames[role] = None
            else:
                traj, frames, _fps = _load_input(cfg, inp, base, role)
                trajectories[role] = traj
                source_frames[role] = frames
                save_trajectory(traj, out)
    except Exception as exc:
        raise StageError("inputs", str(exc)) from exc
    manifest.done("inputs", sorted(p.name for p in tdir.glob("*.traj")))

    reference = trajectories["reference"]
    driving = trajectories["driving"]
    codriving = trajectories.get("codriving")
    if reference.layer_count != renderer.layer_count:
        raise StageError("inputs", f"reference has {reference.layer_count} layers, "
                                   f"generator expects {renderer.layer_count}")
    w_ref = reference.frames[0]

    # stage: rigid
    rdir = sdir / "rigid"
    rdir.mkdir(exist_ok=True)
    tracks: dict[str, RigidTrack] = {}
    try:
        for role in ("driving", "codriving"):
            out = rdir / f"{role}.json"
            if out.exists():
                tracks[role] = RigidTrack.from_json(out.read_text())
                continue
            track = None
            if cfg.rigid_track and role == coeffs.rigid_source.value:
                track = RigidTrack.from_json(_resolve_path(base, cfg.rigid_track).read_text())
                if cfg.rigid_kernel:
                    track = smooth_track(track, cfg.rigid_kernel)
            elif source_frames.get(role):
                _, track = canonical_align(
                    source_frames[role], landmarker,
                    kernel=cfg.rigid_kernel, policy=cfg.align_policy,
                    fps=trajectories[role].fps,
                )
            if track is not None:
                tracks[role] = track
                out.write_text(track.to_json())
    except Exception as exc:
        raise StageError("rigid", str(exc)) from exc
    manifest.done("rigid", sorted(p.name for p in rdir.glob("*.json")))

    # stage: pose (optimized against the original generator; a fine-tuned
    # generator, when present, is used for synthesis only)
    pdir = sdir / "pose"
    pdir.mkdir(exist_ok=True)
    pose_out = pdir / "reference_pose.traj"
    try:
        if pose_out.exists():
            w_ref_pose = load_trajectory(pose_out).frames[0]
        else:
            pose_traj = {MotionSource.DRIVING: driving, MotionSource.CODRIVING: codriving}.get(
                coeffs.pose_source
            )
            if coeffs.use_pose and pose_traj is not None:
                anchor = pose_traj.frames[cfg.pose_match.anchor_frame]
                target = pose_of_frame(original, pose_reg, anchor)
                w_ref_pose = match_pose(original, pose_reg, w_ref, target, cfg.pose_match.to_config())
            else:
                w_ref_pose = w_ref
            save_trajectory(
                LatentTrajectory((w_ref_pose,), source_id="reference_pose", fps=reference.fps),
                pose_out,
            )
    except Exception as exc:
        raise StageError("pose", str(exc)) from exc
    manifest.done("pose", [pose_out.name])

    # stage: catalog
    cat_out = sdir / "catalog.json"
    try:
        if cat_out.exists():
            catalog = ChannelCatalog.from_json(cat_out.read_text())
        elif cfg.mining.catalog:
            catalog = ChannelCatalog.from_json(_resolve_path(base, cfg.mining.catalog).read_text())
            cat_out.write_text(catalog.to_json())
        else:
            rng = np.random.default_rng(cfg.seed)
            probes = [
                LatentWPlus(rng.normal(0.0, 1.0, size=(renderer.layer_count, 512)).astype(np.float32))
                for _ in range(cfg.mining.probes)
            ]
            catalog = mine_channels(
                renderer, segmenter, probes,
                t_fg=cfg.mining.t_fg, t_bg=cfg.mining.t_bg,
                binarize_threshold=cfg.mining.binarize_threshold,
                bg_direction=cfg.mining.bg_direction,
            )
            cat_out.write_text(catalog.to_json())
        catalog.validate_for(renderer)
    except Exception as exc:
        raise StageError("catalog", str(exc)) from exc
    manifest.done("catalog", [cat_out.name])

    return PreparedSession(
        cfg=cfg, session_dir=sdir, base=base,
        original=original, renderer=renderer,
        landmarker=landmarker, pose_reg=pose_reg, segmenter=segmenter, embedder=embedder,
        reference=reference, driving=driving, codriving=codriving,
        w_ref_pose=w_ref_pose, catalog=catalog, tracks=tracks, coeffs=coeffs,
        manifest=manifest,
    )


def run_session(cfg: SessionConfig, session_dir, base_dir=None) -> SessionResult:
    """Execute the full flow, persisting every intermediate under *session_dir*."""
    sdir = Path(session_dir)
    sdir.mkdir(parents=True, exist_ok=True)
    lock = _locked(sdir)
    try:
        prep = prepare_session(cfg, sdir, base_dir)
        return _render_and_eval(prep)
    finally:
        lock.unlink(missing_ok=True)


def _render_and_eval(prep: PreparedSession) -> SessionResult:
    cfg, sdir = prep.cfg, prep.session_dir
    renderer, driving, codriving = prep.renderer, prep.driving, prep.codriving
    coeffs = prep.coeffs

    fdir = sdir / "frames"
    styles_dir = sdir / "styles"
    video_path = sdir / cfg.output.video if cfg.output.video else None
    try:
        blend_inputs = video_blend_inputs(
            prep.w_ref_pose, driving, prep.catalog, coeffs,
            codriving=codriving, literal_baseline=cfg.coefficients.literal_baseline,
        )
        rigid = prep.tracks.get(coeffs.rigid_source.value) if coeffs.use_rigid else None
        expected = [fdir / f"frame_{j:05d}.png" for j in range(driving.frame_count)]
        if fdir.exists() and all(p.exists() for p in expected):
            frames = [imgio.load_image(p) for p in expected]
        else:
            fdir.mkdir(exist_ok=True)
            styles_dir.mkdir(exist_ok=True)
            frames = render_video(renderer, blend_inputs, rigid)
            for j, img in enumerate(frames):
                imgio.save_png(img, expected[j])
            from .blend import blend_frame

            per_layer: dict[int, list[np.ndarray]] = {l: [] for l in range(renderer.layer_count)}
            for inp in blend_inputs:
                s = blend_frame(renderer, inp)
                for l in range(renderer.layer_count):
                    per_layer[l].append(s.layer(l))
            for l, rows in per_layer.items():
                np.save(styles_dir / f"layer_{l:02d}.npy", np.stack(rows))
            if video_path is not None and not imgio.write_video(frames, video_path, driving.fps):
                video_path = None
    except StageError:
        raise
    except Exception as exc:
        raise StageError("render", str(exc)) from exc
    prep.manifest.done("render", [p.name for p in expected])

    reports: list[MetricReport] = []
    if cfg.evaluation.enabled:
        mdir = sdir / "metrics"
        mdir.mkdir(exist_ok=True)
        try:
            fwd_path, rev_path = mdir / "forward.json", mdir / "reverse.json"
            if fwd_path.exists() and (rev_path.exists() or not cfg.evaluation.protocol):
                reports = [MetricReport.from_json(fwd_path.read_text())]
                if rev_path.exists():
                    reports.append(MetricReport.from_json(rev_path.read_text()))
            else:
                reports = _evaluate(
                    cfg, renderer, prep.embedder, prep.w_ref_pose, driving, codriving,
                    prep.catalog, coeffs, prep.tracks,
                    [imgio.load_image(p) for p in expected],
                )
                fwd_path.write_text(reports[0].to_json())
                if len(reports) > 1:
                    rev_path.write_text(reports[1].to_json())
        except Exception as exc:
            raise StageError("eval", str(exc)) from exc
        prep.manifest.done("eval", sorted(p.name for p in mdir.glob("*.json")))

    return SessionResult(
        session_dir=sdir,
        frames=[imgio.load_image(p) for p in expected],
        reports=reports,
        video_path=video_path if (video_path and video_path.exists()) else None,
        manifest=prep.manifest.doc,
    )


def _quantized(frames: list[np.ndarray]) -> list[np.ndarray]:
    return [imgio.from_uint8(imgio.to_uint8(f)) for f in frames]


def _evaluate(
    cfg: SessionConfig,
    renderer: GeneratorBackend,
    embedder,
    w_ref_pose: LatentWPlus,
    driving: LatentTrajectory,
    codriving: LatentTrajectory | None,
    catalog: ChannelCatalog,
    coeffs: BlendCoefficients,
    tracks: dict[str, RigidTrack],
    forward_frames: list[np.ndarray],
) -> list[MetricReport]:
    """Score the session; with protocol enabled, also the reversed-driving run.

    Frames are compared in their persisted (quantized) form so that fresh and
    resumed runs produce identical reports.
    """
    grid = CentroidGridLandmarker()
    ref_image = _quantized([renderer.render_wplus(w_ref_pose).image])[0]
    target_renders = _quantized(
        [renderer.render_wplus(f).image for f in driving.frames]
    )

    def render_edit(reverse: bool) -> list[np.ndarray]:
        if not reverse:
            return forward_frames
        drv = driving.reversed()
        cod = codriving
        blend_inputs = video_blend_inputs(
            w_ref_pose, drv, catalog, coeffs, codriving=cod,
            literal_baseline=cfg.coefficients.literal_baseline,
        )
        rigid = tracks.get(coeffs.rigid_source.value) if coeffs.use_rigid else None
        if rigid is not None and coeffs.rigid_source == MotionSource.DRIVING:
            rigid = RigidTrack(tuple(reversed(rigid.params)), fps=rigid.fps)
        return _quantized(render_video(renderer, blend_inputs, rigid))

    def targets(reverse: bool):
        imgs = list(reversed(target_renders)) if reverse else target_renders
        return [grid.detect_landmarks(f) for f in imgs]

    session = ProtocolSession(
        render=render_edit,
        targets=targets,
        landmarker=grid,
        embedder=embedder,
        ref_image=ref_image,
        normalization=cfg.evaluation.normalization,
    )
    if cfg.evaluation.protocol:
        fwd, rev = consistency_protocol(session)
        return [fwd, rev]
    from .metrics import embed_frames, fid, keypoint_distance

    pred = [grid.detect_landmarks(f) for f in forward_frames]
    dk_x, dk_y = keypoint_distance(pred, targets(False), cfg.evaluation.normalization)
    feats = embed_frames(embedder, forward_frames)
    ref_emb = embedder.embed_face(ref_image)
    report = MetricReport(
        dk_x=dk_x,
        dk_y=dk_y,
        id=float(np.linalg.norm(feats - ref_emb.vector, axis=1).mean()),
        fid=fid(feats, embed_frames(embedder, target_renders)),
        direction="forward",
        normalization=cfg.evaluation.normalization,
    )
    return [report]
