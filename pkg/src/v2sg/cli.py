"""Command-line interface: align, project, pose-match, mine-channels, render,
eval, run (full session), and serve (studio HTTP service)."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import imgio
from .backend import load_pretrained
from .container import load_trajectory, save_trajectory
from .errors import V2sgError
from .metrics import embed_frames, fid, identity_distance, keypoint_distance
from .mining import ChannelCatalog, mine_channels
from .perception import (
    BlockMeanEmbedder,
    CentroidGridLandmarker,
    make_landmarker,
    make_pose_regressor,
    make_segmenter,
)
from .pipeline import SessionConfig, canonical_align, ingest_video, run_session
from .pose import PoseMatchConfig, match_pose, pose_of_frame
from .types import LatentTrajectory, LatentWPlus

log = logging.getLogger("v2sg")


@click.group()
@click.option("--log-level", default="warning", show_default=True,
              type=click.Choice(["debug", "info", "warning", "error"]))
def cli(log_level: str):
    logging.basicConfig(level=getattr(logging, log_level.upper()), format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--video", "video_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--landmarker", default="synthetic", show_default=True)
@click.option("--kernel", default=3, show_default=True)
@click.option("--policy", default="abort", type=click.Choice(["abort", "interpolate"]))
def align(video_path, out_dir, landmarker, kernel, policy):
    """Warp a face video to the canonical crop and record its rigid track."""
    frames, fps = ingest_video(video_path)
    aligned, track = canonical_align(
        frames, make_landmarker(landmarker), kernel=kernel, fps=fps, policy=policy
    )
    out = Path(out_dir)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    for j, f in enumerate(aligned):
        imgio.save_png(f, out / "frames" / f"frame_{j:05d}.png")
    (out / "rigid.json").write_text(track.to_json())
    click.echo(f"aligned {len(aligned)} frames -> {out}")


@cli.command()
@click.option("--video", "video_path", required=True, type=click.Path(exists=True))
@click.option("--backend", default="synthetic", show_default=True)
@click.option("--trajectory", type=click.Path(exists=True),
              help="known codes for the synthetic projector")
@click.option("--out", "out_path", required=True, type=click.Path())
def project(video_path, backend, trajectory, out_path):
    """Project video frames into the latent space via a projector backend."""
    from .projector import make_projector

    frames, fps = ingest_video(video_path)
    kwargs = {"trajectory": trajectory} if trajectory else {}
    traj = make_projector(backend, **kwargs).project(frames, fps)
    save_trajectory(traj, out_path)
    click.echo(f"projected {traj.frame_count} frames -> {out_path}")


@cli.command("pose-match")
@click.option("--ref", "ref_path", required=True, type=click.Path(exists=True))
@click.option("--driving", "driving_path", required=True, type=click.Path(exists=True))
@click.option("--generator", "generator_path", required=True, type=click.Path())
@click.option("--anchor-frame", default=0, show_default=True)
@click.option("--pose-weight", default=2.0, show_default=True)
@click.option("--id-weight", default=0.04, show_default=True)
@click.option("--max-steps", default=60, show_default=True)
@click.option("--step-size", default=0.1, show_default=True)
@click.option("--layers", default="0:8", show_default=True, help="optimized layer range start:stop")
@click.option("--pose-backend", default="linear", show_default=True)
@click.option("--pose-seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def pose_match_cmd(ref_path, driving_path, generator_path, anchor_frame, pose_weight,
                   id_weight, max_steps, step_size, layers, pose_backend, pose_seed, out_path):
    """Optimize the reference pose layers toward a driving anchor frame."""
    backend = load_pretrained(generator_path)
    ref = load_trajectory(ref_path)
    driving = load_trajectory(driving_path)
    pose_reg = make_pose_regressor(pose_backend, seed=pose_seed)
    start, stop = (int(v) for v in layers.split(":"))
    cfg = PoseMatchConfig(
        optimized_layers=(start, stop), pose_weight=pose_weight,
        identity_weight=id_weight, max_steps=max_steps, step_size=step_size,
    )
    target = pose_of_frame(backend, pose_reg, driving.frames[anchor_frame])
    matched = match_pose(backend, pose_reg, ref.frames[0], target, cfg)
    save_trajectory(LatentTrajectory((matched,), source_id="pose_matched", fps=ref.fps), out_path)
    click.echo(f"pose-matched code -> {out_path}")


@cli.command("mine-channels")
@click.option("--generator", "generator_path", required=True, type=click.Path())
@click.option("--segmenter", default="rectangles", show_default=True)
@click.option("--probes", default=32, show_default=True)
@click.option("--tfg", default=0.3, show_default=True)
@click.option("--tbg", default=0.1, show_default=True)
@click.option("--binarize-threshold", default=0.5, show_default=True)
@click.option("--iou-bg-direction", default="exclude", type=click.Choice(["exclude", "literal"]),
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def mine_channels_cmd(generator_path, segmenter, probes, tfg, tbg, binarize_threshold,
                      iou_bg_direction, seed, out_path):
    """Mine S-space channels for eyes/nose/mouth and write the catalog JSON."""
    backend = load_pretrained(generator_path)
    seg = make_segmenter(segmenter, output_size=backend.image_size)
    rng = np.random.default_rng(seed)
    probe_codes = [
        LatentWPlus(rng.normal(0.0, 1.0, size=(backend.layer_count, 512)).astype(np.float32))
        for _ in range(probes)
    ]
    catalog = mine_channels(
        backend, seg, probe_codes, t_fg=tfg, t_bg=tbg,
        binarize_threshold=binarize_threshold, bg_direction=iou_bg_direction,
    )
    Path(out_path).write_text(catalog.to_json())
    click.echo(f"{len(catalog.entries)} entries -> {out_path}")


@cli.command()
@click.option("--ref", "ref_path", required=True, type=click.Path(exists=True))
@click.option("--driving", "driving_path", required=True, type=click.Path(exists=True))
@click.option("--codriving", "codriving_path", type=click.Path(exists=True))
@click.option("--generator", "generator_path", type=click.Path(),
              help="generator checkpoint; omit for the seeded toy generator")
@click.option("--channels", "channels_path", type=click.Path(exists=True))
@click.option("--alpha", default=-1.0, show_default=True)
@click.option("--beta", default=1.0, show_default=True)
@click.option("--gamma", default=1.0, show_default=True)
@click.option("--zeta", default=0.5, show_default=True)
@click.option("--rigid-source", default="driving", type=click.Choice(["driving", "codriving", "none"]))
@click.option("--pose-source", default="driving", type=click.Choice(["driving", "codriving", "none"]))
@click.option("--local-source", default="driving", type=click.Choice(["driving", "codriving", "none"]))
@click.option("--rigid-track", type=click.Path(exists=True))
@click.option("--kernel", default=3, show_default=True)
@click.option("--literal-eq7", is_flag=True, help="use the single backward-difference baseline")
@click.option("--seed", default=0, show_default=True)
@click.option("--session-dir", type=click.Path(), default=None)
@click.option("--out", "out_video", default="out.mp4", show_default=True)
@click.option("--frames-dir", is_flag=True, help="keep lossless per-frame PNG dumps")
def render(ref_path, driving_path, codriving_path, generator_path, channels_path,
           alpha, beta, gamma, zeta, rigid_source, pose_source, local_source,
           rigid_track, kernel, literal_eq7, seed, session_dir, out_video, frames_dir):
    """Render a reenactment video from trajectories and a channel catalog."""
    cfg = SessionConfig.model_validate({
        "seed": seed,
        "reference": _input_ref(ref_path),
        "driving": _input_ref(driving_path),
        "codriving": _input_ref(codriving_path) if codriving_path else None,
        "rigid_track": rigid_track,
        "rigid_kernel": kernel,
        "generator": {"name": "file", "checkpoint": generator_path} if generator_path
                     else {"name": "toy"},
        "mining": {"catalog": channels_path},
        "coefficients": {
            "alpha": alpha, "beta": beta, "gamma": gamma, "zeta": zeta,
            "rigid_source": rigid_source, "pose_source": pose_source,
            "local_source": local_source,
            "use_rigid": rigid_source != "none",
            "use_pose": pose_source != "none",
            "use_local": local_source != "none",
            "literal_baseline": literal_eq7,
        },
        "output": {"video": Path(out_video).name, "frames": True},
    })
    sdir = Path(session_dir) if session_dir else Path(out_video).with_suffix(".session")
    result = run_session(cfg, sdir)
    if result.video_path:
        target = Path(out_video)
        if target.resolve() != result.video_path.resolve():
            target.write_bytes(result.video_path.read_bytes())
        click.echo(f"video -> {target}")
    else:
        click.echo("video encoder unavailable; frames kept as PNG")
    if frames_dir:
        click.echo(f"frames -> {result.session_dir / 'frames'}")


def _input_ref(path: str) -> dict:
    p = Path(path)
    if p.suffix == ".traj":
        return {"trajectory": str(p)}
    if p.suffix.lower() in imgio.IMAGE_EXTENSIONS:
        return {"image": str(p)}
    return {"video": str(p)}


def _load_frames(path: str) -> list[np.ndarray]:
    frames, _ = ingest_video(path)
    return frames


@cli.command("eval")
@click.option("--metric", required=True, type=click.Choice(["kpd", "id", "fid", "protocol"]))
@click.option("--pred", "pred_path", type=click.Path(exists=True))
@click.option("--ref", "ref_path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="session config (protocol metric only)")
@click.option("--session-dir", type=click.Path(), default="protocol.session")
@click.option("--normalization", default="frame", type=click.Choice(["frame", "interocular"]))
@click.option("--landmarker", default="grid", show_default=True)
@click.option("--report", "report_path", type=click.Path())
def eval_cmd(metric, pred_path, ref_path, config_path, session_dir, normalization,
             landmarker, report_path):
    """Score rendered frames against a reference video/image."""
    out: dict
    if metric == "protocol":
        if not config_path:
            raise click.UsageError("--config is required for the protocol metric")
        cfg = SessionConfig.from_json(Path(config_path).read_text())
        cfg.evaluation.enabled = True
        cfg.evaluation.protocol = True
        result = run_session(cfg, session_dir, base_dir=Path(config_path).parent)
        out = {r.direction: json.loads(r.to_json()) for r in result.reports}
    else:
        if not (pred_path and ref_path):
            raise click.UsageError("--pred and --ref are required")
        pred_frames = _load_frames(pred_path)
        lm = CentroidGridLandmarker() if landmarker == "grid" else make_landmarker(landmarker)
        embedder = BlockMeanEmbedder()
        if metric == "kpd":
            ref_frames = _load_frames(ref_path)
            dk_x, dk_y = keypoint_distance(
                [lm.detect_landmarks(f) for f in pred_frames],
                [lm.detect_landmarks(f) for f in ref_frames],
                normalization,
            )
            out = {"dk_x": dk_x, "dk_y": dk_y, "normalization": normalization}
        elif metric == "id":
            ref_img = _load_frames(ref_path)[0]
            value = identity_distance(embedder, embedder.embed_face(ref_img), pred_frames)
            out = {"id": value}
        else:
            ref_frames = _load_frames(ref_path)
            value = fid(embed_frames(embedder, pred_frames), embed_frames(embedder, ref_frames))
            out = {"fid": value}
    text = json.dumps(out, indent=2, sort_keys=True)
    if report_path:
        Path(report_path).write_text(text)
    click.echo(text)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--session-dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="override the config seed")
def run(config_path, session_dir, seed):
    """Run a full session from a JSON config."""
    cfg = SessionConfig.from_json(Path(config_path).read_text())
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    result = run_session(cfg, session_dir, base_dir=Path(config_path).parent)
    click.echo(f"session -> {result.session_dir} ({len(result.frames)} frames)")
    for r in result.reports:
        click.echo(r.to_json())


@cli.command()
@click.option("--sessions-dir", default="sessions", show_default=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True)
def serve(sessions_dir, host, port):
    """Serve the studio HTTP API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(sessions_dir), host=host, port=port)


def main():
    try:
        cli(standalone_mode=True)
    except V2sgError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
