"""HTTP session service for the studio UI.

JSON over HTTP; frame renders are returned as lossless PNG bytes. GET
endpoints are side-effect free, PATCH/PUT are idempotent, and rendering under
a fixed session state is a pure function (repeated GETs return identical
bytes). One render runs per session at a time; concurrent requests get a
busy signal with a retry hint. Errors serialize as {code, message, field?}.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import imgio
from .blend import FrameBlendInput, render_frame
from .errors import SessionBusyError, V2sgError, ValidationError
from .pipeline import PreparedSession, SessionConfig, prepare_session
from .types import BlendCoefficients, SChannelAddress, StyleVector


class ParamsPatch(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    zeta: float | None = None
    use_rigid: bool | None = None
    use_pose: bool | None = None
    use_local: bool | None = None
    rigid_source: str | None = None
    pose_source: str | None = None
    local_source: str | None = None


class OverridePut(BaseModel):
    model_config = ConfigDict(extra="forbid")

    layer: int
    channel: int
    value: float | None = None


class ExportRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    start: int = 0
    stop: int | None = None
    video: bool = True


@dataclass
class ExportJob:
    id: str
    status: str = "running"  # running | done | failed
    progress: float = 0.0
    frame_count: int = 0
    result_path: str | None = None
    error: str | None = None


@dataclass
class LiveSession:
    id: str
    prep: PreparedSession
    coeffs: BlendCoefficients
    overrides: dict[SChannelAddress, float] = field(default_factory=dict)
    render_lock: threading.Lock = field(default_factory=threading.Lock)
    state_lock: threading.Lock = field(default_factory=threading.Lock)

    def coefficients_dict(self) -> dict:
        c = self.coeffs
        return {
            "alpha": c.alpha, "beta": c.beta, "gamma": c.gamma, "zeta": c.zeta,
            "use_rigid": c.use_rigid, "use_pose": c.use_pose, "use_local": c.use_local,
            "rigid_source": c.rigid_source.value,
            "pose_source": c.pose_source.value,
            "local_source": c.local_source.value,
        }

    def overrides_list(self) -> list[dict]:
        return [
            {"layer": a.layer, "channel": a.channel, "value": v}
            for a, v in sorted(self.overrides.items())
        ]

    def frame_style(self, j: int) -> StyleVector:
        from .blend import blend_frame

        return blend_frame(self.prep.renderer, self._blend_input(j))

    def _blend_input(self, j: int) -> FrameBlendInput:
        if not 0 <= j < self.prep.frame_count:
            raise ValidationError(f"frame {j} out of range [0, {self.prep.frame_count})")
        return FrameBlendInput(
            w_ref_pose=self.prep.w_ref_pose,
            driving=self.prep.driving,
            catalog=self.prep.catalog,
            coeffs=self.coeffs,
            frame_index=j,
            codriving=self.prep.codriving,
            literal_baseline=self.prep.cfg.coefficients.literal_baseline,
        )

    def render(self, j: int, size: int | None = None) -> np.ndarray:
        inp = self._blend_input(j)
        rigid = None
        if self.coeffs.use_rigid:
            track = self.prep.tracks.get(self.coeffs.rigid_source.value)
            if track is not None and j < len(track):
                rigid = track.params[j]
        img = render_frame(self.prep.renderer, inp, rigid, self.overrides)
        if size and size != img.shape[0]:
            img = cv2.resize(img, (size, size), interpolation=cv2.INTER_AREA)
        return img


def apply_overrides(s_final: StyleVector, overrides: dict[SChannelAddress, float]) -> StyleVector:
    """Replace blended values with manual absolute values; empty dict = identity."""
    if not overrides:
        return s_final
    return s_final.with_values(overrides)


def create_app(sessions_root, base_dir=None) -> FastAPI:
    root = Path(sessions_root)
    root.mkdir(parents=True, exist_ok=True)
    base = Path(base_dir) if base_dir else Path.cwd()
    app = FastAPI(title="v2sg studio service")
    sessions: dict[str, LiveSession] = {}
    jobs: dict[str, ExportJob] = {}
    app.state.sessions = sessions
    app.state.jobs = jobs

    def get_session(sid: str) -> LiveSession:
        if sid not in sessions:
            raise KeyError(sid)
        return sessions[sid]

    @app.exception_handler(KeyError)
    async def not_found(request: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"code": "not_found", "message": str(exc)})

    @app.exception_handler(SessionBusyError)
    async def busy(request: Request, exc: SessionBusyError):
        return JSONResponse(
            status_code=409,
            content={"code": "busy", "message": str(exc), "retry_after_ms": 100},
        )

    @app.exception_handler(ValidationError)
    async def invalid(request: Request, exc: ValidationError):
        body = {"code": "validation", "message": str(exc)}
        if exc.field:
            body["field"] = exc.field
        return JSONResponse(status_code=422, content=body)

    @app.exception_handler(V2sgError)
    async def toolkit_error(request: Request, exc: V2sgError):
        return JSONResponse(status_code=400, content={"code": "error", "message": str(exc)})

    @app.post("/sessions")
    def create_session(body: dict):
        cfg = SessionConfig.model_validate(body.get("config", body))
        sid = uuid.uuid4().hex[:12]
        prep = prepare_session(cfg, root / sid, base)
        sessions[sid] = LiveSession(id=sid, prep=prep, coeffs=prep.coeffs)
        return {"id": sid, "frame_count": prep.frame_count}

    @app.get("/sessions/{sid}")
    def session_state(sid: str):
        ls = get_session(sid)
        return {
            "id": ls.id,
            "status": "ready",
            "frame_count": ls.prep.frame_count,
            "image_size": ls.prep.renderer.image_size,
            "coefficients": ls.coefficients_dict(),
            "overrides": ls.overrides_list(),
        }

    @app.get("/sessions/{sid}/channels")
    def session_channels(sid: str):
        import json as _json

        return _json.loads(get_session(sid).prep.catalog.to_json())

    @app.patch("/sessions/{sid}/params")
    def patch_params(sid: str, body: ParamsPatch):
        ls = get_session(sid)
        with ls.state_lock:
            fields = ls.coefficients_dict()
            fields.update({k: v for k, v in body.model_dump().items() if v is not None})
            ls.coeffs = BlendCoefficients(**fields)  # re-validates zeta et al.
            return {"id": sid, "coefficients": ls.coefficients_dict()}

    @app.put("/sessions/{sid}/overrides")
    def put_override(sid: str, body: OverridePut):
        ls = get_session(sid)
        widths = ls.prep.renderer.channel_widths
        if not (0 <= body.layer < len(widths) and 0 <= body.channel < widths[body.layer]):
            raise ValidationError(f"invalid channel address ({body.layer}, {body.channel})")
        addr = SChannelAddress(body.layer, body.channel)
        with ls.state_lock:
            if body.value is None:
                ls.overrides.pop(addr, None)
            else:
                if not np.isfinite(body.value):
                    raise ValidationError("override value must be finite", field="value")
                ls.overrides[addr] = float(body.value)
            return {"id": sid, "overrides": ls.overrides_list()}

    @app.get("/sessions/{sid}/frames/{j}/render")
    def render(sid: str, j: int, size: int | None = None):
        ls = get_session(sid)
        if not ls.render_lock.acquire(blocking=False):
            raise SessionBusyError(f"render in flight for session {sid}")
        try:
            img = ls.render(j, size)
        finally:
            ls.render_lock.release()
        return Response(content=imgio.image_to_png_bytes(img), media_type="image/png")

    @app.get("/sessions/{sid}/frames/{j}/latents")
    def latents(sid: str, j: int):
        from .blend import LOCAL_LAYERS

        ls = get_session(sid)
        s = apply_overrides(ls.frame_style(j), ls.overrides)
        hi = min(LOCAL_LAYERS[1], ls.prep.renderer.layer_count)
        payload = {str(l): s.layer(l).tolist() for l in range(LOCAL_LAYERS[0], hi)}
        catalog_vals = [
            {"layer": a.layer, "channel": a.channel, "value": s[a]}
            for a in ls.prep.catalog.addresses()
        ]
        return {"frame": j, "style_layers": payload, "catalog": catalog_vals}

    @app.post("/sessions/{sid}/export")
    def export(sid: str, body: ExportRequest):
        ls = get_session(sid)
        stop = body.stop if body.stop is not None else ls.prep.frame_count
        if not (0 <= body.start < stop <= ls.prep.frame_count):
            raise ValidationError(f"bad export range [{body.start}, {stop})")
        job = ExportJob(id=uuid.uuid4().hex[:12])
        jobs[job.id] = job
        out_dir = ls.prep.session_dir / "exports" / job.id
        total = stop - body.start

        def work():
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
                frames = []
                for k, j in enumerate(range(body.start, stop)):
                    with ls.render_lock:
                        img = ls.render(j)
                    frames.append(img)
                    imgio.save_png(img, out_dir / f"frame_{j:05d}.png")
                    job.progress = (k + 1) / total
                if body.video:
                    imgio.write_video(frames, out_dir / "export.mp4", ls.prep.driving.fps)
                job.frame_count = total
                job.result_path = str(out_dir)
                job.status = "done"
            except Exception as exc:  # surfaced through the job status
                job.status = "failed"
                job.error = str(exc)

        threading.Thread(target=work, daemon=True).start()
        return {"job": job.id}

    @app.get("/jobs/{jid}")
    def job_state(jid: str):
        if jid not in jobs:
            raise KeyError(jid)
        j = jobs[jid]
        return {
            "id": j.id, "status": j.status, "progress": j.progress,
            "frame_count": j.frame_count, "result_path": j.result_path, "error": j.error,
        }

    return app
