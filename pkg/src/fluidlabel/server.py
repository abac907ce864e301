"""Interactive annotation HTTP service.

Sessions hold an uploaded image, its cached superpixel map, the current
point annotations, and the latest generated pseudo-label/trust pair. All
artifact endpoints return the exact bytes the batch CLI would write for the
same inputs, so interactive and batch workflows can never disagree.

Routes (JSON unless noted):
  POST  /api/sessions                   upload a PGM or PNG, returns ids+dims
  PUT   /api/sessions/{id}/points       replace annotations, regenerate labels
  PATCH /api/sessions/{id}/config       merge config fields, invalidate caches
  GET   /api/sessions/{id}/label.pgm    pseudo-label (8-bit PGM)
  GET   /api/sessions/{id}/trust.fmap   trust map (float raster)
  GET   /api/sessions/{id}/superpixels.pgm  block ids (16-bit PGM)
  GET   /api/sessions/{id}/points.json  current annotations
  GET   /api/sessions/{id}/overlay.png  image + labels + block boundaries
"""

from __future__ import annotations

import io
import json
import secrets
import threading
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response

from .config import PipelineConfig
from .errors import FluidLabelError, ValidationError
from .formats import read_pgm, read_points, write_fmap, write_pgm, write_pgm16
from .overlay import render_overlay
from .pseudolabel import generate
from .rasters import GrayImage, LabelMap, PointAnnotationSet, TrustMap
from .superpixels import SuperpixelMap, slic

DEFAULT_MAX_DIM = 4096

# fields whose change forces a superpixel recomputation
_SLIC_FIELDS = {"region_size", "compactness", "iterations"}
# PATCH-level bounds; the similarity thresholds are capped at 1.0 here even
# though the config type itself admits larger growth-disabling values
_UNIT_RANGE_FIELDS = {
    "threshold_srf_irf", "threshold_ped", "trust_init", "trust_seed",
    "self_confidence_keep_fraction", "trust_gate",
}


@dataclass
class Session:
    image: GrayImage
    config: PipelineConfig
    points: PointAnnotationSet | None = None
    superpixels: SuperpixelMap | None = None
    result: tuple[LabelMap, TrustMap] | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class Generator:
    """Runs label generation synchronously within the request, bounded by a
    timeout. Work happens on a snapshot and results are committed only on
    success, so a timed-out request leaves the session untouched."""

    def __init__(self, timeout: float):
        self.timeout = timeout
        self._pool = ThreadPoolExecutor(max_workers=4)

    def _bounded(self, task):
        future = self._pool.submit(task)
        try:
            return future.result(timeout=self.timeout)
        except FutureTimeout:
            raise HTTPException(
                503, f"label generation exceeded {self.timeout:g}s"
            ) from None

    def ensure_superpixels(self, session: Session) -> SuperpixelMap:
        if session.superpixels is None:
            cfg = session.config
            session.superpixels = self._bounded(
                lambda: slic(session.image, cfg.region_size,
                             cfg.compactness, cfg.iterations)
            )
        return session.superpixels

    def regenerate(self, session: Session) -> None:
        assert session.points is not None
        image, points, cfg = session.image, session.points, session.config
        spmap = self.ensure_superpixels(session)
        labels, trust, spmap = self._bounded(
            lambda: generate(
                image, points, cfg.growth(),
                region_size=cfg.region_size, compactness=cfg.compactness,
                iterations=cfg.iterations, spmap=spmap,
            )
        )
        session.superpixels = spmap
        session.result = (labels, trust)

    def ensure_result(self, session: Session) -> tuple[LabelMap, TrustMap]:
        if session.points is None:
            raise HTTPException(409, "no points submitted for this session yet")
        if session.result is None:
            self.regenerate(session)
        assert session.result is not None
        return session.result


def _decode_upload(body: bytes, max_dim: int) -> GrayImage:
    if not body:
        raise HTTPException(400, "empty upload body")
    try:
        image = read_pgm(body)
    except FluidLabelError:
        try:
            from PIL import Image

            with Image.open(io.BytesIO(body)) as img:
                image = GrayImage(np.asarray(img.convert("L")))
        except Exception:
            raise HTTPException(400, "body is not a decodable PGM or PNG image") from None
    if image.width > max_dim or image.height > max_dim:
        raise HTTPException(
            413,
            f"image is {image.width}x{image.height}; limit is {max_dim}x{max_dim}",
        )
    return image


def create_app(
    config: PipelineConfig | None = None,
    ui_dir: str | None = None,
    max_dim: int = DEFAULT_MAX_DIM,
    session_dir: str | None = None,
    gen_timeout: float = 60.0,
) -> FastAPI:
    """Build the service.

    session_dir, when given, mirrors each session's canonical artifacts into
    <session_dir>/<id>/ after every successful points update so batch tools
    can read live sessions; the store itself stays in memory (a restarted
    server forgets all session ids).
    """
    base_config = config or PipelineConfig()
    app = FastAPI(title="fluidlabel annotation service")
    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()
    generator = Generator(gen_timeout)
    app.state.sessions = sessions

    def persist(session_id: str, session: Session) -> None:
        if session_dir is None:
            return
        from pathlib import Path

        from .formats import write_points

        root = Path(session_dir) / session_id
        root.mkdir(parents=True, exist_ok=True)
        (root / "image.pgm").write_bytes(write_pgm(session.image))
        if session.points is not None:
            (root / "points.json").write_text(write_points(session.points))
        if session.superpixels is not None:
            (root / "superpixels.pgm").write_bytes(
                write_pgm16(session.superpixels.assignment)
            )
        if session.result is not None:
            labels, trust = session.result
            (root / "label.pgm").write_bytes(write_pgm(labels))
            (root / "trust.fmap").write_bytes(write_fmap(trust))

    def get_session(session_id: str) -> Session:
        with store_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return session

    @app.post("/api/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.body()
        image = _decode_upload(body, max_dim)
        session_id = secrets.token_hex(8)
        with store_lock:
            sessions[session_id] = Session(image=image, config=base_config)
        return {"session_id": session_id, "width": image.width, "height": image.height}

    @app.put("/api/sessions/{session_id}/points")
    async def put_points(session_id: str, request: Request):
        session = get_session(session_id)
        body = await request.body()
        try:
            points = read_points(body)
        except FluidLabelError as exc:
            raise HTTPException(422, str(exc)) from exc
        with session.lock:
            w, h = session.image.width, session.image.height
            for x, y, _ in points.points:
                if not (0 <= x < w and 0 <= y < h):
                    raise HTTPException(
                        422, f"point ({x},{y}) lies outside the {w}x{h} image"
                    )
            for line in points.ped_polylines:
                for x, y in line:
                    if not (0 <= x < w and 0 <= y < h):
                        raise HTTPException(
                            422, f"polyline vertex ({x},{y}) lies outside the {w}x{h} image"
                        )
            previous = (session.points, session.result)
            session.points = points
            try:
                generator.regenerate(session)
            except FluidLabelError as exc:
                session.points, session.result = previous
                raise HTTPException(422, str(exc)) from exc
            labels, _ = session.result
            counts = labels.class_counts()
            persist(session_id, session)
        return {
            "labeled_counts": {
                str(c): int(counts[c]) for c in range(1, labels.num_classes)
            }
        }

    @app.patch("/api/sessions/{session_id}/config")
    async def patch_config(session_id: str, request: Request):
        session = get_session(session_id)
        body = await request.body()
        try:
            overrides = json.loads(body or b"{}")
        except json.JSONDecodeError as exc:
            raise HTTPException(422, f"malformed config document: {exc}") from exc
        if not isinstance(overrides, dict):
            raise HTTPException(422, "config document must be a JSON object")
        for key in _UNIT_RANGE_FIELDS & overrides.keys():
            value = overrides[key]
            if not isinstance(value, (int, float)) or isinstance(value, bool) \
                    or not 0.0 <= float(value) <= 1.0:
                raise HTTPException(422, f"config field {key!r} must lie in [0, 1]")
        with session.lock:
            try:
                new_config = session.config.merged(overrides)
            except FluidLabelError as exc:
                raise HTTPException(422, str(exc)) from exc
            if any(
                getattr(new_config, f) != getattr(session.config, f)
                for f in _SLIC_FIELDS
            ):
                session.superpixels = None
            session.config = new_config
            session.result = None  # regenerated on next read
            return session.config.to_dict()

    @app.get("/api/sessions/{session_id}/label.pgm")
    def get_label(session_id: str):
        session = get_session(session_id)
        with session.lock:
            labels, _ = generator.ensure_result(session)
            return Response(write_pgm(labels), media_type="image/x-portable-graymap")

    @app.get("/api/sessions/{session_id}/trust.fmap")
    def get_trust(session_id: str):
        session = get_session(session_id)
        with session.lock:
            _, trust = generator.ensure_result(session)
            return Response(write_fmap(trust), media_type="application/octet-stream")

    @app.get("/api/sessions/{session_id}/superpixels.pgm")
    def get_superpixels(session_id: str):
        session = get_session(session_id)
        with session.lock:
            spmap = generator.ensure_superpixels(session)
            return Response(
                write_pgm16(spmap.assignment), media_type="image/x-portable-graymap"
            )

    @app.get("/api/sessions/{session_id}/points.json")
    def get_points(session_id: str):
        from .formats import write_points

        session = get_session(session_id)
        with session.lock:
            points = session.points or PointAnnotationSet()
            return Response(write_points(points), media_type="application/json")

    @app.get("/api/sessions/{session_id}/overlay.png")
    def get_overlay(session_id: str):
        session = get_session(session_id)
        with session.lock:
            spmap = generator.ensure_superpixels(session)
            labels = None
            if session.points is not None:
                labels, _ = generator.ensure_result(session)
            png = render_overlay(session.image, spmap, labels)
            return Response(png, media_type="image/png")

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
