"""HTTP review service for the human correction step of the
pseudo-labeling loop.

One curator browses pseudo-labeled images, fixes boxes, and saves.
Writes use optimistic concurrency: every image carries a revision
number, a PUT with a stale revision gets 409 and the client reloads.
Label files are rewritten atomically (temp file + rename) and every
save appends to an audit log, so a restart reads back exactly what was
acknowledged.
"""

from __future__ import annotations

import json
import mimetypes
import threading
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .dataset import REVIEW_STATES, DatasetManifest
from .labels import GroundTruthBox, write_labels


class BoxPayload(BaseModel):
    class_id: int = Field(ge=0)
    cx: float
    cy: float
    w: float
    h: float


class LabelsPayload(BaseModel):
    boxes: list[BoxPayload]
    revision: int
    state: str


class ReviewSession:
    """Mutable review state over one manifest; one writer per image."""

    def __init__(self, manifest_path, image_root=None):
        self.manifest_path = Path(manifest_path)
        self.manifest = DatasetManifest.load(self.manifest_path)
        self.image_root = Path(image_root) if image_root else None
        self.audit_path = self.manifest_path.with_suffix(".audit.jsonl")
        self._manifest_lock = threading.Lock()
        self._image_locks = [threading.Lock() for _ in self.manifest.entries]

    def entry(self, image_id: int):
        if not 0 <= image_id < len(self.manifest.entries):
            raise HTTPException(status_code=404, detail=f"unknown image id {image_id}")
        return self.manifest.entries[image_id]

    def resolve(self, path: str) -> Path:
        p = Path(path)
        if not p.is_absolute() and self.image_root:
            p = self.image_root / p
        return p

    def read_labels(self, image_id: int) -> list[dict]:
        entry = self.entry(image_id)
        path = self.resolve(entry.label_path)
        boxes = []
        if path.exists():
            for line in path.read_text().splitlines():
                if not line.strip():
                    continue
                cls, cx, cy, w, h = line.split()
                boxes.append({"class_id": int(cls), "cx": float(cx), "cy": float(cy),
                              "w": float(w), "h": float(h)})
        return boxes

    def save_labels(self, image_id: int, payload: LabelsPayload, reviewer: str) -> int:
        entry = self.entry(image_id)
        if payload.state not in ("accepted", "corrected"):
            raise HTTPException(status_code=422,
                                detail=f"state must be accepted or corrected, got {payload.state!r}")
        for b in payload.boxes:
            for v in (b.cx, b.cy, b.w, b.h):
                if not 0.0 <= v <= 1.0:
                    raise HTTPException(status_code=422,
                                        detail=f"coordinate {v} outside [0, 1]")
            if b.w <= 0 or b.h <= 0:
                raise HTTPException(status_code=422, detail="boxes need positive size")

        with self._image_locks[image_id]:
            if payload.revision != entry.revision:
                raise HTTPException(
                    status_code=409,
                    detail={"message": "stale revision", "revision": entry.revision})
            text = write_labels([
                GroundTruthBox(b.class_id, b.cx, b.cy, b.w, b.h) for b in payload.boxes
            ])
            path = self.resolve(entry.label_path)
            tmp = path.with_suffix(path.suffix + f".tmp{image_id}")
            tmp.write_text(text)
            tmp.replace(path)
            entry.revision += 1
            entry.state = payload.state
            with self._manifest_lock:
                self.manifest.save(self.manifest_path)
                with open(self.audit_path, "a") as fh:
                    fh.write(json.dumps({
                        "ts": time.time(), "reviewer": reviewer, "image_id": image_id,
                        "state": payload.state, "boxes": len(payload.boxes),
                        "revision": entry.revision,
                    }) + "\n")
            return entry.revision

    def stats(self) -> dict:
        by_state = {s: 0 for s in REVIEW_STATES}
        for e in self.manifest.entries:
            by_state[e.state] = by_state.get(e.state, 0) + 1
        return {
            "total": len(self.manifest.entries),
            "by_state": by_state,
            "score_histogram": self.manifest.summary.get("score_histogram", []),
        }


def create_app(session: ReviewSession, static_dir=None) -> FastAPI:
    app = FastAPI(title="fishdet review API")

    @app.get("/images")
    def list_images(page: int = 0, page_size: int = 50, state: str | None = None):
        entries = [
            {"id": i, "image": e.image_path, "label": e.label_path,
             "state": e.state, "revision": e.revision, "split": e.split,
             "n_boxes": e.n_boxes, "max_score": e.max_score}
            for i, e in enumerate(session.manifest.entries)
            if state is None or e.state == state
        ]
        start = page * page_size
        return {"total": len(entries), "page": page, "page_size": page_size,
                "images": entries[start:start + page_size]}

    @app.get("/images/{image_id}/raster")
    def raster(image_id: int):
        entry = session.entry(image_id)
        path = session.resolve(entry.image_path)
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"image file missing: {path}")
        media = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        if path.suffix.lower() == ".ppm":
            media = "image/x-portable-pixmap"
        return Response(content=path.read_bytes(), media_type=media)

    @app.get("/images/{image_id}/labels")
    def get_labels(image_id: int):
        entry = session.entry(image_id)
        return {"id": image_id, "boxes": session.read_labels(image_id),
                "revision": entry.revision, "state": entry.state}

    @app.put("/images/{image_id}/labels")
    def put_labels(image_id: int, payload: LabelsPayload, request: Request):
        reviewer = request.headers.get("x-reviewer", "anonymous")
        revision = session.save_labels(image_id, payload, reviewer)
        return {"id": image_id, "revision": revision,
                "state": session.entry(image_id).state}

    @app.get("/stats")
    def stats():
        return session.stats()

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def serve(manifest_path, port: int = 8000, image_root=None, static_dir=None) -> None:
    import uvicorn
    session = ReviewSession(manifest_path, image_root=image_root)
    app = create_app(session, static_dir=static_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)
