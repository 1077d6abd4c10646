"""Interactive steering service: JSON over HTTP.

A session holds one prompt and walks through rounds of candidate layouts;
the user selects one, optionally redraws individual objects, and renders
the final scene.  All randomness derives from the session id, the round
counter, and recorded per-event seeds, so replaying a session's history
from scratch reproduces the rendered SVG byte for byte.

State lives in memory; every mutation snapshots the histories to a JSON
file when one is configured.  Mutating endpoints accept a ``request_id``
and replay the stored response on retry instead of re-executing.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .assemble import assemble_scene, render_svg, scene_polylines_json
from .composer.sample import (ComposerBundle, LayoutScene,
                              autocomplete_layout, load_composer,
                              sample_layout_candidates)
from .data.errors import DataError, VocabError
from .data.layout import Box, PlacedObject
from .rng import child_seed
from .sketcher.registry import RegistryError, SketcherRegistry, load_registry

__all__ = ["SCHEMA_VERSION", "create_app", "ServiceState", "Session",
           "replay_session_svg"]

SCHEMA_VERSION = 1

_CANDIDATE_STREAM = 1
_RENDER_STREAM = 2
_RESKETCH_STREAM = 3


class ApiError(Exception):
    def __init__(self, status: int, message: str, hint: str | None = None):
        super().__init__(message)
        self.status = status
        self.message = message
        self.hint = hint


def _session_seed(session_id: str) -> int:
    digest = hashlib.sha256(session_id.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1  # keep it a positive int64


@dataclass
class Session:
    """One prompt's steering state; history alone determines the render."""

    session_id: str
    description: str
    history: list[dict] = field(default_factory=list)
    prefix: tuple[PlacedObject, ...] = ()
    round_counter: int = 0
    candidates: list[LayoutScene] | None = None
    candidate_payloads: list[dict] | None = None
    selection: LayoutScene | None = None
    object_seeds: list[int] | None = None
    resketch_count: int = 0
    responses: dict[str, Any] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def seed(self) -> int:
        return _session_seed(self.session_id)


def _layout_candidates(bundle: ComposerBundle, session: Session,
                       k: int, temperature: float) -> list[LayoutScene]:
    round_seed = child_seed(child_seed(session.seed, _CANDIDATE_STREAM),
                            session.round_counter)
    if session.prefix:
        return [autocomplete_layout(bundle, session.description,
                                    list(session.prefix),
                                    seed=child_seed(round_seed, i),
                                    temperature=temperature)
                for i in range(k)]
    return sample_layout_candidates(bundle, session.description, k=k,
                                    seed=round_seed,
                                    temperature=temperature)


@dataclass
class ServiceState:
    bundle: ComposerBundle
    registry: SketcherRegistry
    temperature: float = 0.4
    snapshot_path: Path | None = None
    sessions: dict[str, Session] = field(default_factory=dict)
    counter: int = 0
    store_lock: threading.Lock = field(default_factory=threading.Lock,
                                       repr=False)

    def new_session(self, description: str) -> Session:
        with self.store_lock:
            self.counter += 1
            session_id = f"s{self.counter:06d}"
            session = Session(session_id=session_id, description=description)
            session.history.append({"event": "create",
                                    "description": description})
            self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id!r}")
        return session

    def snapshot(self) -> None:
        if self.snapshot_path is None:
            return
        doc = {
            "schema_version": SCHEMA_VERSION,
            "counter": self.counter,
            "sessions": {
                sid: {"description": s.description, "history": s.history}
                for sid, s in sorted(self.sessions.items())
            },
        }
        self.snapshot_path.parent.mkdir(parents=True, exist_ok=True)
        self.snapshot_path.write_text(
            json.dumps(doc, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Pure session mechanics (shared by live endpoints and history replay)
# ---------------------------------------------------------------------------

def _parse_user_box(payload: dict) -> PlacedObject:
    try:
        label = payload["class"]
        x, y, w, h = (float(payload[k]) for k in ("x", "y", "w", "h"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(400, f"malformed box payload: {exc}") from exc
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0 and 0.0 < w <= 1.0
            and 0.0 < h <= 1.0):
        raise ApiError(
            400, f"box (x={x}, y={y}, w={w}, h={h}) is outside the unit canvas",
            hint="keep the center inside [0, 1]x[0, 1] and sides in (0, 1]")
    return PlacedObject(label, Box(x, y, w, h))


def _issue_candidates(state: ServiceState, session: Session, k: int) -> None:
    session.candidates = _layout_candidates(state.bundle, session, k,
                                            state.temperature)
    session.candidate_payloads = None


def _apply_select(state: ServiceState, session: Session,
                  candidate_id: str) -> None:
    expected_round = session.round_counter
    try:
        round_part, index_part = candidate_id.split("-")
        round_number, index = int(round_part), int(index_part)
    except ValueError:
        raise ApiError(400, f"malformed candidate id {candidate_id!r}") from None
    if session.candidates is None:
        raise ApiError(409, "no candidate round is open; fetch candidates first")
    if round_number != expected_round or not (0 <= index < len(session.candidates)):
        raise ApiError(
            409, f"candidate {candidate_id!r} is stale or unknown; the "
                 f"current round is {expected_round}")
    session.selection = session.candidates[index]
    render_seed = child_seed(session.seed, _RENDER_STREAM)
    session.object_seeds = [child_seed(render_seed, i)
                            for i in range(len(session.selection.objects))]
    session.candidates = None
    session.candidate_payloads = None
    session.round_counter += 1


def _apply_resketch(state: ServiceState, session: Session,
                    object_index: int) -> int:
    if session.selection is None:
        raise ApiError(409, "no layout selected yet")
    if not (0 <= object_index < len(session.selection.objects)):
        raise ApiError(
            400, f"object index {object_index} out of range "
                 f"[0, {len(session.selection.objects)})")
    session.resketch_count += 1
    new_seed = child_seed(child_seed(session.seed, _RESKETCH_STREAM),
                          session.resketch_count)
    session.object_seeds[object_index] = new_seed
    return new_seed


def _render_session_svg(state: ServiceState, session: Session) -> str:
    if session.selection is None:
        raise ApiError(409, "no layout selected yet; select a candidate first")
    scene = assemble_scene(session.selection, state.registry,
                           temperature=state.temperature,
                           seed=child_seed(session.seed, _RENDER_STREAM),
                           object_seeds=session.object_seeds)
    return render_svg(scene)


def replay_session_svg(state: ServiceState, session: Session) -> str:
    """Re-execute the session's history from scratch and render it.

    The replay path shares the event-application helpers with the live
    endpoints, so agreement between live render and replay means the
    recorded history really does determine the artifact.
    """
    ghost = Session(session_id=session.session_id, description="")
    for event in session.history:
        kind = event["event"]
        if kind == "create":
            ghost.description = event["description"]
        elif kind == "autocomplete":
            ghost.prefix = (_parse_user_box(event["box"]),)
            ghost.round_counter = event["round"]
            _issue_candidates(state, ghost, event["k"])
        elif kind == "candidates":
            ghost.round_counter = event["round"]
            _issue_candidates(state, ghost, event["k"])
        elif kind == "select":
            _apply_select(state, ghost, event["candidate_id"])
        elif kind == "resketch":
            _apply_resketch(state, ghost, event["object_index"])
        else:  # pragma: no cover - history is produced by this module
            raise ApiError(500, f"unknown history event {kind!r}")
    return _render_session_svg(state, ghost)


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------

class CreateSessionBody(BaseModel):
    description: str = ""
    request_id: str | None = None


class AutocompleteBody(BaseModel):
    box: dict
    k: int = 4
    request_id: str | None = None


class SelectBody(BaseModel):
    candidate_id: str
    request_id: str | None = None


class ResketchBody(BaseModel):
    object_index: int
    request_id: str | None = None


def _candidate_payloads(state: ServiceState, session: Session) -> list[dict]:
    if session.candidate_payloads is not None:
        return session.candidate_payloads
    payloads = []
    for index, layout in enumerate(session.candidates):
        preview_seed = child_seed(session.seed, _RENDER_STREAM)
        scene = assemble_scene(layout, state.registry,
                               temperature=state.temperature,
                               seed=preview_seed)
        payloads.append({
            "candidate_id": f"{session.round_counter}-{index}",
            "layout": layout.to_dict(),
            "preview": scene_polylines_json(scene),
        })
    session.candidate_payloads = payloads
    return payloads


def create_app(checkpoint_dir: str | Path,
               snapshot_path: str | Path | None = None,
               seed: int = 0, temperature: float = 0.4) -> FastAPI:
    """Build the service over a trained pipeline directory.

    ``checkpoint_dir`` must hold ``composer.ckpt`` and ``registry.json``.
    ``seed`` is reserved for operator-level reseeding of future features;
    session randomness derives from session ids so that histories replay.
    """
    checkpoint_dir = Path(checkpoint_dir)
    composer_path = checkpoint_dir / "composer.ckpt"
    registry_path = checkpoint_dir / "registry.json"
    if not composer_path.exists():
        raise FileNotFoundError(f"composer checkpoint not found: {composer_path}")
    if not registry_path.exists():
        raise FileNotFoundError(f"registry manifest not found: {registry_path}")
    bundle = load_composer(composer_path)
    registry = load_registry(registry_path)
    registry.ensure_covers(bundle.label_vocab.to_list())

    state = ServiceState(
        bundle=bundle, registry=registry, temperature=temperature,
        snapshot_path=Path(snapshot_path) if snapshot_path else None)
    app = FastAPI(title="scenesketch service")
    app.state.service = state

    @app.exception_handler(ApiError)
    async def _api_error(_, exc: ApiError):
        body = {"schema_version": SCHEMA_VERSION, "error": exc.message}
        if exc.hint:
            body["hint"] = exc.hint
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(DataError)
    async def _data_error(_, exc: DataError):
        return JSONResponse(status_code=400, content={
            "schema_version": SCHEMA_VERSION, "error": str(exc)})

    def _idempotent(session: Session, request_id: str | None, compute):
        """Replay the stored response for a retried mutation."""
        with session.lock:
            if request_id is not None and request_id in session.responses:
                return session.responses[request_id]
            response = compute()
            if request_id is not None:
                session.responses[request_id] = response
            state.snapshot()
            return response

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        if not body.description.strip():
            raise ApiError(400, "description must be nonempty")
        with state.store_lock:
            if body.request_id is not None:
                for existing in state.sessions.values():
                    cached = existing.responses.get(body.request_id)
                    if cached is not None:
                        return cached
        session = state.new_session(body.description)
        response = {"schema_version": SCHEMA_VERSION,
                    "session_id": session.session_id,
                    "description": session.description}
        if body.request_id is not None:
            session.responses[body.request_id] = response
        state.snapshot()
        return response

    @app.get("/sessions/{session_id}/candidates")
    def get_candidates(session_id: str, k: int = Query(default=4, ge=1, le=16)):
        session = state.get(session_id)
        with session.lock:
            if session.candidates is None:
                _issue_candidates(state, session, k)
                session.history.append({"event": "candidates",
                                        "round": session.round_counter,
                                        "k": k})
                state.snapshot()
            return {"schema_version": SCHEMA_VERSION,
                    "session_id": session_id,
                    "round": session.round_counter,
                    "candidates": _candidate_payloads(state, session)}

    @app.post("/sessions/{session_id}/autocomplete")
    def autocomplete(session_id: str, body: AutocompleteBody):
        session = state.get(session_id)

        def compute():
            user_box = _parse_user_box(body.box)
            try:
                session.prefix = (user_box,)
                _issue_candidates(state, session, body.k)
            except VocabError as exc:
                session.prefix = ()
                raise ApiError(400, str(exc),
                               hint="use a class the layout model knows") from exc
            session.history.append({"event": "autocomplete",
                                    "round": session.round_counter,
                                    "k": body.k,
                                    "box": dict(body.box)})
            return {"schema_version": SCHEMA_VERSION,
                    "session_id": session_id,
                    "round": session.round_counter,
                    "candidates": _candidate_payloads(state, session)}

        return _idempotent(session, body.request_id, compute)

    @app.post("/sessions/{session_id}/select")
    def select(session_id: str, body: SelectBody):
        session = state.get(session_id)

        def compute():
            _apply_select(state, session, body.candidate_id)
            session.history.append({"event": "select",
                                    "candidate_id": body.candidate_id})
            return {"schema_version": SCHEMA_VERSION,
                    "session_id": session_id,
                    "selected": session.selection.to_dict(),
                    "object_seeds": list(session.object_seeds)}

        return _idempotent(session, body.request_id, compute)

    @app.post("/sessions/{session_id}/resketch")
    def resketch(session_id: str, body: ResketchBody):
        session = state.get(session_id)

        def compute():
            new_seed = _apply_resketch(state, session, body.object_index)
            session.history.append({"event": "resketch",
                                    "object_index": body.object_index})
            return {"schema_version": SCHEMA_VERSION,
                    "session_id": session_id,
                    "object_index": body.object_index,
                    "object_seed": new_seed,
                    "object_seeds": list(session.object_seeds)}

        return _idempotent(session, body.request_id, compute)

    @app.get("/sessions/{session_id}/render")
    def render(session_id: str):
        session = state.get(session_id)
        with session.lock:
            svg = _render_session_svg(state, session)
        return Response(content=svg, media_type="image/svg+xml",
                        headers={"X-Schema-Version": str(SCHEMA_VERSION)})

    @app.get("/sessions/{session_id}/render.json")
    def render_json(session_id: str):
        session = state.get(session_id)
        with session.lock:
            if session.selection is None:
                raise ApiError(409, "no layout selected yet; select a "
                                    "candidate first")
            scene = assemble_scene(session.selection, state.registry,
                                   temperature=state.temperature,
                                   seed=child_seed(session.seed, _RENDER_STREAM),
                                   object_seeds=session.object_seeds)
            return {"schema_version": SCHEMA_VERSION,
                    "session_id": session_id,
                    "scene": scene_polylines_json(scene)}

    @app.get("/sessions/{session_id}/replay")
    def replay(session_id: str):
        session = state.get(session_id)
        with session.lock:
            svg = replay_session_svg(state, session)
        return Response(content=svg, media_type="image/svg+xml",
                        headers={"X-Schema-Version": str(SCHEMA_VERSION)})

    @app.get("/healthz")
    def healthz():
        return {"schema_version": SCHEMA_VERSION, "status": "ok",
                "classes": state.registry.labels}

    return app
