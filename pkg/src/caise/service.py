"""HTTP JSON API for live edit sessions.

A session walks the request-propose-resolve loop: the user posts an
utterance, the model proposes a command (with its selection-gate trace and
per-token sources), and a human accepts or overrides it; the executor then
applies the command and the result image lands in the session history.

Error contract
--------------
==== =========================================================
404  unknown session / image index out of range
409  state conflict (proposal already pending, or none to resolve)
400  override command does not parse, or the pending proposal is
     not a valid command
422  the command is valid but execution failed (no current image,
     empty search result, cutout failure); the proposal stays
     pending so the human can retry
==== =========================================================

Configuration comes from a JSON file (see ``ServiceConfig``) located by
``--config`` or the ``CAISE_CONFIG`` environment variable; ``CAISE_PORT``,
``CAISE_CHECKPOINT`` and ``CAISE_CORPUS`` override single fields.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .commands import format_command, parse_command
from .errors import (
    CommandError,
    CutoutFailedError,
    NoCurrentImageError,
    SearchEmptyError,
    SessionStateError,
)
from .model.config import ModelConfig
from .model.net import predict
from .model.train import load_model
from .nn.autodiff import Tensor
from .raster import png_bytes
from .search import CorpusIndex, load_corpus
from .session import Proposal, SessionStore, proposal_payload

log = logging.getLogger("caise.service")

_EXECUTION_FAILURES = (NoCurrentImageError, SearchEmptyError, CutoutFailedError)


# --- configuration ---


@dataclass(frozen=True)
class ServiceConfig:
    corpus: str                  # manifest JSONL or saved-index JSON path
    checkpoint: str              # model checkpoint directory
    host: str = "127.0.0.1"
    port: int = 8000
    mode: str = "full"           # context view served to the model
    clamp_generate: bool = False
    ui_dir: str | None = None    # static browser client, when built


def load_service_config(path: str | Path | None = None) -> ServiceConfig:
    """Read the JSON config file, then apply environment overrides."""
    if path is None:
        path = os.environ.get("CAISE_CONFIG")
    if path is None:
        raise FileNotFoundError("no config file: pass a path or set CAISE_CONFIG")
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {f for f in ServiceConfig.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config field(s): {sorted(unknown)}")
    cfg = ServiceConfig(**doc)
    if "CAISE_PORT" in os.environ:
        cfg = replace(cfg, port=int(os.environ["CAISE_PORT"]))
    if "CAISE_CHECKPOINT" in os.environ:
        cfg = replace(cfg, checkpoint=os.environ["CAISE_CHECKPOINT"])
    if "CAISE_CORPUS" in os.environ:
        cfg = replace(cfg, corpus=os.environ["CAISE_CORPUS"])
    return cfg


# --- request/response bodies (the published schema) ---


class CreateSessionResponse(BaseModel):
    session_id: str


class UtteranceRequest(BaseModel):
    text: str


class UtteranceResponse(BaseModel):
    proposed_command: str
    valid: bool
    gate_trace: list[list[float]]
    token_sources: list[str]


class ResolveRequest(BaseModel):
    action: str                       # "accept" | "override"
    command: str | None = None        # required for override
    assistant_text: str | None = None


class ResolveResponse(BaseModel):
    image_id: int
    executed_command: str


class SearchHit(BaseModel):
    id: str
    caption: str
    tags: list[str]
    distinct_terms: int
    total_occurrences: int


class SearchResponse(BaseModel):
    query: list[str]
    hits: list[SearchHit]


def _error(status: int, kind: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": kind, "detail": message})


# --- application factory ---


def create_app(corpus: CorpusIndex, params: dict[str, Tensor],
               model_config: ModelConfig, mode: str = "full",
               clamp_generate: bool = False, ui_dir: str | Path | None = None,
               ) -> FastAPI:
    """Wire the service around an already-loaded corpus and model."""
    app = FastAPI(title="caise", version="0.1.0")
    store = SessionStore(corpus)

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        t0 = time.monotonic()
        response = await call_next(request)
        log.info(json.dumps({
            "event": "request",
            "method": request.method,
            "path": request.url.path,
            "status": response.status_code,
            "ms": round(1000 * (time.monotonic() - t0), 1),
        }))
        return response

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(store), "corpus_entries": corpus.doc_count}

    @app.post("/sessions", status_code=201, response_model=CreateSessionResponse)
    def create_session():
        s = store.create()
        return CreateSessionResponse(session_id=s.id)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        s = store.get(session_id)
        if s is None:
            return _error(404, "unknown_session", session_id)
        with store.lock(session_id):
            return s.snapshot()

    @app.post("/sessions/{session_id}/utterance", response_model=UtteranceResponse)
    def post_utterance(session_id: str, body: UtteranceRequest):
        s = store.get(session_id)
        if s is None:
            return _error(404, "unknown_session", session_id)
        with store.lock(session_id):
            try:
                instance = s.add_user_utterance(body.text)
            except SessionStateError as exc:
                return _error(409, "proposal_pending", str(exc))
            except ValueError as exc:
                return _error(400, "empty_utterance", str(exc))
            decoded = predict(params, model_config, instance, mode=mode,
                              clamp_generate=clamp_generate)
            s.propose(Proposal(
                text=decoded.text,
                command=decoded.command,
                valid=decoded.valid,
                gate_trace=tuple(decoded.gate_trace),
                token_sources=tuple(decoded.token_sources),
            ))
            return UtteranceResponse(**proposal_payload(s.pending))

    @app.post("/sessions/{session_id}/resolve", response_model=ResolveResponse)
    def post_resolve(session_id: str, body: ResolveRequest):
        s = store.get(session_id)
        if s is None:
            return _error(404, "unknown_session", session_id)
        with store.lock(session_id):
            if s.pending is None:
                return _error(409, "no_pending_proposal", "nothing to resolve")
            if body.action == "accept":
                command = s.pending.command
                if command is None:
                    return _error(
                        400, "invalid_proposal",
                        f"proposal {s.pending.text!r} is not a valid command; override instead",
                    )
            elif body.action == "override":
                if not body.command:
                    return _error(400, "missing_command", "override requires a command")
                try:
                    command = parse_command(body.command)
                except CommandError as exc:
                    return _error(400, type(exc).__name__, str(exc))
            else:
                return _error(400, "unknown_action", body.action)
            try:
                image_id = s.resolve(command, assistant_text=body.assistant_text)
            except _EXECUTION_FAILURES as exc:
                return _error(422, type(exc).__name__, str(exc))
            return ResolveResponse(image_id=image_id,
                                   executed_command=format_command(command))

    @app.get("/sessions/{session_id}/images/{n}")
    def get_image(session_id: str, n: int):
        s = store.get(session_id)
        if s is None:
            return _error(404, "unknown_session", session_id)
        with store.lock(session_id):
            if not (0 <= n < len(s.rasters)):
                return _error(404, "image_out_of_range", f"{n} of {len(s.rasters)}")
            data = png_bytes(s.rasters[n])
        return Response(content=data, media_type="image/png")

    @app.get("/corpus/search", response_model=SearchResponse)
    def corpus_search(q: str, k: int = 10):
        terms = q.split()
        try:
            ranked = corpus.search(terms, k=k)
        except SearchEmptyError as exc:
            return _error(404, "SearchEmptyError", str(exc))
        except ValueError as exc:
            return _error(400, "empty_query", str(exc))
        hits = []
        for entry_id, (distinct, total) in ranked:
            e = corpus.entry(entry_id)
            hits.append(SearchHit(
                id=e.id, caption=" ".join(e.caption), tags=sorted(e.tags),
                distinct_terms=distinct, total_occurrences=total,
            ))
        return SearchResponse(query=terms, hits=hits)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def app_from_config(config: ServiceConfig) -> FastAPI:
    corpus = load_corpus(config.corpus)
    params, model_config = load_model(config.checkpoint)
    return create_app(
        corpus, params, model_config,
        mode=config.mode, clamp_generate=config.clamp_generate,
        ui_dir=config.ui_dir,
    )


def serve(config: ServiceConfig) -> None:  # pragma: no cover - thin wrapper
    import uvicorn

    uvicorn.run(app_from_config(config), host=config.host, port=config.port)
