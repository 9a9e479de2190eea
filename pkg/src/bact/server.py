"""HTTP facade over the session store and experiment history.

Routes (all JSON)::

    POST /sessions                      {"experiment": id} -> {"session", "pending"}
    GET  /sessions/{id}/pending         -> {"session", "pending": [requests]}
    POST /sessions/{id}/labels          {"video", "frame", "label"} -> {"ok", "remaining"}
    POST /sessions/{id}/cancel          -> {"ok", "dropped"}
    GET  /experiments/{id}/history      -> history document (schema_version, rounds)
    GET  /classes                       -> {"classes": [...]} for the served experiment

Errors come back as {"error", "detail"} with 400/404/409.
"""

from __future__ import annotations

import threading
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .annotate import (
    SCHEMA_VERSION,
    AnnotationError,
    DuplicateLabelError,
    InvalidClassError,
    NoOutstandingQueriesError,
    SessionStore,
    UnknownRequestError,
    UnknownSessionError,
    session_annotator,
)
from .config import ExperimentConfig, config_to_dict
from .dataset import Dataset, generate_synthetic, load_dataset
from .loop import run_experiment


class SessionCreateBody(BaseModel):
    experiment: str


class LabelBody(BaseModel):
    video: str
    frame: int
    label: int


def _error(status: int, error: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": error, "detail": detail})


class ExperimentRuntime:
    """Owns one experiment: dataset, loop thread, store, streamed history."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.ds: Dataset = (
            generate_synthetic(cfg.synthetic)
            if cfg.data_path is None
            else load_dataset(cfg.data_path)
        )
        self.store = SessionStore()
        self.store.register_experiment(cfg.experiment_id, self.ds.class_names)
        self._lock = threading.Lock()
        self._rounds: list = []
        self._error: Optional[str] = None
        self._thread: Optional[threading.Thread] = None

    def history_dict(self, exp_id: str) -> dict:
        if exp_id != self.cfg.experiment_id:
            raise KeyError(exp_id)
        with self._lock:
            return {
                "schema_version": SCHEMA_VERSION,
                "config": config_to_dict(self.cfg),
                "rounds": [h.to_dict() for h in self._rounds],
                "error": self._error,
            }

    def start(self) -> None:
        annotate = session_annotator(self.store, self.cfg.experiment_id, self.ds)

        def on_round(hist):
            with self._lock:
                self._rounds.append(hist)

        def run():
            try:
                final = run_experiment(self.ds, self.cfg.loop, annotate=annotate, on_round=on_round)
                with self._lock:  # pick up the stop-reason patch on the last entry
                    self._rounds = list(final)
            except Exception as exc:  # surfaced through the history endpoint
                with self._lock:
                    self._error = f"{type(exc).__name__}: {exc}"

        self._thread = threading.Thread(target=run, daemon=True)
        self._thread.start()

    def join(self, timeout: Optional[float] = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    @property
    def running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()


def create_app(
    store: SessionStore,
    history_provider: Callable[[str], dict],
    default_experiment: str,
) -> FastAPI:
    app = FastAPI(title="boundary-AL annotation service")
    # the annotation UI is served from a separate static origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def bad_body(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", str(exc.errors()))

    @app.exception_handler(UnknownSessionError)
    async def unknown_session(request: Request, exc: UnknownSessionError):
        return _error(404, "unknown_session", str(exc))

    @app.exception_handler(UnknownRequestError)
    async def unknown_request(request: Request, exc: UnknownRequestError):
        return _error(404, "unknown_request", str(exc))

    @app.exception_handler(DuplicateLabelError)
    async def duplicate(request: Request, exc: DuplicateLabelError):
        return _error(409, "duplicate_label", str(exc))

    @app.exception_handler(NoOutstandingQueriesError)
    async def no_queries(request: Request, exc: NoOutstandingQueriesError):
        return _error(409, "no_outstanding_queries", str(exc))

    @app.exception_handler(InvalidClassError)
    async def bad_class(request: Request, exc: InvalidClassError):
        return _error(400, "invalid_class", str(exc))

    @app.exception_handler(AnnotationError)
    async def annotation_error(request: Request, exc: AnnotationError):
        return _error(409, "conflict", str(exc))

    @app.post("/sessions")
    def create_session(body: SessionCreateBody):
        sid = store.create_session(body.experiment)
        return {"session": sid, "pending": len(store.get_pending(sid))}

    @app.get("/sessions/{session_id}/pending")
    def pending(session_id: str):
        reqs = store.get_pending(session_id)
        return {"session": session_id, "pending": [r.to_dict() for r in reqs]}

    @app.post("/sessions/{session_id}/labels")
    def submit(session_id: str, body: LabelBody):
        _, remaining = store.submit_label(session_id, body.video, body.frame, body.label)
        return {"ok": True, "remaining": remaining}

    @app.post("/sessions/{session_id}/cancel")
    def cancel(session_id: str):
        dropped = store.cancel(session_id)
        return {"ok": True, "dropped": dropped}

    @app.get("/experiments/{exp_id}/history")
    def history(exp_id: str):
        try:
            return history_provider(exp_id)
        except KeyError:
            return _error(404, "unknown_experiment", f"no experiment {exp_id!r}")

    @app.get("/classes")
    def classes():
        return {"classes": list(store.class_names(default_experiment))}

    return app


def serve_app(cfg: ExperimentConfig) -> tuple:
    """Build the runtime and app for `bact serve`; returns (runtime, app)."""
    runtime = ExperimentRuntime(cfg)
    app = create_app(runtime.store, runtime.history_dict, cfg.experiment_id)
    runtime.start()
    return runtime, app
