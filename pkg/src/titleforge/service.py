"""HTTP generation service backing the drafting UI and scripted clients."""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .generation import GenerationError, GenerationRequest, generate
from .model import ModelState, load_model_state
from .prompts import PromptError

log = logging.getLogger(__name__)

ENV_MODEL_DIR = "TITLEFORGE_MODEL_DIR"
ENV_PORT = "TITLEFORGE_PORT"


@dataclass
class ServiceConfig:
    model_dir: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8765
    max_concurrent_generations: int = 2
    max_queue: int = 8
    request_timeout: float = 30.0
    allowed_origins: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not 0 < self.port < 65536:
            raise ValueError(f"port {self.port} out of range")
        if self.max_concurrent_generations < 1:
            raise ValueError("max_concurrent_generations must be >= 1")

    @classmethod
    def from_env(cls, **values) -> "ServiceConfig":
        """Build a config where the environment variables override explicit values."""
        if os.environ.get(ENV_MODEL_DIR):
            values["model_dir"] = Path(os.environ[ENV_MODEL_DIR])
        if os.environ.get(ENV_PORT):
            values["port"] = int(os.environ[ENV_PORT])
        return cls(**values)


class ApiGenerateRequest(BaseModel):
    lang: str
    description: str = ""
    code: str = ""
    num_candidates: int = Field(default=3, ge=1)


class ApiCandidate(BaseModel):
    title: str
    score: float


class ApiGenerateResponse(BaseModel):
    candidates: list[ApiCandidate]
    model_version: str
    latency_ms: float


class _GenerationGate:
    """Bounded concurrency with a bounded wait queue: overflow 429, timeout 504."""

    def __init__(self, max_concurrent: int, max_queue: int):
        self._semaphore = threading.Semaphore(max_concurrent)
        self._lock = threading.Lock()
        self._waiting = 0
        self.max_queue = max_queue

    def acquire(self, timeout: float) -> None:
        with self._lock:
            if self._waiting >= self.max_queue:
                raise HTTPException(status_code=429, detail="generation queue is full")
            self._waiting += 1
        try:
            if not self._semaphore.acquire(timeout=timeout):
                raise HTTPException(status_code=504, detail="generation timed out in queue")
        finally:
            with self._lock:
                self._waiting -= 1

    def release(self) -> None:
        self._semaphore.release()


def create_app(config: ServiceConfig, state: ModelState | None = None) -> FastAPI:
    """Service with POST /api/generate, GET /api/health, GET /api/languages."""
    app = FastAPI(title="titleforge", version="0.1.0")
    if config.allowed_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.allowed_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )
    if state is None and config.model_dir is not None:
        try:
            state = load_model_state(config.model_dir)
        except Exception:
            log.exception("model load failed for %s", config.model_dir)
            state = None
    gate = _GenerationGate(config.max_concurrent_generations, config.max_queue)
    app.state.model = state
    app.state.gate = gate
    app.state.config = config

    def _model() -> ModelState:
        if app.state.model is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return app.state.model

    @app.get("/api/health")
    def health():
        loaded = app.state.model is not None
        return {
            "status": "ok" if loaded else "degraded",
            "model_loaded": loaded,
            "model_version": app.state.model.version if loaded else None,
        }

    @app.get("/api/languages")
    def languages():
        return {"languages": sorted(_model().prefixes)}

    @app.post("/api/generate", response_model=ApiGenerateResponse)
    def handle_generate(request: ApiGenerateRequest):
        state = _model()
        if request.lang not in state.prefixes:
            raise HTTPException(
                status_code=422,
                detail={
                    "error": f"unsupported language {request.lang!r}",
                    "supported": sorted(state.prefixes),
                },
            )
        if not request.description.strip() and not request.code.strip():
            raise HTTPException(status_code=422, detail="description and code are both empty")
        try:
            gen_request = GenerationRequest(
                lang=request.lang,
                description=request.description,
                code=request.code,
                num_candidates=request.num_candidates,
                beam_size=max(10, request.num_candidates),
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        gate.acquire(timeout=config.request_timeout)
        start = time.perf_counter()
        try:
            result = generate(state, gen_request)
        except (PromptError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except GenerationError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        finally:
            gate.release()
        latency_ms = (time.perf_counter() - start) * 1000.0
        return ApiGenerateResponse(
            candidates=[ApiCandidate(title=t, score=s) for t, s in result.candidates],
            model_version=result.model_manifest,
            latency_ms=latency_ms,
        )

    return app


def run_service(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
