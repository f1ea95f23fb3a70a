"""HTTP surface: /health, /chat, /ingest, /stores, /eval.

Errors use the stable {"error": {"code", "message"}} envelope.
"""

import logging
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..errors import ConfigError, ThreatragError
from ..llm import ReplayingChatClient
from .engine import Engine
from .eval_runner import run_eval_command

logger = logging.getLogger(__name__)


class ChatRequest(BaseModel):
    query: str


class IngestRequest(BaseModel):
    source_names: list[str] | None = None


class EvalRequest(BaseModel):
    case_file_path: str
    mode: str = "replay"


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="threat knowledge engine", docs_url=None, redoc_url=None)
    admin_token = engine.config.server.admin_token

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_request", str(exc))

    @app.exception_handler(ThreatragError)
    async def on_engine_error(request: Request, exc: ThreatragError):
        status = 400 if isinstance(exc, ConfigError) else 500
        return _error(status, type(exc).__name__.lower(), str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok", "stores": engine.store_manifests()}

    @app.get("/stores")
    def stores():
        return {"stores": engine.store_manifests()}

    @app.post("/chat")
    def chat(request: ChatRequest):
        if not request.query or not request.query.strip():
            return _error(400, "empty_query", "query must be non-empty")
        try:
            return engine.query(request.query)
        except ThreatragError as exc:
            return _error(500, "chat_failed", str(exc))

    @app.post("/ingest")
    def ingest(request: IngestRequest, http_request: Request):
        if admin_token and http_request.headers.get("X-Admin-Token") != admin_token:
            return _error(403, "forbidden", "missing or wrong X-Admin-Token")
        try:
            summary = engine.ingest(request.source_names)
        except ConfigError as exc:
            return _error(400, "bad_ingest_request", str(exc))
        except ThreatragError as exc:
            return _error(500, "ingest_failed", str(exc))
        return summary.as_dict()

    @app.post("/eval")
    def eval_endpoint(request: EvalRequest):
        if request.mode not in ("live", "replay"):
            return _error(400, "bad_mode", f"unknown mode: {request.mode!r}")
        case_path = Path(request.case_file_path)
        if not case_path.exists():
            return _error(400, "missing_case_file", f"no such file: {case_path}")
        try:
            json_path, csv_path, hard_errors = run_eval_command(
                engine, case_path, request.mode)
        except ThreatragError as exc:
            return _error(500, "eval_failed", str(exc))
        return {"report_json": str(json_path), "report_csv": str(csv_path),
                "hard_error_count": hard_errors}

    return app


__all__ = ["create_app", "ChatRequest", "IngestRequest", "EvalRequest",
           "ReplayingChatClient"]
