"""HTTP face of the wire protocol for the browser companion.

A single POST endpoint carries one protocol message per request, so the
UI speaks the same JSON messages as the stdio REPL.  Requests are
serialized behind one lock: sessions are strictly sequential and the
workloads are desk-scale.
"""
from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict

from .protocol import ProtocolState, handle_request


class WireRequest(BaseModel):
    model_config = ConfigDict(extra="allow")

    cmd: str


class WireResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    status: str


def create_app(ui_dir: str | None = None,
               state: ProtocolState | None = None) -> FastAPI:
    app = FastAPI(title="rmas", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],  # loopback-only service; the dev UI runs on its own port
        allow_methods=["*"],
        allow_headers=["*"],
    )
    protocol_state = state or ProtocolState()
    lock = threading.Lock()

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/api/wire", response_model=WireResponse)
    def wire(request: WireRequest) -> WireResponse:
        with lock:
            out = handle_request(protocol_state, request.model_dump())
        return WireResponse(**out)

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


def serve(host: str = "127.0.0.1", port: int = 8010,
          ui_dir: str | None = None, state: ProtocolState | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(ui_dir, state), host=host, port=port,
                log_level="warning")
