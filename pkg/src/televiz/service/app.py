"""FastAPI application wrapping the simulator.

REST endpoints run batch scenarios; the websocket endpoint exposes the
live engine the server was started with (snapshots out, commands in).
When a built viewer bundle is present it is served at the web root.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import TypeAdapter, ValidationError

from .. import __version__
from ..harness import CompareReport, compare_modes, run_scenario, sweep_filter
from ..scenario import ScenarioConfig, preset
from .live import LiveEngine
from .models import (
    AckMessage,
    CommandMessage,
    CompareRequest,
    ErrorMessage,
    HealthResponse,
    RunRequest,
    RunResponse,
    SweepEntryModel,
    SweepRequest,
    SweepResponse,
)

log = logging.getLogger("televiz.service")

_COMMAND_ADAPTER: TypeAdapter = TypeAdapter(CommandMessage)


def default_viewer_dist() -> Optional[Path]:
    # repo layout: <root>/src/televiz/service/app.py and <root>/frontend/dist
    candidate = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def create_app(scenario: Optional[ScenarioConfig] = None,
               viewer_dist: Optional[Union[str, Path]] = None) -> FastAPI:
    config = scenario if scenario is not None else preset("demo")
    live = LiveEngine(config)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        live.start()
        yield
        await live.stop()

    app = FastAPI(title="televiz", version=__version__, lifespan=lifespan)
    app.state.live = live

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/scenario", response_model=ScenarioConfig)
    def scenario_endpoint() -> ScenarioConfig:
        return config

    @app.post("/run", response_model=RunResponse)
    def run_endpoint(request: RunRequest) -> RunResponse:
        rows, summary = run_scenario(request.config, seed=request.seed)
        return RunResponse(
            summary=summary,
            metrics=rows if request.include_metrics else None,
        )

    @app.post("/compare", response_model=CompareReport)
    def compare_endpoint(request: CompareRequest) -> CompareReport:
        cfg = request.config
        if request.seed is not None:
            cfg = cfg.model_copy(update={"seed": request.seed})
        return compare_modes(cfg)

    @app.post("/sweep-filter", response_model=SweepResponse)
    def sweep_endpoint(request: SweepRequest) -> SweepResponse:
        entries = sweep_filter(request.config, request.rates)
        return SweepResponse(
            entries=[SweepEntryModel(rate=e.rate, lag_ms=e.lag_ms) for e in entries]
        )

    @app.websocket("/ws")
    async def websocket_endpoint(socket: WebSocket) -> None:
        await socket.accept()
        queue = live.subscribe()

        async def sender():
            while True:
                await socket.send_text(await queue.get())

        send_task = asyncio.create_task(sender())
        try:
            # greet with the latest state so clients render immediately
            await socket.send_text(live.snapshot().model_dump_json())
            while True:
                raw = await socket.receive_text()
                try:
                    command = _COMMAND_ADAPTER.validate_json(raw)
                except ValidationError as exc:
                    await socket.send_text(
                        ErrorMessage(message=f"bad command: {exc.errors()[0]['msg']}")
                        .model_dump_json()
                    )
                    continue
                tick = live.submit(command)
                await socket.send_text(
                    AckMessage(name=command.name, tick=tick).model_dump_json()
                )
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            live.unsubscribe(queue)

    dist = Path(viewer_dist) if viewer_dist is not None else default_viewer_dist()
    if dist is not None and dist.is_dir():
        app.mount("/", StaticFiles(directory=dist, html=True), name="viewer")
        log.info("serving viewer bundle from %s", dist)

    return app
