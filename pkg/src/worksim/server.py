"""Wire-protocol endpoints for the environment.

Request/response JSON over HTTP plus a server-pushed ordered event stream
(SSE) per session; a polling endpoint serves the same ordered log for clients
that cannot hold a stream open. Agent-facing scenario payloads never include
the hidden section.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .compose import Benchmark, Scenario, build_benchmark
from .errors import ProtocolError, WorksimError
from .jsonio import canonical_loads, format_clock
from .session import SessionService
from .tasks import list_rules
from .tools import get_gateway

WIRE_VERSION = "1"


class CreateSessionBody(BaseModel):
    scenario_id: str | None = None
    benchmark_id: str | None = None
    index: int | None = None


class ActionBody(BaseModel):
    tool: str
    arguments: dict = {}
    step: int | None = None


class HintBody(BaseModel):
    tier: int
    text: str


class BuildBenchmarkBody(BaseModel):
    seed: int = 0
    n: int = 50
    k_min: int = 2
    k_max: int = 6


def _http_error(exc: ProtocolError) -> HTTPException:
    status = 404 if str(exc).startswith("unknown") else 409
    return HTTPException(status_code=status, detail=str(exc))


def create_app(service: SessionService | None = None) -> FastAPI:
    service = service or SessionService()
    app = FastAPI(title="worksim environment", version=WIRE_VERSION)
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/health")
    def health():
        return {"status": "ok", "schema_version": WIRE_VERSION}

    @app.get("/tools")
    def tools():
        return {"version": WIRE_VERSION, "tools": get_gateway().catalog_public()}

    @app.get("/rules")
    def rules():
        return {
            "rules": [
                {"rule_id": r.rule_id, "domain": r.domain, "difficulty": r.difficulty}
                for r in list_rules()
            ]
        }

    @app.post("/benchmarks")
    def benchmarks_build(body: BuildBenchmarkBody):
        benchmark = build_benchmark(list_rules(), n=body.n, k_min=body.k_min, k_max=body.k_max, seed=body.seed)
        service.add_benchmark(benchmark)
        return {
            "benchmark_id": benchmark.benchmark_id,
            "scenario_ids": [s.scenario_id for s in benchmark.scenarios],
        }

    @app.get("/benchmarks/{benchmark_id}")
    def benchmark_info(benchmark_id: str):
        benchmark = service.benchmarks.get(benchmark_id)
        if benchmark is None:
            raise HTTPException(status_code=404, detail=f"unknown benchmark '{benchmark_id}'")
        return {
            "benchmark_id": benchmark.benchmark_id,
            "scenario_ids": [s.scenario_id for s in benchmark.scenarios],
        }

    @app.get("/scenarios/{scenario_id}")
    def scenario_view(scenario_id: str):
        scenario = service.scenarios.get(scenario_id)
        if scenario is None:
            raise HTTPException(status_code=404, detail=f"unknown scenario '{scenario_id}'")
        return scenario.agent_view()

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            session_id, observation = service.create_session(
                scenario_id=body.scenario_id, benchmark_id=body.benchmark_id, index=body.index
            )
        except ProtocolError as exc:
            raise _http_error(exc)
        session = service.get_session(session_id)
        return {
            "session_id": session_id,
            "observation": observation,
            "agent_name": session.scenario.agent_name,
            "workday": [format_clock(session.scenario.workday[0]), format_clock(session.scenario.workday[1])],
            "scenario_id": session.scenario.scenario_id,
        }

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        try:
            session = service.get_session(session_id)
        except ProtocolError as exc:
            raise _http_error(exc)
        return {
            "session_id": session_id,
            "scenario": session.scenario.agent_view(),
            "phase": session.phase,
            "hints": [h.to_dict() for h in session.hints],
        }

    @app.get("/sessions/{session_id}/observation")
    def observe(session_id: str):
        try:
            return service.observe(session_id)
        except ProtocolError as exc:
            raise _http_error(exc)

    @app.post("/sessions/{session_id}/actions")
    def act(session_id: str, body: ActionBody):
        try:
            return service.act(session_id, body.tool, body.arguments, step=body.step)
        except ProtocolError as exc:
            raise _http_error(exc)

    @app.post("/sessions/{session_id}/hints")
    def hint(session_id: str, body: HintBody):
        try:
            return service.inject_hint(session_id, body.tier, body.text)
        except ProtocolError as exc:
            raise _http_error(exc)

    @app.post("/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        try:
            return {"report": service.finalize(session_id)}
        except ProtocolError as exc:
            raise _http_error(exc)

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str):
        try:
            session = service.get_session(session_id)
        except ProtocolError as exc:
            raise _http_error(exc)
        if session.report is None:
            raise HTTPException(status_code=409, detail="session not finalized yet")
        return {"report": session.report}

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, since: int = 0):
        try:
            return service.events(session_id, since)
        except ProtocolError as exc:
            raise _http_error(exc)

    @app.get("/sessions/{session_id}/events/stream")
    def events_stream(session_id: str, since: int = 0):
        try:
            service.get_session(session_id)
        except ProtocolError as exc:
            raise _http_error(exc)

        def generate():
            cursor = since
            while True:
                batch = service.wait_events(session_id, cursor, timeout=5.0)
                for event in batch["events"]:
                    yield f"data: {json.dumps(event, ensure_ascii=False)}\n\n"
                    if event["kind"] == "finalized":
                        return
                cursor = batch["next"]

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app


def load_data_dir(service: SessionService, data_dir: str) -> int:
    """Register every benchmark/scenario document found under ``data_dir``."""
    count = 0
    for path in sorted(Path(data_dir).glob("*.json")):
        doc = canonical_loads(path.read_bytes())
        if "scenarios" in doc:
            service.add_benchmark(Benchmark.from_doc(doc))
        elif "hidden" in doc:
            service.add_scenario(Scenario.from_doc(doc))
        else:
            continue
        count += 1
    return count


def serve(host: str = "127.0.0.1", port: int = 8800, data_dir: str | None = None) -> None:
    import uvicorn

    service = SessionService()
    if data_dir:
        if not os.path.isdir(data_dir):
            raise WorksimError(f"data directory not found: {data_dir}")
        loaded = load_data_dir(service, data_dir)
        print(f"loaded {loaded} documents from {data_dir}")
    uvicorn.run(create_app(service), host=host, port=port, log_level="warning")
