"""HTTP gateway: chat sessions, direct assessment, food lookup, traces.

JSON over HTTP/1.1, versioned under /v1. Errors use a uniform envelope
{"code", "message", "details"}. Sessions are held in memory; passing a
persist directory additionally appends one JSON line per completed turn to
<dir>/<session_id>.jsonl. The planner/responder mode (deterministic or
llm) is fixed at startup so traces stay comparable within a session.
"""

from __future__ import annotations

import json
import os
import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backend import ChatBackend
from .errors import (
    BackendError,
    DietAgentError,
    EmptyMeal,
    MalformedItem,
    MealUnresolvable,
    UnparseableAction,
)
from .foodkb import FoodIndex, resolve_meal
from .mealparse import normalize_name
from .nutrients import GuidelineSet, assess_risk
from .orchestrator import Agent, deterministic_agent, llm_agent


class MessageBody(BaseModel):
    text: str = ""


class AssessBody(BaseModel):
    meal: str = ""


def _error(status: int, code: str, message: str, details: dict | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "details": details or {}},
    )


def create_app(
    index: FoodIndex,
    guidelines: GuidelineSet,
    mode: str = "deterministic",
    backend: ChatBackend | None = None,
    persist_dir: str | None = None,
    max_steps: int = 5,
) -> FastAPI:
    if mode not in ("deterministic", "llm"):
        raise ValueError(f"mode must be deterministic or llm, got {mode!r}")
    if mode == "llm" and backend is None:
        raise ValueError("llm mode needs a chat backend")

    agent: Agent
    if mode == "deterministic":
        agent = deterministic_agent(index, guidelines, max_steps=max_steps)
    else:
        agent = llm_agent(index, guidelines, backend, max_steps=max_steps)

    app = FastAPI(title="dietagent gateway")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.sessions = {}
    app.state.mode = mode
    app.state.index = index

    if persist_dir:
        os.makedirs(persist_dir, exist_ok=True)

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error(422, "invalid_request", "request body failed validation",
                      {"errors": exc.errors()})

    def _session_or_none(session_id: str):
        return app.state.sessions.get(session_id)

    def _persist_turn(session, result) -> None:
        if not persist_dir:
            return
        line = json.dumps(
            {
                "ts": time.time(),
                "turn_index": len(session.turn_traces),
                "user_text": session.transcript[-2]["text"],
                "reply": result.answer,
                "trace": result.trace.to_dict(),
            },
            default=str,
        )
        path = os.path.join(persist_dir, f"{session.session_id}.jsonl")
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    @app.post("/v1/sessions", status_code=201)
    def create_session():
        session = agent.new_session()
        app.state.sessions[session.session_id] = session
        return {"session_id": session.session_id}

    @app.post("/v1/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        session = _session_or_none(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        if not body.text.strip():
            return _error(422, "empty_text", "message text must be non-empty")
        if not session.lock.acquire(blocking=False):
            return _error(409, "turn_in_progress",
                          "a previous turn for this session is still running")
        try:
            result = agent.run_turn(session, body.text)
        except (BackendError, UnparseableAction) as exc:
            return _error(503, "backend_unavailable", str(exc))
        finally:
            session.lock.release()
        _persist_turn(session, result)
        response = {
            "reply": result.answer,
            "trace_id": result.trace.trace_id,
            "warnings": result.warnings,
            "replied_at": time.time(),
        }
        if result.report is not None:
            response["risk_report"] = result.report
        return response

    @app.get("/v1/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        session = _session_or_none(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        records = []
        for trace in session.turn_traces:
            for record in trace.records:
                doc = record.to_dict()
                doc["trace_id"] = trace.trace_id
                records.append(doc)
        return {"session_id": session_id, "records": records}

    @app.post("/v1/assess")
    def assess(body: AssessBody):
        if not body.meal.strip():
            return _error(422, "empty_meal", "meal text must be non-empty")
        try:
            resolution = resolve_meal(body.meal, index)
        except (EmptyMeal, MalformedItem) as exc:
            return _error(422, "empty_meal", str(exc))
        except MealUnresolvable as exc:
            return _error(422, "meal_unresolvable", str(exc))
        report = assess_risk(resolution.totals, guidelines)
        return {
            "risk_report": report.to_dict(),
            "items": [item.summary() for item in resolution.items],
            "warnings": resolution.warnings,
        }

    @app.get("/v1/foods")
    def food_lookup(q: str = ""):
        if not q.strip():
            return _error(422, "invalid_request", "query parameter q must be non-empty")
        try:
            name = normalize_name(q)
        except DietAgentError as exc:
            return _error(422, "invalid_request", str(exc))
        record = index.get(name)
        if record is None:
            return _error(404, "food_not_found", f"no food record for {name!r}")
        return json.loads(record.to_line())

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "db_foods": len(index), "mode": mode}

    return app
