"""HTTP surface over the orchestrator.

Execution runs on a background thread; clients follow it by polling
``GET /sessions/{id}/events?since=<seq>`` with their last seen sequence
number, which is gap-free because events are appended under the session
lock with strictly increasing seq values.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .chains import ChainError
from .graphs import GraphError, parse_graph
from .orchestrator import (
    Orchestrator,
    SessionError,
    StatusError,
    UnknownSessionError,
    chain_from_json,
)
from .planner import PlanningError
from .registry import RegistryError, UnknownApiError


class SubmitBody(BaseModel):
    question: str
    graph_document: str


class ConfirmBody(BaseModel):
    chain: list[dict] | None = None


class RetrieveBody(BaseModel):
    question: str
    k: int = 5


class SuggestBody(BaseModel):
    graph_document: str


def build_app(orch: Orchestrator) -> FastAPI:
    app = FastAPI(title="graphchain")

    def _session(sid: str):
        try:
            return orch.get_session(sid)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post("/sessions")
    def submit(body: SubmitBody):
        try:
            session = orch.submit_prompt(body.question, body.graph_document)
        except GraphError as exc:
            raise HTTPException(status_code=400, detail=f"graph error: {exc}") from exc
        except PlanningError as exc:
            raise HTTPException(status_code=400, detail=f"planning error: {exc}") from exc
        return session.to_view()

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": [s.to_view() for s in orch.list_sessions()]}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return _session(sid).to_view()

    @app.post("/sessions/{sid}/confirm")
    def confirm(sid: str, body: ConfirmBody):
        _session(sid)
        try:
            edited = chain_from_json(body.chain) if body.chain is not None else None
            session = orch.confirm_chain(sid, edited)
        except StatusError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except (ChainError, UnknownApiError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=f"bad chain edit: {exc}") from exc
        return session.to_view()

    @app.post("/sessions/{sid}/execute")
    def execute(sid: str):
        _session(sid)
        try:
            events = orch.execute_chain(sid)
        except StatusError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc

        def drain():
            for _ in events:
                pass

        threading.Thread(target=drain, daemon=True).start()
        return _session(sid).to_view()

    @app.get("/sessions/{sid}/events")
    def events(sid: str, since: int = 0):
        _session(sid)
        session = orch.get_session(sid)
        return {
            "status": session.status,
            "events": [e.to_record() for e in orch.get_events(sid, since)],
        }

    @app.get("/sessions/{sid}/sequences")
    def sequences(sid: str):
        return _session(sid).sequences.to_json()

    @app.get("/apis")
    def apis():
        return {
            "apis": [
                {
                    "id": s.id,
                    "description": s.description,
                    "input_kind": s.input_kind,
                    "output_kind": s.output_kind,
                }
                for s in orch.registry.specs()
            ]
        }

    @app.post("/apis/retrieve")
    def retrieve(body: RetrieveBody):
        try:
            ranked = orch.registry.retrieve(body.question, body.k)
        except RegistryError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"apis": [{"id": s.id, "score": score} for s, score in ranked]}

    @app.post("/suggest")
    def suggest(body: SuggestBody):
        try:
            graph = parse_graph(body.graph_document)
        except GraphError as exc:
            raise HTTPException(status_code=400, detail=f"graph error: {exc}") from exc
        return {"questions": orch.suggest_questions(graph)}

    return app
