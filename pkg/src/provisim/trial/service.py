"""HTTP+JSON API over the trial store.

Endpoints:
    POST /plans                       create a plan (pre-renders all stimuli)
    POST /sessions                    create a session from a plan + seed
    GET  /sessions/{id}/next          current unanswered screen (409 when done)
    POST /sessions/{id}/responses     record one choice or timeout
    GET  /sessions/{id}/summary       per-session statistics (409 unfinished)
    GET  /export.csv                  per-screen CSV over all finished sessions
    GET  /export_summary.csv          summary CSV over all finished sessions
    GET  /stimuli/{content_id}.png    pre-rendered stimulus by content hash

All timestamps are ISO-8601 UTC. Mutations on one session are serialized by
a per-session lock; the append-only log is flushed before any ack.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .plan import PlanError
from .session import (
    DuplicateResponseError,
    OutOfOrderResponseError,
    ResponseTimingError,
    SessionFinishedError,
    SessionNotFinishedError,
)
from .store import TrialStore, UnknownPlanError, UnknownSessionError, UnknownStimulusError
from .summary import export_screens_csv, export_summary_csv, summarize


class PlanRequest(BaseModel):
    name: str = ""
    phases: list[dict]
    manifest: list[dict]
    repetitions_per_type: int = 24
    time_limit_s: float = 20.0
    base_dir: str = ""


class SessionRequest(BaseModel):
    plan_id: str
    participant: str
    seed: int


class ResponseRequest(BaseModel):
    screen_index: int
    choice: int | None = None
    timeout: bool = False
    client_elapsed_ms: float = Field(ge=0)


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def create_app(data_dir, static_dir=None) -> FastAPI:
    store = TrialStore(data_dir)
    app = FastAPI(title="provisim trial service")
    app.state.store = store

    @app.post("/plans")
    def create_plan(req: PlanRequest):
        try:
            plan = store.create_plan(req.model_dump(exclude={"base_dir"}), req.base_dir or None)
        except PlanError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"stimulus rendering failed: {exc}")
        return {
            "plan_id": plan.plan_id,
            "screens_total": plan.screens_total,
            "phases": [p.name for p in plan.phases],
            "stimuli": sum(len(v) for v in plan.stimulus_map.values()),
        }

    @app.get("/plans/{plan_id}")
    def get_plan(plan_id: str):
        try:
            plan = store.get_plan(plan_id)
        except UnknownPlanError:
            raise HTTPException(status_code=404, detail=f"unknown plan {plan_id}")
        return {
            "plan_id": plan.plan_id,
            "name": plan.name,
            "phases": [p.name for p in plan.phases],
            "repetitions_per_type": plan.repetitions_per_type,
            "time_limit_s": plan.time_limit_s,
            "screens_total": plan.screens_total,
        }

    @app.post("/sessions")
    def create_session(req: SessionRequest):
        try:
            session = store.create_session(req.plan_id, req.participant, req.seed)
        except UnknownPlanError:
            raise HTTPException(status_code=404, detail=f"unknown plan {req.plan_id}")
        except PlanError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "session_id": session.session_id,
            "screens_total": len(session.screens),
            "time_limit_s": session.time_limit_s,
        }

    def _session_or_404(session_id: str):
        try:
            return store.get_session(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.get("/sessions/{session_id}/next")
    def next_screen(session_id: str):
        session = _session_or_404(session_id)
        with store.session_lock(session_id):
            try:
                screen = session.next_screen()
            except SessionFinishedError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
        return {
            "screen_index": screen.index,
            "total": len(session.screens),
            "phase": screen.phase,
            "question_type": screen.question_type,
            "prompt": screen.prompt,
            "choices": [
                {"stimulus": cid, "url": f"/stimuli/{cid}.png"} for cid in screen.content_ids
            ],
            "time_limit_s": session.time_limit_s,
        }

    @app.post("/sessions/{session_id}/responses")
    def submit_response(session_id: str, req: ResponseRequest):
        session = _session_or_404(session_id)
        with store.session_lock(session_id):
            try:
                record = session.submit(
                    req.screen_index,
                    req.choice,
                    req.timeout,
                    req.client_elapsed_ms,
                    _now_iso(),
                )
            except (SessionFinishedError, DuplicateResponseError, OutOfOrderResponseError) as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except ResponseTimingError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            store.record_response(session_id, record)
        return {
            "ok": True,
            "screen_index": record.screen_index,
            "finished": session.finished,
        }

    @app.get("/sessions/{session_id}/summary")
    def session_summary(session_id: str):
        session = _session_or_404(session_id)
        try:
            return summarize([session])
        except SessionNotFinishedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/export.csv", response_class=PlainTextResponse)
    def export_csv():
        return PlainTextResponse(
            export_screens_csv(store.finished_sessions()), media_type="text/csv"
        )

    @app.get("/export_summary.csv", response_class=PlainTextResponse)
    def export_summary():
        finished = store.finished_sessions()
        if not finished:
            return PlainTextResponse("", media_type="text/csv")
        return PlainTextResponse(export_summary_csv(finished), media_type="text/csv")

    @app.get("/stimuli/{content_id}.png")
    def stimulus(content_id: str):
        try:
            path = store.stimulus_path(content_id)
        except UnknownStimulusError:
            raise HTTPException(status_code=404, detail=f"unknown stimulus {content_id}")
        return FileResponse(path, media_type="image/png")

    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=static_dir, html=True), name="frontend")

    return app
