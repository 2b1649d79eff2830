"""HTTP session API for human runs and scripted clients.

Serves scenarios behind an information-hiding mask: responses never carry
a ground-truth value for a cell that has not been revealed by the budgeted
waypoint protocol. Sessions live in memory, are checkpointed every ten
reveals, and are persisted as session logs on finish; evaluation is only
available on finished sessions so participants get no feedback mid-run.
"""

import glob
import logging
import os
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import (
    FieldworkError,
    InvalidCell,
    SessionExhausted,
    SessionFinished,
)
from .evaluate import evaluate_session
from .scenario import Cell, Field, VALUE_HI, VALUE_LO, load_scenario
from .session import (
    Agent,
    Session,
    add_waypoint,
    dump_log,
    new_session,
    session_to_log,
    utc_now_iso,
)

log = logging.getLogger(__name__)

CHECKPOINT_EVERY = 10


class CreateSessionBody(BaseModel):
    scenario_name: str
    agent: str = "human"
    note: str | None = None
    budget_total: int | None = None


class WaypointBody(BaseModel):
    row: int
    col: int
    token: str | None = None  # client dedupe token for idempotent retries


class FinishBody(BaseModel):
    note: str | None = None


class _Entry:
    """A live session plus its mutation lock and dedupe cache."""

    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.seen_tokens: dict[str, dict] = {}
        self.last_checkpoint = 0


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error_code": code, "message": message})


def masked_view(session: Session) -> dict:
    """Client-visible state: revealed cells only, never the full field."""
    return {
        "rows": session.scenario.grid.rows,
        "cols": session.scenario.grid.cols,
        "cell_m": session.scenario.grid.cell_m,
        "revealed": [
            {"row": r.cell.row, "col": r.cell.col, "value": r.value}
            for r in session.revealed
        ],
        "remaining": session.remaining,
        "budget_total": session.budget_total,
        "value_range": [VALUE_LO, VALUE_HI],
        "finished": session.finished,
    }


def create_app(scenario_dir: str, log_dir: str,
               static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="fieldwork session service")
    os.makedirs(log_dir, exist_ok=True)

    scenarios: dict[str, Field] = {}
    for path in sorted(glob.glob(os.path.join(scenario_dir, "*.json"))):
        field = load_scenario(path)
        scenarios[field.name] = field
    if not scenarios:
        log.warning("no scenarios found in %s", scenario_dir)
    entries: dict[str, _Entry] = {}

    def log_path(session_id: str) -> str:
        return os.path.join(log_dir, f"{session_id}.json")

    def checkpoint_path(session_id: str) -> str:
        return os.path.join(log_dir, f"{session_id}.checkpoint.json")

    def persist(session: Session, path: str):
        with open(path, "w") as handle:
            handle.write(dump_log(session_to_log(session)))

    @app.exception_handler(FieldworkError)
    async def fieldwork_error_handler(request: Request, exc: FieldworkError):
        status = {
            SessionExhausted: 409,
            SessionFinished: 409,
            InvalidCell: 422,
        }.get(type(exc), 500)
        return _error(status, type(exc).__name__.lower(), str(exc))

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/scenarios")
    def list_scenarios():
        return [
            {"name": f.name, "rows": f.grid.rows, "cols": f.grid.cols}
            for f in scenarios.values()
        ]

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.agent != Agent.HUMAN.value:
            return _error(422, "invalid_agent",
                          "only human sessions are created over the API")
        if body.scenario_name not in scenarios:
            return _error(404, "unknown_scenario",
                          f"no scenario named {body.scenario_name!r}")
        session = new_session(
            scenarios[body.scenario_name],
            Agent.HUMAN,
            **({"budget_total": body.budget_total}
               if body.budget_total is not None else {}),
            note=body.note,
            created_at=utc_now_iso(),
        )
        entries[session.id] = _Entry(session)
        return {"session_id": session.id, "masked_view": masked_view(session)}

    def get_entry(session_id: str) -> _Entry | None:
        return entries.get(session_id)

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        entry = get_entry(session_id)
        if entry is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        view = masked_view(entry.session)
        view["session_id"] = session_id
        view["agent"] = entry.session.agent.value
        view["waypoints"] = [
            {"row": w.row, "col": w.col} for w in entry.session.waypoints
        ]
        return view

    @app.post("/api/sessions/{session_id}/waypoints")
    def post_waypoint(session_id: str, body: WaypointBody):
        entry = get_entry(session_id)
        if entry is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        with entry.lock:
            if body.token is not None and body.token in entry.seen_tokens:
                return entry.seen_tokens[body.token]
            result = add_waypoint(entry.session, Cell(body.row, body.col))
            payload = {
                "newly_revealed": [
                    {"row": c.row, "col": c.col, "value": v}
                    for c, v in result.newly_revealed
                ],
                "truncated": result.truncated,
                "remaining": result.remaining,
            }
            if body.token is not None:
                entry.seen_tokens[body.token] = payload
            revealed = len(entry.session.revealed)
            if revealed - entry.last_checkpoint >= CHECKPOINT_EVERY:
                persist(entry.session, checkpoint_path(session_id))
                entry.last_checkpoint = revealed
            return payload

    @app.post("/api/sessions/{session_id}/finish")
    def finish_session(session_id: str, body: FinishBody):
        entry = get_entry(session_id)
        if entry is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        with entry.lock:
            if body.note is not None:
                entry.session.note = body.note
            entry.session.finished = True
            persist(entry.session, log_path(session_id))
            checkpoint = checkpoint_path(session_id)
            if os.path.exists(checkpoint):
                os.unlink(checkpoint)
        return {"session_id": session_id, "finished": True,
                "log": os.path.basename(log_path(session_id))}

    @app.post("/api/evaluate/{session_id}")
    def evaluate(session_id: str):
        entry = get_entry(session_id)
        if entry is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        if not entry.session.finished:
            return _error(409, "not_finished",
                          "evaluation is only available on finished sessions")
        report = evaluate_session(entry.session)
        return report.to_dict()

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
