"""HTTP face of the map service.

Thin by design: every route parses query parameters, delegates to the
shared ServerState, and translates its errors (bad payload becomes 422,
an id clash 409).  When a token is configured, all routes except the
health probe require it as a bearer token.
"""

from __future__ import annotations

import contextlib
import datetime as dt
from typing import Optional

from fastapi import Body, Depends, FastAPI, HTTPException, Query, Request, Response

from .records import (
    ConflictError,
    RecordError,
    parse_timestamp,
    plan_to_dict,
    profile_to_dict,
    report_to_dict,
)
from .state import ServerState


def create_app(state: ServerState, *, token: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="flowkit map service")

    def guarded(request: Request) -> None:
        if token is None:
            return
        supplied = request.headers.get("authorization", "")
        if supplied != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or wrong token")

    secured = [Depends(guarded)]

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "events": state.event_count(),
            "participants": len(state.participants()),
        }

    @app.post("/events", dependencies=secured)
    def ingest(payload: dict = Body(...)) -> dict:
        with _translated():
            event_id, stored = state.ingest_event(payload)
        return {"id": event_id, "stored": stored}

    @app.get("/snapshot", dependencies=secured)
    def snapshot(
        mode: str = Query("live"),
        start: Optional[str] = Query(None),
        end: Optional[str] = Query(None),
    ) -> Response:
        with _translated():
            body = state.snapshot_json(
                mode,
                _window_bound(start, "start"),
                _window_bound(end, "end"),
            )
        return Response(content=body, media_type="application/json")

    @app.get("/participants", dependencies=secured)
    def participants() -> dict:
        return {"participants": [profile_to_dict(p) for p in state.participants()]}

    @app.put("/participants/{participant_id}", dependencies=secured)
    def upsert_participant(participant_id: str, payload: dict = Body(...)) -> dict:
        if payload.get("id") not in (None, participant_id):
            raise HTTPException(
                status_code=422,
                detail="id in the body does not match the one in the path",
            )
        body = dict(payload, id=participant_id)
        with _translated():
            profile = state.upsert_participant(body)
        return profile_to_dict(profile)

    @app.put("/soll-map", dependencies=secured)
    async def set_soll_map(request: Request) -> dict:
        raw = await request.body()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise HTTPException(status_code=422, detail="body must be UTF-8 text")
        with _translated():
            model = state.set_soll_map(text)
        return {"stores": len(model.stores), "flows": len(model.flows)}

    @app.put("/plan", dependencies=secured)
    def set_plan(payload: dict = Body(...)) -> dict:
        with _translated():
            plan = state.set_plan(payload)
        return plan_to_dict(plan)

    @app.get("/conformance", dependencies=secured)
    def conformance(start: str = Query(...), end: str = Query(...)) -> dict:
        with _translated():
            report = state.conformance(
                _window_bound(start, "start"), _window_bound(end, "end")
            )
        return report_to_dict(report)

    return app


def _window_bound(value: Optional[str], key: str) -> Optional[dt.datetime]:
    if value is None:
        return None
    return parse_timestamp(value, key)


@contextlib.contextmanager
def _translated():
    """Map state errors onto HTTP status codes."""
    try:
        yield
    except ConflictError as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    except RecordError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
