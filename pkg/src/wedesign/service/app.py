"""FastAPI application for live trial conduct.

Endpoints (JSON, snake_case; errors as {code, message, field?}):
  POST /api/trials                    create a session from a trial config
  GET  /api/trials/{id}               current session view
  POST /api/trials/{id}/assignments   issue the next arm assignment
  POST /api/trials/{id}/outcomes      record the pending assignment's outcome
  GET  /api/trials/{id}/whatif        hypothetical view for (arm, outcome)
  GET  /api/trials/{id}/recommendation  final recommendation (after N or termination)

When created with a token, every /api request must carry it in X-Api-Token.
"""

from __future__ import annotations

import os

from fastapi import Depends, FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..config import ConfigError, config_from_dict
from .models import (
    AssignmentResponse,
    ErrorBody,
    OutcomeRequest,
    RecommendationResponse,
    SessionView,
    TrialConfigModel,
)
from .sessions import SessionError
from .store import SessionStore


def create_app(
    data_dir: str = "trial-sessions",
    token: str | None = None,
    replay_check: bool | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    if replay_check is None:
        replay_check = os.environ.get("WEDESIGN_REPLAY_CHECK", "") == "1"
    store = SessionStore(data_dir, replay_check=replay_check)
    app = FastAPI(title="wedesign conduct service", version="0.1.0")
    app.state.store = store

    def require_token(request: Request) -> None:
        if token is not None and request.headers.get("x-api-token") != token:
            raise SessionError(401, "unauthorized", "missing or invalid API token")

    @app.exception_handler(SessionError)
    async def session_error_handler(_request, exc: SessionError):
        body = ErrorBody(code=exc.code, message=str(exc), field=exc.field_name)
        return JSONResponse(status_code=exc.status, content=body.model_dump(exclude_none=True))

    @app.exception_handler(ConfigError)
    async def config_error_handler(_request, exc: ConfigError):
        body = ErrorBody(code="invalid_config", message=str(exc), field=exc.field_name)
        return JSONResponse(status_code=400, content=body.model_dump(exclude_none=True))

    @app.exception_handler(ValueError)
    async def value_error_handler(_request, exc: ValueError):
        body = ErrorBody(code="invalid_config", message=str(exc))
        return JSONResponse(status_code=400, content=body.model_dump(exclude_none=True))

    @app.post("/api/trials", response_model=SessionView, status_code=201,
              dependencies=[Depends(require_token)])
    def create_trial(config: TrialConfigModel):
        trial_config = config_from_dict(config.model_dump())
        session = store.create(trial_config)
        return session.view()

    @app.get("/api/trials/{session_id}", response_model=SessionView,
             dependencies=[Depends(require_token)])
    def get_trial(session_id: str):
        return store.get(session_id).view()

    @app.post("/api/trials/{session_id}/assignments", response_model=AssignmentResponse,
              dependencies=[Depends(require_token)])
    def next_assignment(session_id: str):
        session = store.get(session_id)
        with store.lock(session_id):
            events, result = session.command_assignment()
            store.commit(session, events)
        return AssignmentResponse(kind=result["kind"], arm=result.get("arm"), view=session.view())

    @app.post("/api/trials/{session_id}/outcomes", response_model=SessionView,
              dependencies=[Depends(require_token)])
    def record_outcome(session_id: str, outcome: OutcomeRequest):
        session = store.get(session_id)
        with store.lock(session_id):
            events, _ = session.command_outcome(
                outcome.arm, outcome.outcome, outcome.idempotency_key
            )
            store.commit(session, events)
        return session.view()

    @app.get("/api/trials/{session_id}/whatif", response_model=SessionView,
             dependencies=[Depends(require_token)])
    def whatif(session_id: str, arm: int = Query(...), outcome: int = Query(...)):
        return store.get(session_id).whatif(arm, outcome)

    @app.get("/api/trials/{session_id}/recommendation", response_model=RecommendationResponse,
             dependencies=[Depends(require_token)])
    def recommendation(session_id: str):
        session = store.get(session_id)
        with store.lock(session_id):
            events = session.command_recommendation()
            store.commit(session, events)
        return RecommendationResponse(
            recommendation=session.recommendation,
            terminated=session.terminated,
            view=session.view(),
        )

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
