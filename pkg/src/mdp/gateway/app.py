"""The session gateway: registration, type submission, result retrieval.

The browser talks to these routes and nothing else; player processes
run inside the simulation, the gateway only maps opaque tickets onto
them. Restarting the gateway never changes a round outcome.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .driver import GatewayError, SessionDriver
from .models import (PollResponse, RegisterRequest, StatusResponse,
                     SubmitTypeRequest, SubmitTypeResponse, TicketResponse)


def create_app(driver: SessionDriver) -> FastAPI:
    app = FastAPI(title="mechanism design session gateway")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    session_id = driver.scenario.session

    def check_session(sid: str) -> None:
        if sid != session_id:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.post("/sessions/{sid}/players", response_model=TicketResponse,
              status_code=201)
    def register(sid: str, body: RegisterRequest):
        check_session(sid)
        try:
            ticket = driver.register(body.credentials)
        except GatewayError as exc:
            raise HTTPException(status_code=exc.status, detail=exc.detail)
        return TicketResponse(session=sid, token=ticket.token,
                              state=driver.ticket_state(ticket))

    @app.post("/sessions/{sid}/players/{token}/type",
              response_model=SubmitTypeResponse)
    def submit_type(sid: str, token: str, body: SubmitTypeRequest):
        check_session(sid)
        try:
            state = driver.submit_type(token, body.type_value)
        except GatewayError as exc:
            raise HTTPException(status_code=exc.status, detail=exc.detail)
        return SubmitTypeResponse(ok=True, state=state)

    @app.get("/sessions/{sid}/players/{token}", response_model=PollResponse)
    def poll(sid: str, token: str):
        check_session(sid)
        try:
            view = driver.poll(token)
        except GatewayError as exc:
            raise HTTPException(status_code=exc.status, detail=exc.detail)
        return PollResponse(**view)

    @app.get("/sessions/{sid}/status", response_model=StatusResponse)
    def status(sid: str):
        check_session(sid)
        return StatusResponse(**driver.status())

    return app
