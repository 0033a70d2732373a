"""Request/response bodies for the session gateway."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class RegisterRequest(BaseModel):
    credentials: str = Field(min_length=1, max_length=120)


class TicketResponse(BaseModel):
    session: str
    token: str
    state: str


class SubmitTypeRequest(BaseModel):
    type_value: Any


class SubmitTypeResponse(BaseModel):
    ok: bool
    state: str


class OutcomeView(BaseModel):
    """What one participant gets to see: the public decision, their own
    tax, and their own transfer lines. Nothing about anybody else."""

    decision: Any
    own_tax: str
    own_transfers: list
    roster_size: int


class PollResponse(BaseModel):
    state: str
    phase: str
    outcome: Optional[OutcomeView] = None
    reason: Optional[str] = None


class StatusResponse(BaseModel):
    session: str
    phase: str
    roster_size: int
    mechanism_id: str
    mechanism_params: dict
    interactive_slots_left: int
