"""Session driver: one live scenario behind the HTTP gateway.

The simulation advances either on a background pacing thread (serve
mode) or by explicit pump() calls (tests). All mutation happens under
one lock, so requests are serialized per session, and therefore per
ticket. The gateway holds the ticket -> process mapping; browsers only
ever see opaque tokens, never ProcessIds.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass
from typing import Optional

from ..dtd import BARRIER_SEQUENCE
from ..engine import PlayerProcess
from ..errors import ConfigError, PhaseViolation, ProtocolError
from ..harness.runner import SessionRuntime
from ..harness.scenario import Scenario
from ..mechlib.mechanisms import type_value_from_wire
from ..transport.ids import Phase


@dataclass
class Ticket:
    token: str
    credential: str
    player: PlayerProcess


class GatewayError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


class SessionDriver:
    def __init__(self, scenario: Scenario, tick_rate: float = 200.0):
        scenario.validate(allow_interactive=True)
        self.scenario = scenario
        self.runtime = SessionRuntime(scenario)
        self.tick_rate = tick_rate
        self.lock = threading.RLock()
        self.tickets: dict[str, Ticket] = {}
        self._token_rng = random.Random(scenario.seed ^ 0x7E57)
        self._thread: Optional[threading.Thread] = None
        self._stop = threading.Event()

    # -- pumping -----------------------------------------------------------

    def pump(self, ticks: int = 1) -> None:
        with self.lock:
            for _ in range(ticks):
                if self.runtime.finished():
                    return
                self.runtime.step()

    def start_background(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._pump_loop, daemon=True)
        self._thread.start()

    def stop_background(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2)
            self._thread = None

    def _pump_loop(self) -> None:
        period = 1.0 / self.tick_rate
        while not self._stop.is_set():
            self.pump(1)
            time.sleep(period)

    # -- gateway operations ---------------------------------------------------

    def _fresh_token(self) -> str:
        return "t-%032x" % self._token_rng.getrandbits(128)

    def register(self, credential: str) -> Ticket:
        with self.lock:
            if self._registration_closed():
                raise GatewayError(409, "registration phase is closed")
            if any(t.credential == credential for t in self.tickets.values()):
                raise GatewayError(409, "credentials already registered")
            if self.runtime.interactive_slots_left == 0:
                raise GatewayError(409, "no interactive slots left")
            try:
                player = self.runtime.claim_interactive_slot(credential)
            except ConfigError as exc:
                raise GatewayError(409, str(exc)) from exc
            ticket = Ticket(self._fresh_token(), credential, player)
            self.tickets[ticket.token] = ticket
            # walk the sign-in round trip so the response reflects reality
            for _ in range(50 * self.scenario.topology.max_latency()):
                if player.registered or player.halted:
                    break
                self.runtime.step()
            return ticket

    def _registration_closed(self) -> bool:
        return Phase.REGISTRATION in self.runtime.registries[0].announced

    def submit_type(self, token: str, wire_value) -> str:
        with self.lock:
            ticket = self.tickets.get(token)
            if ticket is None:
                raise GatewayError(404, "unknown ticket")
            try:
                value = type_value_from_wire(self.scenario.mechanism_id, wire_value)
                from ..mechlib.mechanisms import validate_type_value
                validate_type_value(self.scenario.mechanism_id,
                                    self.scenario.mechanism_params, value)
            except ConfigError as exc:
                raise GatewayError(400, "invalid type value: %s" % exc) from exc
            try:
                ticket.player.submit_type(value)
            except (PhaseViolation, ProtocolError) as exc:
                raise GatewayError(409, str(exc)) from exc
            self.pump(2)
            return self.ticket_state(ticket)

    def ticket_state(self, ticket: Ticket) -> str:
        p = ticket.player
        if p.outcome is not None:
            if p.outcome.status == "done":
                return "done"
            return "excluded"
        if not p.registered:
            return "awaiting-registration"
        if not p.barrier.announced(Phase.REGISTRATION):
            return "registered"
        if not p.submitted_type:
            return "awaiting-type"
        return "computing"

    def poll(self, token: str) -> dict:
        with self.lock:
            ticket = self.tickets.get(token)
            if ticket is None:
                raise GatewayError(404, "unknown ticket")
            state = self.ticket_state(ticket)
            view = {"state": state, "phase": self.current_phase(),
                    "outcome": None, "reason": None}
            p = ticket.player
            if p.outcome is not None:
                if state == "done":
                    view["outcome"] = {
                        "decision": p.outcome.decision,
                        "own_tax": p.outcome.own_tax,
                        "own_transfers": p.outcome.own_transfers,
                        "roster_size": len(p.outcome.roster),
                    }
                else:
                    view["reason"] = p.outcome.status
            return view

    def current_phase(self) -> str:
        init = self.runtime.gateways[0].init_state
        if init.barrier_index >= len(BARRIER_SEQUENCE):
            return "complete"
        return BARRIER_SEQUENCE[init.barrier_index].value

    def status(self) -> dict:
        with self.lock:
            reg = self.runtime.registries[0]
            return {
                "session": self.scenario.session,
                "phase": self.current_phase(),
                "roster_size": len(reg.members),
                "mechanism_id": self.scenario.mechanism_id,
                "mechanism_params": self.scenario.mechanism_params,
                "interactive_slots_left": self.runtime.interactive_slots_left,
            }
