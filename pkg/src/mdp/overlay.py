"""Registries, gateways and the broadcast overlay.

Gateways form the core: they flood application messages between each
other along topology edges and carry the termination-detection token
around the infrastructure ring. Registries hang off gateways, admit
players, cache every broadcast type announcement, dispatch tax schemes
on behalf of their senders, route settlement transfers, and detour the
token through each of their signed-in members. Players only ever talk
to their own registry; forwarding paths are invisible to them.

Everything here is trusted infrastructure (registries are assumed
reliable); player-side logic lives in engine.py.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import dtd
from .dtd import InitiatorState, SafraCounter, TokenWave
from .harness.encoding import decode_canonical
from .transport.ids import Envelope, Phase, ProcessId, is_basic
from .transport.sim import Process, ProcessContext

LIVE = "live"
CRASHED = "crashed"
SILENT = "silent"  # registered and broadcast a type, but never sent a scheme


@dataclass
class MemberRecord:
    pid: ProcessId
    credential: str
    registry_ordinal: int
    status: str = LIVE

    def to_wire(self) -> dict:
        return {"pid": self.pid.key(), "credential": self.credential,
                "registry": self.registry_ordinal, "status": self.status}


@dataclass
class OverlayConfig:
    session: str
    ring: list[ProcessId]                       # ring[0] is the initiator gateway
    gateway_neighbors: dict[ProcessId, list[ProcessId]]
    gateway_registries: dict[ProcessId, list[ProcessId]]
    registry_gateway: dict[ProcessId, ProcessId]
    registry_ordinals: dict[ProcessId, int]
    ordinal_registry: dict[int, ProcessId]
    collector: Optional[ProcessId]
    timeout_ticks: int
    scheme_deadline_ticks: int
    wave_pause: int = 4
    registration_predicate: Callable[[str, dict], tuple[bool, str]] = \
        field(default=lambda credential, table: (True, ""))

    def successor(self, pid: ProcessId) -> ProcessId:
        i = self.ring.index(pid)
        return self.ring[(i + 1) % len(self.ring)]


def _body(env: Envelope):
    return decode_canonical(env.payload)


class _InfraProcess(Process):
    """Shared plumbing: basic-message accounting and flood dedup."""

    def __init__(self, pid: ProcessId, cfg: OverlayConfig):
        self.pid = pid
        self.cfg = cfg
        self.counter = SafraCounter()
        self.seen_floods: set[str] = set()
        self.announced: set[Phase] = set()

    def _send(self, ctx: ProcessContext, dst: ProcessId, phase: Phase,
              kind: str, body) -> None:
        self.counter.note_send(phase, dst, kind)
        ctx.send(dst, phase, kind, body)

    def on_message(self, ctx: ProcessContext, env: Envelope) -> None:
        if is_basic(env.kind):
            self.counter.note_recv(env.phase, env.src, env.kind)
        self.handle(ctx, env)

    def handle(self, ctx: ProcessContext, env: Envelope) -> None:
        raise NotImplementedError


class GatewayProcess(_InfraProcess):
    """Core host: floods, ring token transport, initiator duties."""

    def __init__(self, pid: ProcessId, cfg: OverlayConfig, initiator: bool):
        super().__init__(pid, cfg)
        self.initiator = initiator
        self.init_state = InitiatorState() if initiator else None
        self.outstanding_wave: Optional[int] = None
        self.last_wave_seen = 0

    def on_start(self, ctx: ProcessContext) -> None:
        if self.initiator:
            ctx.schedule(self.cfg.wave_pause, {"reason": "start-wave"})

    def handle(self, ctx: ProcessContext, env: Envelope) -> None:
        if env.kind == "wake":
            if _body(env).get("reason") == "start-wave":
                self._start_wave(ctx)
        elif env.kind == "token":
            self._on_token(ctx, env)
        elif env.kind == "announce" or is_basic(env.kind):
            # every flood kind travels the same way through the core
            self._on_flood(ctx, env)

    # -- flooding ------------------------------------------------------------

    def _on_flood(self, ctx: ProcessContext, env: Envelope) -> None:
        body = _body(env)
        fid = body.get("fid")
        if fid is None or fid in self.seen_floods:
            return
        self.seen_floods.add(fid)
        for nbr in self.cfg.gateway_neighbors[self.pid]:
            if nbr != env.src:
                self._send(ctx, nbr, env.phase, env.kind, body)
        for reg in self.cfg.gateway_registries[self.pid]:
            if reg != env.src:
                self._send(ctx, reg, env.phase, env.kind, body)

    # -- the token ring ------------------------------------------------------

    def _start_wave(self, ctx: ProcessContext) -> None:
        phase = self.init_state.current_phase()
        if phase is None:
            return
        wave = self.init_state.next_wave()
        token = self._amend_own(TokenWave(wave, 0, dtd.WHITE, ""), phase)
        self.outstanding_wave = wave
        self.last_wave_seen = wave
        ctx.send(self.cfg.successor(self.pid), phase, "token", token.to_wire())

    def _amend_own(self, token: TokenWave, phase: Phase) -> TokenWave:
        token = dtd.amend_token(token, self.counter.delta(phase),
                                self.counter.take_black(), done=True)
        return TokenWave(token.wave_number, token.count, token.color,
                         dtd.fold_digest(token.roster_digest, [self.pid]))

    def _on_token(self, ctx: ProcessContext, env: Envelope) -> None:
        token = TokenWave.from_wire(_body(env))
        if self.initiator:
            if token.wave_number != self.outstanding_wave:
                return  # stale wave
            self.outstanding_wave = None
            phase = self.init_state.current_phase()
            if self.init_state.evaluate(token) == "announce":
                self._announce(ctx, phase, token)
            ctx.schedule(self.cfg.wave_pause, {"reason": "start-wave"})
            return
        if token.wave_number <= self.last_wave_seen:
            return
        self.last_wave_seen = token.wave_number
        token = self._amend_own(token, env.phase)
        ctx.send(self.cfg.successor(self.pid), env.phase, "token", token.to_wire())

    def _announce(self, ctx: ProcessContext, phase: Phase, token: TokenWave) -> None:
        self.announced.add(phase)
        ctx.report_barrier(phase, 1, {"wave": token.wave_number})
        fid = "announce:%s:%d" % (phase.value, token.wave_number)
        body = {"fid": fid, "phase": phase.value, "round": 1,
                "wave": token.wave_number}
        self.seen_floods.add(fid)
        for nbr in self.cfg.gateway_neighbors[self.pid]:
            self._send(ctx, nbr, phase, "announce", body)
        for reg in self.cfg.gateway_registries[self.pid]:
            self._send(ctx, reg, phase, "announce", body)


class RegistryProcess(_InfraProcess):
    """Local registry: sign-in, caches, scheme dispatch, token detours."""

    def __init__(self, pid: ProcessId, cfg: OverlayConfig, ordinal: int,
                 system_leaves: Optional[list[ProcessId]] = None):
        super().__init__(pid, cfg)
        self.ordinal = ordinal
        self.gateway = cfg.registry_gateway[pid]
        self.collector: Optional[ProcessId] = cfg.collector
        self.members: dict[ProcessId, MemberRecord] = {}   # global table
        self.local_members: set[ProcessId] = set()
        self.credentials: set[str] = set()
        self.type_cache: dict[str, object] = {}            # pid key -> wire value
        self.scheme_seen: dict[tuple[str, int], object] = {}
        self.system_leaves = list(system_leaves or [])
        self._flood_counter = 0
        self._wave: Optional[dict] = None                  # detour in progress
        self.last_wave_seen = 0
        self._deadline_done: set[int] = set()
        self._deadline_scheduled: set[int] = set()

    # -- helpers ---------------------------------------------------------------

    def _fresh_fid(self, kind: str) -> str:
        self._flood_counter += 1
        return "%s:%s:%d" % (self.pid.key(), kind, self._flood_counter)

    def _flood(self, ctx: ProcessContext, phase: Phase, kind: str, body: dict) -> None:
        body = dict(body)
        body["fid"] = self._fresh_fid(kind)
        self.seen_floods.add(body["fid"])
        self._consume_flood(ctx, phase, kind, body)
        self._send(ctx, self.gateway, phase, kind, body)

    def _live_local(self) -> list[ProcessId]:
        return sorted((p for p in self.local_members
                       if self.members[p].status == LIVE),
                      key=lambda p: (p.registry_ordinal, p.local_counter, p.nonce))

    def _deliver_local(self, ctx: ProcessContext, phase: Phase, kind: str,
                       body: dict, include_silent: bool = False) -> None:
        for pid in self._live_local():
            self._send(ctx, pid, phase, kind, body)
        if include_silent:
            for pid in sorted(self.local_members):
                if self.members[pid].status == SILENT:
                    self._send(ctx, pid, phase, kind, body)

    # -- message dispatch --------------------------------------------------------

    def handle(self, ctx: ProcessContext, env: Envelope) -> None:
        kind = env.kind
        if kind == "sign-in":
            self._on_sign_in(ctx, env)
        elif kind == "collector-sign-in":
            # the tax collector's dedicated interface: recorded and shared
            # with the other registries, never added to rosters or barriers
            self.collector = env.src
            self._flood(ctx, Phase.REGISTRATION, "collector-update",
                        {"pid": env.src.key()})
        elif kind == "announce-type":
            self._on_announce_type(ctx, env)
        elif kind == "submit-scheme":
            self._on_submit_scheme(ctx, env)
        elif kind == "resupply-request":
            self._on_resupply(ctx, env)
        elif kind == "transfer":
            self._on_transfer(ctx, env)
        elif kind == "transfer-route":
            self._on_transfer_route(ctx, env)
        elif kind == "token":
            self._on_token(ctx, env)
        elif kind == "token-return":
            self._on_token_return(ctx, env)
        elif kind == "wake":
            self._on_wake(ctx, env)
        elif kind in ("roster-update", "type-flood", "scheme-flood",
                      "suspect-update", "collector-update", "announce"):
            body = _body(env)
            fid = body.get("fid")
            if fid is None or fid in self.seen_floods:
                return
            self.seen_floods.add(fid)
            self._consume_flood(ctx, env.phase, kind, body)

    def _consume_flood(self, ctx: ProcessContext, phase: Phase, kind: str,
                       body: dict) -> None:
        if kind == "collector-update":
            self.collector = ProcessId.from_key(body["pid"])
        elif kind == "roster-update":
            pid = ProcessId.from_key(body["member"])
            if pid not in self.members:
                self.members[pid] = MemberRecord(pid, body["credential"],
                                                 int(body["registry"]))
            self.credentials.add(body["credential"])
        elif kind == "type-flood":
            self._cache_and_deliver_type(ctx, body["player"], body["value"])
        elif kind == "scheme-flood":
            round_no = int(body["round"])
            key = (body["player"], round_no)
            if key not in self.scheme_seen:
                self.scheme_seen[key] = body["scheme"]
                self._deliver_local(ctx, Phase.SCHEME_EXCHANGE, "scheme-deliver",
                                    {"player": body["player"],
                                     "round": body["round"],
                                     "scheme": body["scheme"]})
            if round_no >= 2 and round_no not in self._deadline_scheduled:
                # recompute rounds get their own silence deadline, anchored
                # to the first dispatched scheme of that round
                self._deadline_scheduled.add(round_no)
                ctx.schedule(self.cfg.scheme_deadline_ticks,
                             {"reason": "scheme-deadline", "round": round_no})
        elif kind == "suspect-update":
            pid = ProcessId.from_key(body["pid"])
            if pid in self.members:
                self.members[pid].status = body["status"]
            self._deliver_local(ctx, phase, "suspect-notice",
                                {"pid": body["pid"], "status": body["status"]})
        elif kind == "announce":
            self._on_barrier_announced(ctx, Phase(body["phase"]),
                                       int(body["wave"]))

    # -- registration ---------------------------------------------------------------

    def _on_sign_in(self, ctx: ProcessContext, env: Envelope) -> None:
        credential = _body(env)["credential"]
        if Phase.REGISTRATION in self.announced:
            self._reply_sign_in(ctx, env.src, ok=False, reason="phase-closed")
            return
        if credential in self.credentials:
            self._reply_sign_in(ctx, env.src, ok=False, reason="duplicate")
            return
        accept, reason = self.cfg.registration_predicate(credential, self.members)
        if not accept:
            self._reply_sign_in(ctx, env.src, ok=False, reason=reason or "rejected")
            return
        self.members[env.src] = MemberRecord(env.src, credential, self.ordinal)
        self.local_members.add(env.src)
        self.credentials.add(credential)
        self._flood(ctx, Phase.REGISTRATION, "roster-update",
                    {"member": env.src.key(), "credential": credential,
                     "registry": self.ordinal})
        self._reply_sign_in(ctx, env.src, ok=True)

    def _reply_sign_in(self, ctx: ProcessContext, dst: ProcessId, ok: bool,
                       reason: str = "") -> None:
        ctx.send(dst, Phase.REGISTRATION, "sign-in-reply",
                 {"ok": ok, "reason": reason, "registry": self.ordinal,
                  "gateway": self.gateway.key()})

    # -- type broadcast ----------------------------------------------------------------

    def _on_announce_type(self, ctx: ProcessContext, env: Envelope) -> None:
        if env.src not in self.local_members:
            return
        if Phase.TYPE_BROADCAST in self.announced:
            ctx.trace("phase-violation", {"pid": env.src.key(),
                                          "kind": "announce-type"})
            return
        key = env.src.key()
        if key in self.type_cache:
            return  # immutable once broadcast; duplicates are dropped
        self._flood(ctx, Phase.TYPE_BROADCAST, "type-flood",
                    {"player": key, "value": _body(env)["value"]})

    def _cache_and_deliver_type(self, ctx: ProcessContext, player_key: str,
                                value) -> None:
        if player_key in self.type_cache:
            return
        self.type_cache[player_key] = value
        self._deliver_local(ctx, Phase.TYPE_BROADCAST, "type-deliver",
                            {"player": player_key, "value": value})

    def _on_resupply(self, ctx: ProcessContext, env: Envelope) -> None:
        missing = _body(env)["missing"]
        found = {k: self.type_cache[k] for k in missing if k in self.type_cache}
        absent = [k for k in missing if k not in self.type_cache]
        self._send(ctx, env.src, Phase.SCHEME_EXCHANGE, "resupply-reply",
                   {"found": found, "absent": absent})

    # -- scheme dispatch ---------------------------------------------------------------

    def _on_submit_scheme(self, ctx: ProcessContext, env: Envelope) -> None:
        if env.src not in self.local_members:
            return
        body = _body(env)
        round_no = int(body["round"])
        key = (env.src.key(), round_no)
        if key in self.scheme_seen:
            ctx.send(env.src, Phase.SCHEME_EXCHANGE, "scheme-reject",
                     {"round": round_no, "reason": "duplicate"})
            ctx.trace("scheme-duplicate-blocked", {"pid": env.src.key(),
                                                   "round": round_no})
            return
        if self.members[env.src].status != LIVE:
            return  # deadline passed: the member was waived for this phase
        # scheme_seen is recorded by the flood consumption, which also hands
        # identical copies to the local members (the sender included)
        self._flood(ctx, Phase.SCHEME_EXCHANGE, "scheme-flood",
                    {"player": env.src.key(), "round": round_no,
                     "scheme": body["scheme"]})

    # -- settlement routing -------------------------------------------------------------

    def _on_transfer(self, ctx: ProcessContext, env: Envelope) -> None:
        if env.src not in self.local_members:
            return
        body = _body(env)
        amount = body["amount"]
        if body["payee"] == "collector":
            if self.collector is not None:
                ctx.send(self.collector, Phase.SETTLEMENT, "collect",
                         {"payer": env.src.key(), "amount": amount})
            return
        payee = ProcessId.from_key(body["payee"])
        record = self.members.get(payee)
        if record is None or record.status != LIVE:
            return
        if payee in self.local_members:
            self._send(ctx, payee, Phase.SETTLEMENT, "transfer-deliver",
                       {"payer": env.src.key(), "amount": amount})
        else:
            dst_registry = self.cfg.ordinal_registry[record.registry_ordinal]
            self._send(ctx, dst_registry, Phase.SETTLEMENT, "transfer-route",
                       {"payer": env.src.key(), "payee": body["payee"],
                        "amount": amount})

    def _on_transfer_route(self, ctx: ProcessContext, env: Envelope) -> None:
        body = _body(env)
        payee = ProcessId.from_key(body["payee"])
        if payee in self.local_members and self.members[payee].status == LIVE:
            self._send(ctx, payee, Phase.SETTLEMENT, "transfer-deliver",
                       {"payer": body["payer"], "amount": body["amount"]})

    # -- barriers, deadlines, suspicion ---------------------------------------------------

    def _on_barrier_announced(self, ctx: ProcessContext, phase: Phase,
                              wave: int) -> None:
        self.announced.add(phase)
        roster = []
        for pid in sorted(self.members):
            entry = self.members[pid].to_wire()
            entry["has_type"] = entry["pid"] in self.type_cache
            roster.append(entry)
        self._deliver_local(ctx, phase, "announce-deliver",
                            {"phase": phase.value, "round": 1, "wave": wave,
                             "roster": roster}, include_silent=True)
        if phase == Phase.TYPE_BROADCAST:
            ctx.schedule(self.cfg.scheme_deadline_ticks,
                         {"reason": "scheme-deadline", "round": 1})

    def _on_wake(self, ctx: ProcessContext, env: Envelope) -> None:
        body = _body(env)
        reason = body.get("reason")
        if reason == "scheme-deadline":
            self._apply_scheme_deadline(ctx, int(body["round"]))
        elif reason == "visit-timeout":
            self._apply_visit_timeout(ctx, int(body["wave"]))

    def _apply_scheme_deadline(self, ctx: ProcessContext, round_no: int) -> None:
        if round_no in self._deadline_done:
            return
        self._deadline_done.add(round_no)
        for pid in self._live_local():
            if (pid.key(), round_no) not in self.scheme_seen:
                self._suspect(ctx, pid, SILENT, Phase.SCHEME_EXCHANGE)

    def _suspect(self, ctx: ProcessContext, pid: ProcessId, status: str,
                 phase: Phase) -> None:
        """suspect_crashes: timed-out member; ring heals around it and the
        suspicion floods so every roster snapshot agrees at the barrier."""
        self.members[pid].status = status
        self.counter.exclude(pid)
        ctx.trace("suspect", {"pid": pid.key(), "status": status})
        self._flood(ctx, phase, "suspect-update",
                    {"pid": pid.key(), "status": status})

    # -- token detours ---------------------------------------------------------------------

    def _on_token(self, ctx: ProcessContext, env: Envelope) -> None:
        token = TokenWave.from_wire(_body(env))
        if token.wave_number <= self.last_wave_seen:
            return
        self.last_wave_seen = token.wave_number
        phase = env.phase
        targets = self._live_local() + list(self.system_leaves)
        if not targets:
            self._forward_token(ctx, token, phase)
            return
        self._wave = {"wave": token.wave_number, "phase": phase,
                      "token": token, "outstanding": set(targets),
                      "count": token.count, "black": token.color == dtd.BLACK}
        for pid in targets:
            ctx.send(pid, phase, "token-visit", token.to_wire())
        ctx.schedule(self.cfg.timeout_ticks,
                     {"reason": "visit-timeout", "wave": token.wave_number})

    def _on_token_return(self, ctx: ProcessContext, env: Envelope) -> None:
        if self._wave is None:
            return
        returned = TokenWave.from_wire(_body(env))
        if returned.wave_number != self._wave["wave"]:
            return
        if env.src not in self._wave["outstanding"]:
            return
        self._wave["outstanding"].discard(env.src)
        base = self._wave["token"]
        self._wave["count"] += returned.count - base.count
        if returned.color == dtd.BLACK:
            self._wave["black"] = True
        if not self._wave["outstanding"]:
            self._finish_wave(ctx)

    def _apply_visit_timeout(self, ctx: ProcessContext, wave: int) -> None:
        if self._wave is None or self._wave["wave"] != wave:
            return
        for pid in sorted(self._wave["outstanding"]):
            if pid in self.members:  # system leaves are never suspected
                self._suspect(ctx, pid, CRASHED, self._wave["phase"])
        self._wave["outstanding"].clear()
        self._finish_wave(ctx)

    def _finish_wave(self, ctx: ProcessContext) -> None:
        state, self._wave = self._wave, None
        merged = TokenWave(state["wave"], state["count"],
                           dtd.BLACK if state["black"] else dtd.WHITE,
                           state["token"].roster_digest)
        self._forward_token(ctx, merged, state["phase"])

    def _forward_token(self, ctx: ProcessContext, token: TokenWave,
                       phase: Phase) -> None:
        token = dtd.amend_token(token, self.counter.delta(phase),
                                self.counter.take_black(), done=True)
        digest = dtd.fold_digest(token.roster_digest,
                                 [self.pid] + self._live_local()
                                 + list(self.system_leaves))
        token = TokenWave(token.wave_number, token.count, token.color, digest)
        ctx.send(self.cfg.successor(self.pid), phase, "token", token.to_wire())
