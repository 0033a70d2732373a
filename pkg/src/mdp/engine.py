"""Player processes, the tax collector and the session driver.

A player process executes one full round: sign in, broadcast its type,
wait for the type barrier, compute the decision / taxes / settlement
scheme over the final roster, hand the scheme to its registry for
dispatch, police everybody's schemes byte-for-byte, recompute with
dishonest processes excluded, emit its transfers and terminate after
the settlement barrier. Every player redundantly performs the identical
exact computation, which is what policing and crash tolerance rest on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import dtd, mechlib
from .errors import ConfigError, PhaseViolation, ProtocolError
from .harness.encoding import decode_canonical, encode_canonical
from .mechlib import COLLECTOR, settle, tax_vector
from .mechlib.mechanisms import build_problem, type_value_from_wire, type_value_to_wire
from .mechlib.problems import JointType
from .mechlib.rational import encode_rational, rational
from .overlay import CRASHED, LIVE, SILENT
from .transport.ids import Envelope, Phase, ProcessId, is_basic
from .transport.sim import Process, ProcessContext

HONEST = "honest"
DISHONEST = "dishonest"


@dataclass
class RoundOutcome:
    status: str                      # done | excluded:<reason> | rejected:<reason> | aborted:<reason>
    decision: object = None
    taxes: list = field(default_factory=list)
    scheme: list = field(default_factory=list)
    roster: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    excluded: list = field(default_factory=list)
    rounds: int = 0
    receipts: list = field(default_factory=list)
    faults: list = field(default_factory=list)
    own_tax: Optional[str] = None
    own_transfers: list = field(default_factory=list)

    def to_wire(self) -> dict:
        return {
            "status": self.status, "decision": self.decision,
            "taxes": self.taxes, "scheme": self.scheme, "roster": self.roster,
            "verdicts": self.verdicts, "excluded": self.excluded,
            "rounds": self.rounds, "receipts": self.receipts,
            "faults": self.faults, "own_tax": self.own_tax,
            "own_transfers": self.own_transfers,
        }


class PlayerProcess(Process):
    def __init__(self, pid: ProcessId, credential: str, registry: ProcessId,
                 mechanism_id: str, mechanism_params: dict,
                 type_value=None, behavior: Optional[dict] = None):
        self.pid = pid
        self.credential = credential
        self.registry = registry
        self.mechanism_id = mechanism_id
        self.mechanism_params = dict(mechanism_params)
        self.scripted_type = type_value          # None => interactive
        self.behavior = behavior or {}
        self.counter = dtd.SafraCounter()
        self.barrier = dtd.BarrierState()
        self.gateway_key: Optional[str] = None
        self.registry_ordinal: Optional[int] = None
        self.roster: list[dict] = []             # announce-deliver snapshots
        self.type_roster: dict[str, object] = {}  # pid key -> wire value
        self.received_schemes: dict[tuple[int, str], object] = {}
        self.verdicts: dict[str, str] = {}
        self.excluded: list[str] = []
        self.round = 0
        self.final_wire: Optional[dict] = None
        self.expected_schemes: set[str] = set()
        self.awaiting_round: Optional[int] = None
        self.submitted_type = False
        self.registered = False
        self.halted = False
        self.outcome: Optional[RoundOutcome] = None
        self.receipts: list[list] = []
        self.faults: list[str] = []
        self._ctx: Optional[ProcessContext] = None
        self._pending_resupply = False

    # -- transport plumbing ----------------------------------------------------

    def on_start(self, ctx: ProcessContext) -> None:
        self._ctx = ctx
        ctx.send(self.registry, Phase.REGISTRATION, "sign-in",
                 {"credential": self.credential})

    def _send(self, ctx: ProcessContext, phase: Phase, kind: str, body) -> None:
        self.counter.note_send(phase, self.registry, kind)
        ctx.send(self.registry, phase, kind, body)

    def on_message(self, ctx: ProcessContext, env: Envelope) -> None:
        if is_basic(env.kind):
            self.counter.note_recv(env.phase, env.src, env.kind)
        kind = env.kind
        body = decode_canonical(env.payload)
        if kind == "token-visit":
            self._on_token_visit(ctx, env, body)
        elif self.halted:
            return
        elif kind == "sign-in-reply":
            self._on_sign_in_reply(body)
        elif kind == "type-deliver":
            self.type_roster.setdefault(body["player"], body["value"])
        elif kind == "announce-deliver":
            self._on_barrier(ctx, Phase(body["phase"]), body["roster"])
        elif kind == "resupply-reply":
            self._on_resupply_reply(ctx, body)
        elif kind == "scheme-deliver":
            self.received_schemes[(int(body["round"]), body["player"])] = body["scheme"]
            self._maybe_police(ctx)
        elif kind == "suspect-notice":
            self._on_suspect_notice(ctx, body)
        elif kind == "transfer-deliver":
            self.receipts.append([body["payer"], body["amount"]])
            ctx.trace("transfer", {"payer": body["payer"],
                                   "payee": self.pid.key(),
                                   "amount": body["amount"]})

    def _on_token_visit(self, ctx: ProcessContext, env: Envelope, body) -> None:
        token = dtd.TokenWave.from_wire(body)
        # a halted process is passive forever: it reports done so that the
        # remaining barriers can drain instead of waiting on it
        done = self.halted or self.barrier.local_done(env.phase)
        token = dtd.amend_token(token, self.counter.delta(env.phase),
                                self.counter.take_black(), done)
        ctx.send(env.src, env.phase, "token-return", token.to_wire())

    # -- registration ------------------------------------------------------------

    def _on_sign_in_reply(self, body) -> None:
        if not body["ok"]:
            self.outcome = RoundOutcome(status="rejected:%s" % body["reason"])
            self.halted = True
            return
        self.registered = True
        self.registry_ordinal = int(body["registry"])
        self.gateway_key = body["gateway"]
        self.barrier.barrier_enter(Phase.REGISTRATION)

    # -- phase progression ---------------------------------------------------------

    def _on_barrier(self, ctx: ProcessContext, phase: Phase, roster: list) -> None:
        self.roster = roster
        self.barrier.mark_announced(phase)
        if self.outcome is not None:  # an exclusion verdict already stands
            self.halted = True
            return
        mine = next((r for r in roster if r["pid"] == self.pid.key()), None)
        if mine is not None and mine["status"] == SILENT:
            self._finish(ctx, RoundOutcome(status="excluded:scheme-timeout"))
            return
        if phase == Phase.REGISTRATION:
            if self.scripted_type is not None:
                self.broadcast_type(ctx, self.scripted_type)
        elif phase == Phase.TYPE_BROADCAST:
            self._after_type_barrier(ctx)
        elif phase == Phase.SCHEME_EXCHANGE:
            self._maybe_police(ctx)
        elif phase == Phase.SETTLEMENT:
            self._settlement_done(ctx)

    def broadcast_type(self, ctx: ProcessContext, value) -> None:
        """Announce the (already validated) private type to the overlay."""
        if not self.registered or not self.barrier.announced(Phase.REGISTRATION):
            raise PhaseViolation("type broadcast before registration closed")
        if self.barrier.announced(Phase.TYPE_BROADCAST):
            raise PhaseViolation("type broadcast after the phase barrier")
        if self.submitted_type:
            raise PhaseViolation("one type announcement per phase")
        mechlib.validate_type_value(self.mechanism_id, self.mechanism_params, value)
        self.submitted_type = True
        self._send(ctx, Phase.TYPE_BROADCAST, "announce-type",
                   {"value": type_value_to_wire(self.mechanism_id, value)})
        self.barrier.barrier_enter(Phase.TYPE_BROADCAST)

    def submit_type(self, value) -> None:
        """Interactive entry point (driven by the gateway between ticks)."""
        if self._ctx is None:
            raise ProtocolError("process not attached")
        self.broadcast_type(self._ctx, value)

    def _after_type_barrier(self, ctx: ProcessContext) -> None:
        expected = {r["pid"] for r in self.roster if r["has_type"]}
        missing = sorted(expected - set(self.type_roster))
        if missing:
            self._pending_resupply = True
            self._send(ctx, Phase.SCHEME_EXCHANGE, "resupply-request",
                       {"missing": missing})
            return
        self._compute_round(ctx, 1)

    def _on_resupply_reply(self, ctx: ProcessContext, body) -> None:
        if not self._pending_resupply:
            return
        self._pending_resupply = False
        for key, value in body["found"].items():
            self.type_roster.setdefault(key, value)
        # ids absent from every cache are excluded by the roster rule
        self._compute_round(ctx, 1)

    # -- the redundant computation ----------------------------------------------------

    def _included_pids(self) -> list[str]:
        keys = [r["pid"] for r in self.roster
                if r["has_type"] and r["pid"] in self.type_roster
                and r["pid"] not in self.excluded]
        return sorted(keys, key=ProcessId.from_key)

    def _live_scheme_senders(self) -> set[str]:
        return {r["pid"] for r in self.roster
                if r["status"] == LIVE and r["pid"] not in self.excluded
                and r["pid"] in self._included_pids()}

    def _compute_round(self, ctx: ProcessContext, round_no: int) -> None:
        self.round = round_no
        pids = self._included_pids()
        if not pids:
            self._finish(ctx, RoundOutcome(status="aborted:empty-roster"))
            return
        try:
            values = [type_value_from_wire(self.mechanism_id, self.type_roster[k])
                      for k in pids]
            problem = build_problem(self.mechanism_id, self.mechanism_params,
                                    len(pids))
            joint = JointType.from_values(values)
            decision = problem.decide(joint)
            taxes = tax_vector(problem, joint)
            scheme = settle(taxes)
        except ConfigError as exc:
            # e.g. crashes shrank the roster below the item count: the
            # instance no longer validates and the round cannot proceed
            self._finish(ctx, RoundOutcome(status="aborted:config: %s" % exc))
            return
        wire = {
            "round": round_no,
            "roster": pids,
            "decision": self._decision_wire(decision),
            "taxes": [encode_rational(t) for t in taxes],
            "transfers": scheme.to_wire(),
        }
        self.final_wire = wire
        dispatch = self._tampered(wire) if self._tamper_round(round_no) else wire
        if self._behavior_kind() == "silent-scheme" and self._tamper_round(round_no):
            return  # never dispatches; the registry deadline waives us
        self._send(ctx, Phase.SCHEME_EXCHANGE, "submit-scheme",
                   {"round": round_no, "scheme": dispatch})
        if self._behavior_kind() == "duplicate-scheme" and self._tamper_round(round_no):
            second = self._tampered(wire, force="inflate-own-rebate")
            self._send(ctx, Phase.SCHEME_EXCHANGE, "submit-scheme",
                       {"round": round_no, "scheme": second})
        if round_no == 1 and not self.barrier.local_done(Phase.SCHEME_EXCHANGE):
            self.barrier.barrier_enter(Phase.SCHEME_EXCHANGE)
        self.awaiting_round = round_no
        self.expected_schemes = self._live_scheme_senders()
        self._maybe_police(ctx)

    def _decision_wire(self, decision):
        if isinstance(decision, tuple):
            return list(decision)
        return decision

    # -- byzantine scripting (application-level only) -----------------------------------

    def _behavior_kind(self) -> Optional[str]:
        return self.behavior.get("tamper")

    def _tamper_round(self, round_no: int) -> bool:
        if not self.behavior.get("tamper"):
            return False
        return round_no in self.behavior.get("rounds", [1])

    def _my_index(self, wire: dict) -> int:
        return wire["roster"].index(self.pid.key()) + 1

    def _tampered(self, wire: dict, force: Optional[str] = None) -> dict:
        kind = force or self._behavior_kind()
        if kind == "duplicate-scheme" and force is None:
            return wire  # first submission stays honest; the duplicate differs
        tampered = decode_canonical(encode_canonical(wire))  # deep copy
        me = self._my_index(wire)
        others = [i for i in range(1, len(wire["roster"]) + 1) if i != me]
        if not others:
            return tampered  # nobody to steal from in a singleton roster
        transfers = tampered["transfers"]
        if kind in ("inflate-own-rebate", "duplicate-scheme"):
            hit = False
            for t in transfers:
                if t[1] == me:
                    t[2] = encode_rational(rational(t[2]) + 1)
                    hit = True
            if not hit:
                transfers.append([others[0], me, "7/1"])
        elif kind == "redirect-payee":
            hit = False
            for t in transfers:
                if t[1] != me and t[1] != COLLECTOR:
                    t[1] = me
                    hit = True
                    break
            if not hit:
                transfers.append([others[0], me, "5/1"])
        return tampered

    # -- policing and recomputation --------------------------------------------------------

    def _maybe_police(self, ctx: ProcessContext) -> None:
        if self.awaiting_round is None or self.halted:
            return
        if self.awaiting_round == 1 and not self.barrier.announced(Phase.SCHEME_EXCHANGE):
            return
        round_no = self.awaiting_round
        have = {k for (r, k) in self.received_schemes if r == round_no}
        if not self.expected_schemes <= have:
            return
        self.awaiting_round = None
        self._police(ctx, round_no)

    def _police(self, ctx: ProcessContext, round_no: int) -> None:
        own_bytes = encode_canonical(self.final_wire)
        dishonest: list[str] = []
        for key in sorted(self.expected_schemes, key=ProcessId.from_key):
            theirs = self.received_schemes[(round_no, key)]
            verdict = HONEST if encode_canonical(theirs) == own_bytes else DISHONEST
            self.verdicts[key] = verdict
            if verdict == DISHONEST:
                dishonest.append(key)
        ctx.trace("verdict", {"pid": self.pid.key(), "round": round_no,
                              "dishonest": dishonest})
        if not dishonest:
            self._settle_and_transfer(ctx)
            return
        self.excluded.extend(dishonest)
        if self.pid.key() in dishonest:
            # our own dispatched bytes differ from what we computed: this
            # process has been excluded by everyone, including itself
            self.barrier.barrier_enter(Phase.SETTLEMENT)
            self.outcome = RoundOutcome(status="excluded:policing")
            return
        if len(self._included_pids()) == 0 or round_no >= len(self.roster):
            self._finish(ctx, RoundOutcome(status="aborted:no-honest-roster"))
            return
        self._compute_round(ctx, round_no + 1)

    # -- settlement ---------------------------------------------------------------------------

    def _settle_and_transfer(self, ctx: ProcessContext) -> None:
        wire = self.final_wire
        roster = wire["roster"]
        me = self._my_index(wire)
        statuses = {r["pid"]: r["status"] for r in self.roster}
        for payer, payee, amount in wire["transfers"]:
            if payer != me:
                continue
            if payee == COLLECTOR:
                self._send(ctx, Phase.SETTLEMENT, "transfer",
                           {"payee": "collector", "amount": amount})
                continue
            payee_key = roster[payee - 1]
            if statuses.get(payee_key) != LIVE or payee_key in self.excluded:
                self.faults.append("skipped transfer to non-live %s" % payee_key)
                continue
            self._send(ctx, Phase.SETTLEMENT, "transfer",
                       {"payee": payee_key, "amount": amount})
        if not self.barrier.local_done(Phase.SETTLEMENT):
            self.barrier.barrier_enter(Phase.SETTLEMENT)

    def _settlement_done(self, ctx: ProcessContext) -> None:
        wire = self.final_wire
        me = self._my_index(wire)
        expected_in = {}
        statuses = {r["pid"]: r["status"] for r in self.roster}
        for payer, payee, amount in wire["transfers"]:
            if payee == me:
                payer_key = wire["roster"][payer - 1]
                if statuses.get(payer_key) == LIVE and payer_key not in self.excluded:
                    expected_in[payer_key] = amount
        got = {p: a for p, a in self.receipts}
        for payer_key, amount in sorted(expected_in.items()):
            if got.get(payer_key) != amount:
                self.faults.append("missing transfer %s from %s"
                                   % (amount, payer_key))
        own_transfers = [t for t in wire["transfers"] if t[0] == me or t[1] == me]
        outcome = RoundOutcome(
            status="done",
            decision=wire["decision"],
            taxes=wire["taxes"],
            scheme=wire["transfers"],
            roster=list(wire["roster"]),
            verdicts=dict(self.verdicts),
            excluded=list(self.excluded),
            rounds=self.round,
            receipts=list(self.receipts),
            faults=list(self.faults),
            own_tax=wire["taxes"][me - 1],
            own_transfers=own_transfers,
        )
        self._finish(ctx, outcome)

    def _finish(self, ctx: ProcessContext, outcome: RoundOutcome) -> None:
        self.outcome = outcome
        self.halted = True
        ctx.trace("outcome", {"pid": self.pid.key(), "status": outcome.status})

    def _on_suspect_notice(self, ctx: ProcessContext, body) -> None:
        for r in self.roster:
            if r["pid"] == body["pid"]:
                r["status"] = body["status"]
        if self.awaiting_round is not None:
            self.expected_schemes.discard(body["pid"])
            self._maybe_police(ctx)


class TaxCollectorProcess(Process):
    """Passive once registered: receives payments, sends no protocol
    messages. Registration goes through its own interface so registries
    learn the collector's address without ever adding it to a roster."""

    def __init__(self, pid: ProcessId, session: str, registry: ProcessId):
        self.pid = pid
        self.session = session
        self.registry = registry
        self.ledger: list[tuple[str, str, Fraction]] = []

    def on_start(self, ctx: ProcessContext) -> None:
        ctx.send(self.registry, Phase.REGISTRATION, "collector-sign-in", {})

    def on_message(self, ctx: ProcessContext, env: Envelope) -> None:
        if env.kind == "collect":
            body = decode_canonical(env.payload)
            amount = rational(body["amount"])
            self.ledger.append((self.session, body["payer"], amount))
            ctx.trace("transfer", {"payer": body["payer"], "payee": "collector",
                                   "amount": body["amount"]})
        elif env.kind == "token-visit":
            # the collector is outside rosters and barriers; answering with a
            # plain echo keeps misconfigured probes from wedging a wave
            ctx.send(env.src, env.phase, "token-return",
                     decode_canonical(env.payload))

    def total(self) -> Fraction:
        return sum((a for _, _, a in self.ledger), Fraction(0))


class SessionDriverProcess(Process):
    """Harness-side participant: holds the registration barrier open until
    the scenario's spawn schedule (and any interactive slots) are used up."""

    def __init__(self, pid: ProcessId):
        self.pid = pid
        self.registration_complete = False

    def on_message(self, ctx: ProcessContext, env: Envelope) -> None:
        if env.kind != "token-visit":
            return
        token = dtd.TokenWave.from_wire(decode_canonical(env.payload))
        done = (env.phase != Phase.REGISTRATION) or self.registration_complete
        token = dtd.amend_token(token, 0, False, done)
        ctx.send(env.src, env.phase, "token-return", token.to_wire())
