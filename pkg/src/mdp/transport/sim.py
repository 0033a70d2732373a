"""Deterministic simulated network.

One single-threaded scheduler advances integer ticks and hands due
envelopes to process handlers in a fixed order; per-message latency is
the shortest host path plus a seeded jitter draw, which makes delivery
reliable but deliberately not order-preserving. Identical (seed,
scenario) pairs replay the identical event sequence, byte for byte.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from random import Random
from typing import Callable, Optional

from ..errors import ConfigError, TransportClosed, UnknownTarget
from ..harness.encoding import encode_canonical
from .ids import CONTROL_KINDS, Envelope, Phase, ProcessId, SendReceipt, is_basic


@dataclass(frozen=True)
class Topology:
    hosts: tuple[str, ...]
    edges: tuple[tuple[str, str, int], ...]  # (host_a, host_b, latency)

    def validate(self) -> None:
        seen = set(self.hosts)
        if len(seen) != len(self.hosts):
            raise ConfigError("duplicate host ids")
        for a, b, lat in self.edges:
            if a not in seen or b not in seen:
                raise ConfigError("edge (%s, %s) references unknown host" % (a, b))
            if a == b:
                raise ConfigError("self-loop edge on %s" % a)
            if lat < 0:
                raise ConfigError("negative latency on (%s, %s)" % (a, b))
        if not self.is_connected():
            raise ConfigError("topology not connected")

    def is_connected(self) -> bool:
        if not self.hosts:
            return False
        adj: dict[str, list[str]] = {h: [] for h in self.hosts}
        for a, b, _ in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = {self.hosts[0]}
        stack = [self.hosts[0]]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.hosts)

    def distances(self, extra: dict[frozenset, int] | None = None) -> dict[tuple[str, str], int]:
        """All-pairs shortest path by total edge latency (Floyd-Warshall)."""
        INF = 10 ** 9
        hosts = list(self.hosts)
        dist = {(a, b): (0 if a == b else INF) for a in hosts for b in hosts}
        for a, b, lat in self.edges:
            lat = lat + (extra or {}).get(frozenset((a, b)), 0)
            key_ab, key_ba = (a, b), (b, a)
            if lat < dist[key_ab]:
                dist[key_ab] = dist[key_ba] = lat
        for k in hosts:
            for a in hosts:
                dak = dist[(a, k)]
                if dak >= INF:
                    continue
                for b in hosts:
                    alt = dak + dist[(k, b)]
                    if alt < dist[(a, b)]:
                        dist[(a, b)] = alt
        return dist

    def max_latency(self) -> int:
        return max((lat for _, _, lat in self.edges), default=1)


# --- fault scripts ---------------------------------------------------------

@dataclass(frozen=True)
class CrashProcess:
    target: ProcessId


@dataclass(frozen=True)
class DropNextMessage:
    src: ProcessId
    dst: ProcessId


@dataclass(frozen=True)
class DelayEdge:
    host_a: str
    host_b: str
    extra_ticks: int


@dataclass
class FaultScript:
    entries: list[tuple[int, object]] = field(default_factory=list)

    def validate(self, lossy: bool) -> None:
        for tick, action in self.entries:
            if tick < 0:
                raise ConfigError("fault tick must be >= 0")
            if isinstance(action, DropNextMessage) and not lossy:
                raise ConfigError("DropNextMessage requires a lossy-mode scenario")


# --- process plumbing ------------------------------------------------------

class Process:
    """Message-driven state machine; handlers must not block."""

    pid: ProcessId

    def on_start(self, ctx: "ProcessContext") -> None:
        pass

    def on_message(self, ctx: "ProcessContext", env: Envelope) -> None:
        pass


class ProcessContext:
    """Per-process transport handle. Stamps the source id itself, so a
    process cannot send on behalf of anybody else."""

    def __init__(self, net: "SimNetwork", pid: ProcessId):
        self._net = net
        self.pid = pid

    @property
    def now(self) -> int:
        return self._net.now

    def send(self, dst: ProcessId, phase: Phase, kind: str, body) -> SendReceipt:
        return self._net.send_from(self.pid, dst, phase, kind, body)

    def schedule(self, delay: int, body) -> None:
        """Deliver a 'wake' control message to self after delay ticks."""
        self._net.schedule_wake(self.pid, delay, body)

    def report_barrier(self, phase: Phase, round_no: int, detail: dict) -> None:
        self._net.note_barrier(self.pid, phase, round_no, detail)

    def trace(self, kind: str, detail: dict) -> None:
        self._net.note_event(kind, detail)


class SimNetwork:
    """The LLC layer in simulated form plus the omniscient test oracle."""

    def __init__(self, topology: Topology, seed: int, session: str,
                 jitter: int = 3, lossy: bool = False):
        topology.validate()
        self.topology = topology
        self.session = session
        self.rng = Random(seed)
        self.jitter = jitter
        self.lossy = lossy
        self.now = 0
        self.closed = False
        self._heap: list[tuple[int, int, Envelope]] = []
        self._enqueue_seq = 0
        self._procs: dict[ProcessId, Process] = {}
        self._ctxs: dict[ProcessId, ProcessContext] = {}
        self._hosts: dict[ProcessId, str] = {}
        self._crashed: set[ProcessId] = set()
        self._send_seq: dict[tuple[ProcessId, ProcessId], int] = {}
        self._delivered_seqs: dict[tuple[ProcessId, ProcessId], set[int]] = {}
        self._edge_delay: dict[frozenset, int] = {}
        self._dist = topology.distances()
        self._drop_next: set[tuple[ProcessId, ProcessId]] = set()
        self.trace: list[dict] = []
        self.violations: list[str] = []
        self.barrier_watch: Optional[Callable[[Phase, int, dict], None]] = None

    # -- membership ---------------------------------------------------------

    def attach(self, proc: Process, host: str) -> ProcessContext:
        if host not in self.topology.hosts:
            raise ConfigError("host %r not in topology" % host)
        if proc.pid in self._procs:
            raise ConfigError("process id %s attached twice" % proc.pid)
        self._procs[proc.pid] = proc
        self._hosts[proc.pid] = host
        ctx = ProcessContext(self, proc.pid)
        self._ctxs[proc.pid] = ctx
        proc.on_start(ctx)
        return ctx

    def crash(self, pid: ProcessId) -> None:
        """Crash-stop: idempotent; in-flight messages TO pid die at delivery,
        messages already sent BY pid stay in flight."""
        if pid in self._crashed:
            return
        if pid not in self._procs:
            raise UnknownTarget(str(pid))
        self._crashed.add(pid)
        self.note_event("crash", {"pid": pid.key()})

    def is_crashed(self, pid: ProcessId) -> bool:
        return pid in self._crashed

    # -- sending ------------------------------------------------------------

    def send_from(self, src: ProcessId, dst: ProcessId, phase: Phase,
                  kind: str, body) -> SendReceipt:
        if self.closed:
            raise TransportClosed("transport shut down")
        if dst not in self._procs:
            raise UnknownTarget(str(dst))
        key = (src, dst)
        seq = self._send_seq.get(key, 0) + 1
        self._send_seq[key] = seq
        payload = encode_canonical(body)
        env = Envelope(src=src, dst=dst, session=self.session, phase=phase,
                       kind=kind, seq=seq, payload=payload)
        if key in self._drop_next:
            self._drop_next.discard(key)
            self.note_event("send", {"src": src.key(), "dst": dst.key(),
                                     "phase": phase.value, "msg": kind,
                                     "seq": seq, "dropped": True})
            return SendReceipt(dst=dst, seq=seq, enqueued_at=self.now)
        latency = self._latency(src, dst)
        heapq.heappush(self._heap, (self.now + latency, self._enqueue_seq, env))
        self._enqueue_seq += 1
        self.note_event("send", {"src": src.key(), "dst": dst.key(),
                                 "phase": phase.value, "msg": kind, "seq": seq})
        return SendReceipt(dst=dst, seq=seq, enqueued_at=self.now)

    def schedule_wake(self, pid: ProcessId, delay: int, body) -> None:
        if delay < 1:
            delay = 1
        env = Envelope(src=pid, dst=pid, session=self.session,
                       phase=Phase.CONTROL, kind="wake", seq=0,
                       payload=encode_canonical(body))
        heapq.heappush(self._heap, (self.now + delay, self._enqueue_seq, env))
        self._enqueue_seq += 1

    def _latency(self, src: ProcessId, dst: ProcessId) -> int:
        base = self._dist[(self._hosts[src], self._hosts[dst])]
        jit = self.rng.randrange(self.jitter + 1) if self.jitter else 0
        return max(1, base + jit)

    # -- the clock ----------------------------------------------------------

    def deliver_tick(self) -> list[tuple[ProcessId, Envelope]]:
        """Advance one tick; deliver everything due; return what was handed
        to live processes (wake timers excluded)."""
        self.now += 1
        delivered: list[tuple[ProcessId, Envelope]] = []
        while self._heap and self._heap[0][0] <= self.now:
            _, _, env = heapq.heappop(self._heap)
            if env.dst in self._crashed:
                continue  # discarded at delivery time
            if env.kind != "wake":
                key = (env.src, env.dst)
                seen = self._delivered_seqs.setdefault(key, set())
                if env.seq in seen:
                    continue  # duplicate suppressed at the receiver
                seen.add(env.seq)
                self.note_event("deliver", {"src": env.src.key(),
                                            "dst": env.dst.key(),
                                            "phase": env.phase.value,
                                            "msg": env.kind, "seq": env.seq})
                delivered.append((env.dst, env))
            proc = self._procs[env.dst]
            proc.on_message(self._ctxs[env.dst], env)
        return delivered

    def pending_count(self) -> int:
        return len(self._heap)

    def quiescent(self) -> bool:
        return not self._heap

    # -- faults -------------------------------------------------------------

    def apply_fault(self, action) -> None:
        if isinstance(action, CrashProcess):
            self.crash(action.target)
        elif isinstance(action, DropNextMessage):
            if not self.lossy:
                raise ConfigError("drop faults are rejected in reliable mode")
            self._drop_next.add((action.src, action.dst))
        elif isinstance(action, DelayEdge):
            edge = frozenset((action.host_a, action.host_b))
            self._edge_delay[edge] = self._edge_delay.get(edge, 0) + action.extra_ticks
            self._dist = self.topology.distances(self._edge_delay)
        else:
            raise ConfigError("unknown fault action %r" % (action,))

    # -- omniscient oracle + tracing -----------------------------------------

    def note_event(self, kind: str, detail: dict) -> None:
        entry = {"tick": self.now, "kind": kind}
        entry.update(detail)
        self.trace.append(entry)

    def note_barrier(self, initiator: ProcessId, phase: Phase, round_no: int,
                     detail: dict) -> None:
        pending = self._pending_basic(phase)
        if pending:
            self.violations.append(
                "barrier %s/%d announced with %d undelivered basic messages"
                % (phase.value, round_no, len(pending)))
        self.note_event("barrier-announce", {"phase": phase.value,
                                             "round": round_no, **detail})
        if self.barrier_watch is not None:
            self.barrier_watch(phase, round_no, detail)

    def _pending_basic(self, phase: Phase) -> list[Envelope]:
        out = []
        for _, _, env in self._heap:
            if env.phase != phase or not is_basic(env.kind):
                continue
            if env.dst in self._crashed:
                continue  # will be discarded, can never be delivered
            out.append(env)
        return out

    def close(self) -> None:
        self.closed = True
