"""Process identity and message envelopes.

Ids are generated locally (no network round trip): each registry owns a
partition of the (registry_ordinal, local_counter) namespace, and a
64-bit nonce guards against replay across sessions. The transport
stamps envelope sources itself, so a process cannot forge a sender.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import ConfigError

COUNTER_LIMIT = 2 ** 32


@dataclass(frozen=True, order=True)
class ProcessId:
    registry_ordinal: int
    local_counter: int
    nonce: int

    def key(self) -> str:
        return "%d.%d.%d" % (self.registry_ordinal, self.local_counter, self.nonce)

    @classmethod
    def from_key(cls, key: str) -> "ProcessId":
        o, c, n = key.split(".")
        return cls(int(o), int(c), int(n))

    def to_wire(self) -> str:
        return self.key()

    def __str__(self) -> str:
        return self.key()


class IdGenerator:
    """Counter state owned by exactly one registry (or the session boot)."""

    def __init__(self, registry_ordinal: int, rng):
        if registry_ordinal < 0:
            raise ConfigError("registry ordinal must be non-negative")
        self.registry_ordinal = registry_ordinal
        self._counter = 0
        self._rng = rng

    def new_process_id(self) -> ProcessId:
        if self._counter >= COUNTER_LIMIT:
            raise ConfigError("process id counter overflow at registry %d"
                              % self.registry_ordinal)
        pid = ProcessId(self.registry_ordinal, self._counter,
                        self._rng.getrandbits(64))
        self._counter += 1
        return pid


class Phase(str, enum.Enum):
    REGISTRATION = "registration"
    TYPE_BROADCAST = "type-broadcast"
    SCHEME_EXCHANGE = "scheme-exchange"
    SETTLEMENT = "settlement"
    CONTROL = "control"

    def __str__(self) -> str:  # keep trace records compact
        return self.value


# message kinds that never count as basic traffic for termination
# detection: token machinery, barrier announcements, self-timers, the
# sign-in handshake (its sender is not a participant yet) and collector
# deliveries (the collector is outside rosters and barriers).
CONTROL_KINDS = frozenset({
    "token", "token-visit", "token-return", "announce", "announce-deliver",
    "wake", "sign-in", "sign-in-reply", "scheme-reject", "collect",
    "collector-sign-in", "outcome",
})


def is_basic(kind: str) -> bool:
    return kind not in CONTROL_KINDS


@dataclass(frozen=True)
class Envelope:
    src: ProcessId
    dst: ProcessId
    session: str
    phase: Phase
    kind: str
    seq: int
    payload: bytes

    def to_wire(self) -> dict:
        return {
            "src": self.src.key(),
            "dst": self.dst.key(),
            "session": self.session,
            "phase": self.phase.value,
            "kind": self.kind,
            "seq": self.seq,
            "payload": self.payload.decode("utf-8"),
        }

    @classmethod
    def from_wire(cls, tree: dict) -> "Envelope":
        return cls(
            src=ProcessId.from_key(tree["src"]),
            dst=ProcessId.from_key(tree["dst"]),
            session=tree["session"],
            phase=Phase(tree["phase"]),
            kind=tree["kind"],
            seq=int(tree["seq"]),
            payload=tree["payload"].encode("utf-8"),
        )


@dataclass(frozen=True)
class SendReceipt:
    dst: ProcessId
    seq: int
    enqueued_at: int
