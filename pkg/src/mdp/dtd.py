"""Distributed termination detection and barrier synchronization.

A colored token circulates a logical ring of infrastructure processes
(gateways, registries, the session driver); at every registry the token
additionally visits each signed-in player, who applies the classic
update: add its sent-minus-received delta to the count, blacken the
token if it received a basic message since its last visit (a process
that has not finished its phase work blackens too, since it is still
active). The anonymous initiator announces the barrier after two
consecutive waves that return white, with count zero and an unchanged
roster digest. Crash suspicion: a participant that fails to hand the
token back within the timeout is suspected, the ring heals around it,
and later waves run over the reduced roster.

Tokens carry exactly four fields (wave number, count, color, roster
digest) and nothing identifying the initiator.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from fractions import Fraction  # noqa: F401  (kept out of token fields on purpose)

from .errors import ProtocolError
from .transport.ids import Phase, ProcessId, is_basic

WHITE = "white"
BLACK = "black"

# the per-phase barriers, in protocol order
BARRIER_SEQUENCE = (Phase.REGISTRATION, Phase.TYPE_BROADCAST,
                    Phase.SCHEME_EXCHANGE, Phase.SETTLEMENT)


@dataclass(frozen=True)
class TokenWave:
    wave_number: int
    count: int
    color: str
    roster_digest: str

    def to_wire(self) -> list:
        return [self.wave_number, self.count, self.color, self.roster_digest]

    @classmethod
    def from_wire(cls, tree: list) -> "TokenWave":
        wave, count, color, digest = tree
        return cls(int(wave), int(count), str(color), str(digest))


def fold_digest(digest: str, pids: list[ProcessId]) -> str:
    h = hashlib.sha256(digest.encode("ascii"))
    for pid in pids:
        h.update(pid.key().encode("ascii"))
        h.update(b";")
    return h.hexdigest()[:16]


class SafraCounter:
    """Per-phase basic-message accounting with crash-suspicion exclusion.

    Tracks sent/received counts per counterpart so that a suspected
    process's whole contribution can be dropped: afterwards the global
    sum again equals the number of basic messages in flight between
    live participants only.
    """

    def __init__(self):
        self._sent: dict[Phase, dict[ProcessId, int]] = {}
        self._recv: dict[Phase, dict[ProcessId, int]] = {}
        self._excluded: set[ProcessId] = set()
        self.black = False

    def note_send(self, phase: Phase, dst: ProcessId, kind: str) -> None:
        if not is_basic(kind):
            return
        bucket = self._sent.setdefault(phase, {})
        bucket[dst] = bucket.get(dst, 0) + 1

    def note_recv(self, phase: Phase, src: ProcessId, kind: str) -> None:
        if not is_basic(kind):
            return
        bucket = self._recv.setdefault(phase, {})
        bucket[src] = bucket.get(src, 0) + 1
        self.black = True

    def exclude(self, pid: ProcessId) -> None:
        self._excluded.add(pid)

    def delta(self, phase: Phase) -> int:
        sent = sum(n for pid, n in self._sent.get(phase, {}).items()
                   if pid not in self._excluded)
        recv = sum(n for pid, n in self._recv.get(phase, {}).items()
                   if pid not in self._excluded)
        return sent - recv

    def take_black(self) -> bool:
        """Report and clear the black flag (token has just visited us)."""
        was = self.black
        self.black = False
        return was


class BarrierState:
    """Per-process view of barrier progression."""

    def __init__(self):
        self._done: set[tuple[Phase, int]] = set()
        self._announced: set[tuple[Phase, int]] = set()
        self.suspected_crashed: set[ProcessId] = set()

    def barrier_enter(self, phase: Phase, round_no: int = 1) -> None:
        key = (phase, round_no)
        if key in self._done:
            raise ProtocolError("barrier_enter(%s) called twice" % (phase,))
        self._done.add(key)

    def local_done(self, phase: Phase, round_no: int = 1) -> bool:
        return (phase, round_no) in self._done

    def mark_announced(self, phase: Phase, round_no: int = 1) -> None:
        self._announced.add((phase, round_no))

    def announced(self, phase: Phase, round_no: int = 1) -> bool:
        return (phase, round_no) in self._announced


def amend_token(token: TokenWave, delta: int, black: bool, done: bool) -> TokenWave:
    """The on_token update applied by every participant the token visits."""
    color = BLACK if (token.color == BLACK or black or not done) else WHITE
    return replace(token, count=token.count + delta, color=color)


class InitiatorState:
    """Wave bookkeeping for the (anonymous) initiator.

    Announces after two consecutive waves that are white, sum to zero
    and carry the same roster digest. Wave numbers increase across the
    whole session, so stale tokens are recognized everywhere.
    """

    def __init__(self):
        self.wave = 0
        self.prev_clean_digest: str | None = None
        self.barrier_index = 0

    def current_phase(self) -> Phase | None:
        if self.barrier_index >= len(BARRIER_SEQUENCE):
            return None
        return BARRIER_SEQUENCE[self.barrier_index]

    def next_wave(self) -> int:
        self.wave += 1
        return self.wave

    def evaluate(self, token: TokenWave) -> str:
        """'announce' | 'restart' for a returned wave."""
        clean = token.color == WHITE and token.count == 0
        if clean and self.prev_clean_digest == token.roster_digest:
            self.prev_clean_digest = None
            self.barrier_index += 1
            return "announce"
        self.prev_clean_digest = token.roster_digest if clean else None
        return "restart"
