"""Turning a tax vector into concrete payer -> payee transfers.

Every replica settles the same tax vector into the byte-identical
canonical scheme: debtors (negative tax) in ascending index order pay
creditors (positive tax) in ascending index order, splitting amounts as
needed; whatever debtor money is left over goes to the tax collector.
The collector is party 0 in the wire form and sorts after all players.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import SettlementError

COLLECTOR = 0  # party id of the tax collector in transfer records


def _party_key(party: int) -> tuple[int, int]:
    # players by index, collector after everyone
    return (1, 0) if party == COLLECTOR else (0, party)


@dataclass(frozen=True)
class Transfer:
    payer: int
    payee: int
    amount: Fraction

    def to_wire(self) -> list:
        from .rational import encode_rational
        return [self.payer, self.payee, encode_rational(self.amount)]


@dataclass(frozen=True)
class TaxScheme:
    """Canonical transfer list: sorted by (payer, payee), no zero amounts,
    at most one entry per (payer, payee) pair."""

    transfers: tuple[Transfer, ...]

    @classmethod
    def from_entries(cls, entries: Sequence[tuple[int, int, Fraction]]) -> "TaxScheme":
        merged: dict[tuple[int, int], Fraction] = {}
        for payer, payee, amount in entries:
            if amount < 0:
                raise SettlementError("transfer amounts must be positive")
            if payer == payee:
                raise SettlementError("self-transfers are meaningless")
            key = (payer, payee)
            merged[key] = merged.get(key, Fraction(0)) + amount
        ordered = sorted(((p, q, a) for (p, q), a in merged.items() if a != 0),
                         key=lambda t: (_party_key(t[0]), _party_key(t[1])))
        return cls(tuple(Transfer(p, q, a) for p, q, a in ordered))

    def net_positions(self, indices: Sequence[int]) -> dict[int, Fraction]:
        """Incoming minus outgoing per party, for the given player indices
        plus the collector."""
        nets = {i: Fraction(0) for i in indices}
        nets[COLLECTOR] = Fraction(0)
        for t in self.transfers:
            nets[t.payer] = nets.get(t.payer, Fraction(0)) - t.amount
            nets[t.payee] = nets.get(t.payee, Fraction(0)) + t.amount
        return nets

    def to_wire(self) -> list:
        return [t.to_wire() for t in self.transfers]

    @classmethod
    def from_wire(cls, payload: list) -> "TaxScheme":
        from .rational import rational
        entries = [(int(p), int(q), rational(a)) for p, q, a in payload]
        return cls.from_entries(entries)


def settle(taxes: Sequence[Fraction], indices: Sequence[int] | None = None) -> TaxScheme:
    """Greedy canonical settlement of a feasible tax vector.

    `indices` names the player index of each tax entry (defaults to
    1..n); a positive total would mint money and raises SettlementError.
    """
    idx = list(indices) if indices is not None else list(range(1, len(taxes) + 1))
    if len(idx) != len(taxes):
        raise SettlementError("one index per tax entry required")
    total = sum(taxes, Fraction(0))
    if total > 0:
        raise SettlementError("infeasible tax vector: sum %s > 0" % total)
    debtors = [[i, -t] for i, t in zip(idx, taxes) if t < 0]
    creditors = [[i, t] for i, t in zip(idx, taxes) if t > 0]
    entries: list[tuple[int, int, Fraction]] = []
    ci = 0
    for debtor, owed in debtors:
        while owed > 0 and ci < len(creditors):
            creditor, due = creditors[ci]
            paid = min(owed, due)
            entries.append((debtor, creditor, paid))
            owed -= paid
            creditors[ci][1] = due - paid
            if creditors[ci][1] == 0:
                ci += 1
        if owed > 0:
            entries.append((debtor, COLLECTOR, owed))
    return TaxScheme.from_entries(entries)
