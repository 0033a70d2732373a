"""Decision problems, efficient rules, Groves/VCG taxes.

A decision problem bundles a finite decision space, per-player utility
functions, an efficient decision rule and (for Groves mechanisms) the
offset term of the tax formula. Concrete mechanisms plug in specialized
maximizers; everything here is pure and exact, so any number of player
processes can evaluate the same problem and agree byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from ..errors import ConfigError

TypeValue = object  # mechanism-specific: Fraction, tuple of Fractions, ...
Decision = object   # mechanism-specific canonical value, see mechanisms.py


@dataclass(frozen=True)
class JointType:
    """Ordered (player_index, type_value) pairs, indices 1..n ascending."""

    entries: tuple[tuple[int, TypeValue], ...]

    def __post_init__(self):
        indices = [i for i, _ in self.entries]
        if not indices:
            raise ConfigError("joint type needs at least one player")
        if indices != sorted(set(indices)) or indices[0] < 1:
            raise ConfigError("player indices must be distinct, ascending, >= 1")

    @classmethod
    def from_values(cls, values: Iterable[TypeValue]) -> "JointType":
        return cls(tuple((i + 1, v) for i, v in enumerate(values)))

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def value_of(self, player: int) -> TypeValue:
        for i, v in self.entries:
            if i == player:
                return v
        raise KeyError(player)

    def without(self, player: int) -> "JointType":
        kept = tuple((i, v) for i, v in self.entries if i != player)
        if not kept:
            raise ConfigError("removing player %d empties the joint type" % player)
        return JointType(kept)

    def replace(self, player: int, value: TypeValue) -> "JointType":
        return JointType(tuple((i, value if i == player else v) for i, v in self.entries))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DecisionProblem:
    """A mechanism: decisions, utilities, decision rule, Groves offset.

    decide must be deterministic and efficient (canonical tie-breaking);
    max_welfare(joint) is the specialized maximizer used for VCG offsets;
    enumerate_decisions powers generic argmax checks in tests and the
    negative-control mechanisms.
    """

    mechanism_id: str
    utility: Callable[[Decision, int, TypeValue], Fraction]
    decide: Callable[[JointType], Decision]
    max_welfare: Callable[[JointType], Fraction]
    enumerate_decisions: Callable[[JointType], Iterable[Decision]]
    groves_offset: Optional[Callable[[int, JointType], Fraction]] = None
    taxes_override: Optional[Callable[["DecisionProblem", JointType], tuple]] = None
    validate_type: Callable[[TypeValue], None] = field(default=lambda v: None)


def total_utility(p: DecisionProblem, d: Decision, joint: JointType) -> Fraction:
    return sum((p.utility(d, i, v) for i, v in joint.entries), Fraction(0))


def decide_efficient(p: DecisionProblem, joint: JointType) -> Decision:
    """The decision rule f: canonical welfare maximizer."""
    for _, v in joint.entries:
        p.validate_type(v)
    return p.decide(joint)


def vcg_offset(p: DecisionProblem, i: int, others: JointType) -> Fraction:
    """Clarke pivot term: negated best welfare attainable by the others."""
    return -p.max_welfare(others)


def groves_tax(p: DecisionProblem, joint: JointType, i: int) -> Fraction:
    """tax_i = offset_i(others) + total utility of the others under f."""
    if p.groves_offset is None:
        raise ConfigError("%s has no Groves offset" % p.mechanism_id)
    d = p.decide(joint)
    others_welfare = sum((p.utility(d, j, v) for j, v in joint.entries if j != i),
                         Fraction(0))
    if len(joint) == 1:
        offset = Fraction(0)  # empty profile: max over D of the empty sum
    else:
        offset = p.groves_offset(i, joint.without(i))
    return offset + others_welfare


def tax_vector(p: DecisionProblem, joint: JointType) -> tuple[Fraction, ...]:
    if p.taxes_override is not None:
        return tuple(p.taxes_override(p, joint))
    return tuple(groves_tax(p, joint, i) for i in joint.indices)


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Optional[TypeValue] = None
    truthful_utility: Optional[Fraction] = None
    witness_utility: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.holds


def check_strategy_proof(p: DecisionProblem, joint: JointType, i: int,
                         deviations: Iterable[TypeValue]) -> Verdict:
    """Exact comparison of truthful utility against each deviation.

    Utility is valuation under the chosen decision plus own tax; the
    valuation always uses the *true* type, only the announcement varies.
    For Groves taxes the offset term depends only on the others, so it is
    evaluated once per player rather than once per deviation.
    """
    true_value = joint.value_of(i)
    pos = joint.indices.index(i)

    if p.taxes_override is None and p.groves_offset is not None:
        offset = (Fraction(0) if len(joint) == 1
                  else p.groves_offset(i, joint.without(i)))

        def own_tax(profile: JointType) -> Fraction:
            d = p.decide(profile)
            others = sum((p.utility(d, j, v) for j, v in profile.entries
                          if j != i), Fraction(0))
            return d, offset + others
    else:
        def own_tax(profile: JointType):
            return p.decide(profile), tax_vector(p, profile)[pos]

    d, t_i = own_tax(joint)
    truthful = p.utility(d, i, true_value) + t_i
    for dev in deviations:
        d2, t2_i = own_tax(joint.replace(i, dev))
        u2 = p.utility(d2, i, true_value) + t2_i
        if u2 > truthful:
            return Verdict(False, witness=dev, truthful_utility=truthful,
                           witness_utility=u2)
    return Verdict(True, truthful_utility=truthful)


BALANCED_OBSERVED = "balanced-observed"
FEASIBLE_OBSERVED = "feasible-observed"
NEITHER_OBSERVED = "neither-observed"


def classify(p: DecisionProblem, samples: Iterable[JointType]) -> str:
    """Strongest budget property holding on every sample (empirical, not a proof)."""
    balanced = True
    feasible = True
    for joint in samples:
        total = sum(tax_vector(p, joint), Fraction(0))
        if total != 0:
            balanced = False
        if total > 0:
            feasible = False
    if balanced:
        return BALANCED_OBSERVED
    if feasible:
        return FEASIBLE_OBSERVED
    return NEITHER_OBSERVED
