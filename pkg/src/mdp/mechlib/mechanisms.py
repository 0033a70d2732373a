"""The bundled mechanisms: Vickrey (plain and with Cavallo redistribution),
unit-demand auction, single-minded interval auction, public project, and
the deliberately non-Groves first-price control used by verification.

All of them expose the same DecisionProblem surface so the player engine
and the oracles treat mechanisms uniformly. Decisions are canonical
values (ints, tuples, short strings) with a fixed total order, because
replicated processes must agree on the chosen maximizer, not just its
welfare.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from ..errors import ConfigError
from . import intervals as iv
from . import matching
from .problems import DecisionProblem, JointType, tax_vector
from .rational import rational

MECHANISM_IDS = ("vickrey", "vickrey-cavallo", "unit-demand",
                 "single-minded", "public-project", "first-price")


# ---------------------------------------------------------------------------
# type payload validation / codec (announcement bodies, gateway submissions)

def _require_nonneg(v: Fraction, what: str) -> None:
    if v < 0:
        raise ConfigError("%s must be >= 0, got %s" % (what, v))


def validate_type_value(mechanism_id: str, params: dict, value) -> None:
    if mechanism_id in ("vickrey", "vickrey-cavallo", "first-price"):
        if not isinstance(value, Fraction):
            raise ConfigError("bid must be a rational")
        _require_nonneg(value, "bid")
    elif mechanism_id == "unit-demand":
        m = int(params["items"])
        if not (isinstance(value, tuple) and len(value) == m):
            raise ConfigError("valuation vector must have %d entries" % m)
        for x in value:
            if not isinstance(x, Fraction):
                raise ConfigError("valuations must be rationals")
            _require_nonneg(x, "valuation")
    elif mechanism_id == "single-minded":
        m = int(params["items"])
        if not (isinstance(value, tuple) and len(value) == 3):
            raise ConfigError("single-minded type is (first_item, last_item, value)")
        a, b, v = value
        if not (isinstance(a, int) and isinstance(b, int) and 1 <= a <= b <= m):
            raise ConfigError("interval must satisfy 1 <= a <= b <= %d" % m)
        if not isinstance(v, Fraction):
            raise ConfigError("interval value must be a rational")
        _require_nonneg(v, "interval value")
    elif mechanism_id == "public-project":
        if not isinstance(value, Fraction):
            raise ConfigError("willingness-to-pay must be a rational")
        _require_nonneg(value, "willingness-to-pay")
    else:
        raise ConfigError("unknown mechanism %r" % mechanism_id)


def type_value_to_wire(mechanism_id: str, value):
    """Canonical JSON-encodable form of a type value."""
    from .rational import encode_rational
    if mechanism_id == "unit-demand":
        return [encode_rational(x) for x in value]
    if mechanism_id == "single-minded":
        a, b, v = value
        return [a, b, encode_rational(v)]
    return encode_rational(value)


def type_value_from_wire(mechanism_id: str, payload):
    if mechanism_id == "unit-demand":
        if not isinstance(payload, list):
            raise ConfigError("unit-demand payload must be a list")
        return tuple(rational(x) for x in payload)
    if mechanism_id == "single-minded":
        if not (isinstance(payload, list) and len(payload) == 3):
            raise ConfigError("single-minded payload must be [a, b, value]")
        return (int(payload[0]), int(payload[1]), rational(payload[2]))
    return rational(payload)


# ---------------------------------------------------------------------------
# Vickrey family (single object)

def _vickrey_utility(d, i: int, theta: Fraction) -> Fraction:
    return theta if d == i else Fraction(0)


def _vickrey_decide(joint: JointType):
    best_i, best_v = None, None
    for i, v in joint.entries:
        if best_v is None or v > best_v:
            best_i, best_v = i, v
    return best_i


def _vickrey_max_welfare(joint: JointType) -> Fraction:
    return max(v for _, v in joint.entries)


def _vickrey_decisions(joint: JointType):
    return list(joint.indices)


def _second_highest(values: Sequence[Fraction]) -> Fraction:
    if len(values) < 2:
        return Fraction(0)
    ordered = sorted(values, reverse=True)
    return ordered[1]


def _cavallo_offset(i: int, others: JointType) -> Fraction:
    n = len(others) + 1
    rebate = _second_highest([v for _, v in others.entries]) / n
    return -_vickrey_max_welfare(others) + rebate


def vickrey_problem() -> DecisionProblem:
    return DecisionProblem(
        mechanism_id="vickrey",
        utility=_vickrey_utility,
        decide=_vickrey_decide,
        max_welfare=_vickrey_max_welfare,
        enumerate_decisions=_vickrey_decisions,
        groves_offset=lambda i, others: -_vickrey_max_welfare(others),
        validate_type=lambda v: validate_type_value("vickrey", {}, v),
    )


def cavallo_problem() -> DecisionProblem:
    return DecisionProblem(
        mechanism_id="vickrey-cavallo",
        utility=_vickrey_utility,
        decide=_vickrey_decide,
        max_welfare=_vickrey_max_welfare,
        enumerate_decisions=_vickrey_decisions,
        groves_offset=_cavallo_offset,
        validate_type=lambda v: validate_type_value("vickrey-cavallo", {}, v),
    )


def _first_price_taxes(p: DecisionProblem, joint: JointType):
    winner = _vickrey_decide(joint)
    return tuple(-joint.value_of(i) if i == winner else Fraction(0)
                 for i in joint.indices)


def first_price_problem() -> DecisionProblem:
    """Winner pays own bid: efficient rule, non-Groves taxes. Negative control."""
    return DecisionProblem(
        mechanism_id="first-price",
        utility=_vickrey_utility,
        decide=_vickrey_decide,
        max_welfare=_vickrey_max_welfare,
        enumerate_decisions=_vickrey_decisions,
        taxes_override=_first_price_taxes,
        validate_type=lambda v: validate_type_value("first-price", {}, v),
    )


def vickrey(bids: Sequence[Fraction]) -> tuple[int, tuple[Fraction, ...]]:
    """Winner (lowest-index maximal bidder) and the VCG tax vector."""
    if not bids:
        raise ConfigError("vickrey needs at least one bid")
    p = vickrey_problem()
    joint = JointType.from_values(bids)
    return _vickrey_decide(joint), tax_vector(p, joint)


def cavallo_redistribution(bids: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Vickrey taxes plus each player's rebate of second_highest(others)/n."""
    if len(bids) < 2:
        raise ConfigError("redistribution needs at least two bidders")
    p = cavallo_problem()
    return tax_vector(p, JointType.from_values(bids))


# ---------------------------------------------------------------------------
# unit demand auction (items to players, each player at most one item)

def _ud_matrix(joint: JointType):
    return [list(v) for _, v in joint.entries]


def _ud_decide_factory(m: int):
    def decide(joint: JointType):
        vector, _ = matching.canonical_assignment(_ud_matrix(joint))
        ids = joint.indices
        return tuple(0 if owner == 0 else ids[owner - 1] for owner in vector)
    return decide


def _ud_utility(d, i: int, theta) -> Fraction:
    total = Fraction(0)
    for j, owner in enumerate(d):
        if owner == i:
            total += theta[j]
    return total


def _ud_max_welfare(joint: JointType) -> Fraction:
    return matching.max_matching_value(_ud_matrix(joint))


def _ud_decisions_factory(m: int):
    def enumerate_decisions(joint: JointType) -> Iterable[tuple]:
        ids = joint.indices
        out: list[tuple] = []

        def rec(item: int, used: set, acc: list):
            if item == m:
                out.append(tuple(acc))
                return
            rec(item + 1, used, acc + [0])
            for i in ids:
                if i not in used:
                    rec(item + 1, used | {i}, acc + [i])
        rec(0, set(), [])
        return out
    return enumerate_decisions


def unit_demand_problem(items: int) -> DecisionProblem:
    return DecisionProblem(
        mechanism_id="unit-demand",
        utility=_ud_utility,
        decide=_ud_decide_factory(items),
        max_welfare=_ud_max_welfare,
        enumerate_decisions=_ud_decisions_factory(items),
        groves_offset=lambda i, others: -_ud_max_welfare(others),
        validate_type=lambda v: validate_type_value("unit-demand", {"items": items}, v),
    )


def unit_demand(valuations: Sequence[Sequence[Fraction]]
                ) -> tuple[dict[int, int], tuple[Fraction, ...]]:
    """Max-weight matching plus VCG taxes (one reduced matching per player).

    Returns ({item -> player} over allocated items, tax vector); both use
    1-based indices. Requires m <= n as the auction is defined.
    """
    n = len(valuations)
    if n == 0:
        raise ConfigError("unit demand needs at least one player")
    m = len(valuations[0])
    if m > n:
        raise ConfigError("more items (%d) than players (%d)" % (m, n))
    p = unit_demand_problem(m)
    joint = JointType.from_values(tuple(tuple(row) for row in valuations))
    d = p.decide(joint)
    assignment = {j + 1: owner for j, owner in enumerate(d) if owner != 0}
    return assignment, tax_vector(p, joint)


# ---------------------------------------------------------------------------
# single minded auction (contiguous blocks of items)

def _sm_decide_factory(m: int):
    def decide(joint: JointType):
        ids = joint.indices
        ivs = [(v[0], v[1]) for _, v in joint.entries]
        vals = [v[2] for _, v in joint.entries]
        winners, _ = iv.solve(ivs, vals, m)
        return tuple(ids[w] for w in winners)
    return decide


def _sm_utility(d, i: int, theta) -> Fraction:
    return theta[2] if i in d else Fraction(0)


def _sm_max_welfare_factory(m: int):
    def max_welfare(joint: JointType) -> Fraction:
        ivs = [(v[0], v[1]) for _, v in joint.entries]
        vals = [v[2] for _, v in joint.entries]
        iv.check_intervals(ivs, m)
        return iv.optimum_table(ivs, vals, m)[m]
    return max_welfare


def _sm_decisions_factory(m: int):
    def enumerate_decisions(joint: JointType) -> Iterable[tuple]:
        entries = joint.entries
        out = []
        for mask in range(1 << len(entries)):
            chosen = [entries[k] for k in range(len(entries)) if mask >> k & 1]
            taken = 0
            ok = True
            for _, (a, b, _v) in chosen:
                bits = ((1 << (b - a + 1)) - 1) << (a - 1)
                if taken & bits:
                    ok = False
                    break
                taken |= bits
            if ok:
                out.append(tuple(i for i, _ in chosen))
        return out
    return enumerate_decisions


def single_minded_problem(items: int) -> DecisionProblem:
    return DecisionProblem(
        mechanism_id="single-minded",
        utility=_sm_utility,
        decide=_sm_decide_factory(items),
        max_welfare=_sm_max_welfare_factory(items),
        enumerate_decisions=_sm_decisions_factory(items),
        groves_offset=lambda i, others: -_sm_max_welfare_factory(items)(others),
        validate_type=lambda v: validate_type_value("single-minded", {"items": items}, v),
    )


def single_minded(interval_bids: Sequence[tuple[int, int]],
                  values: Sequence[Fraction],
                  items: int) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
    """Canonical disjoint-interval winners and their VCG taxes."""
    if len(interval_bids) != len(values) or not interval_bids:
        raise ConfigError("need one value per interval, at least one bidder")
    p = single_minded_problem(items)
    joint = JointType.from_values(tuple((a, b, v) for (a, b), v in zip(interval_bids, values)))
    return p.decide(joint), tax_vector(p, joint)


# ---------------------------------------------------------------------------
# public project (build / no-build with equal cost shares)

BUILD = "build"
NO_BUILD = "no-build"


def _pp_utility_factory(share: Fraction):
    def utility(d, i: int, theta: Fraction) -> Fraction:
        return theta - share if d == BUILD else Fraction(0)
    return utility


def _pp_decide_factory(share: Fraction):
    def decide(joint: JointType):
        surplus = sum((v - share for _, v in joint.entries), Fraction(0))
        return BUILD if surplus >= 0 else NO_BUILD
    return decide


def _pp_max_welfare_factory(share: Fraction):
    def max_welfare(joint: JointType) -> Fraction:
        surplus = sum((v - share for _, v in joint.entries), Fraction(0))
        return max(Fraction(0), surplus)
    return max_welfare


def public_project_problem(cost: Fraction, n: int) -> DecisionProblem:
    if cost <= 0:
        raise ConfigError("project cost must be positive")
    if n < 1:
        raise ConfigError("public project needs at least one player")
    share = cost / n
    return DecisionProblem(
        mechanism_id="public-project",
        utility=_pp_utility_factory(share),
        decide=_pp_decide_factory(share),
        max_welfare=_pp_max_welfare_factory(share),
        enumerate_decisions=lambda joint: [BUILD, NO_BUILD],
        groves_offset=lambda i, others: -_pp_max_welfare_factory(share)(others),
        validate_type=lambda v: validate_type_value("public-project", {}, v),
    )


def public_project(cost: Fraction, thetas: Sequence[Fraction]
                   ) -> tuple[str, tuple[Fraction, ...]]:
    p = public_project_problem(cost, len(thetas))
    joint = JointType.from_values(thetas)
    return p.decide(joint), tax_vector(p, joint)


# ---------------------------------------------------------------------------
# problem factory used by the engine and the harness

def build_problem(mechanism_id: str, params: dict, n_players: int) -> DecisionProblem:
    if mechanism_id == "vickrey":
        return vickrey_problem()
    if mechanism_id == "vickrey-cavallo":
        if n_players < 2:
            raise ConfigError("vickrey-cavallo needs at least two players")
        return cavallo_problem()
    if mechanism_id == "first-price":
        return first_price_problem()
    if mechanism_id == "unit-demand":
        m = int(params.get("items", 0))
        if m < 1:
            raise ConfigError("unit-demand needs a positive item count")
        if m > n_players:
            raise ConfigError("more items (%d) than players (%d)" % (m, n_players))
        return unit_demand_problem(m)
    if mechanism_id == "single-minded":
        m = int(params.get("items", 0))
        if m < 1:
            raise ConfigError("single-minded needs a positive item count")
        return single_minded_problem(m)
    if mechanism_id == "public-project":
        return public_project_problem(rational(params["cost"]), n_players)
    raise ConfigError("unknown mechanism %r" % mechanism_id)
