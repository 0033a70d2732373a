"""Independent brute-force oracles.

These deliberately avoid the production maximizers: matchings are
enumerated recursively, interval winners come from feasible-subset
enumeration, and taxes are recomputed from first principles (welfare
maxima with each player excluded). verify_scenario and the test suite
compare the fast paths against these, exactly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..errors import ConfigError
from ..mechlib import JointType
from ..mechlib.mechanisms import BUILD, NO_BUILD

# enumeration caps: beyond these, brute force would be silently slow/wrong
MATCHING_CAP = 7          # players/items for matching enumeration
SUBSET_CAP = 14           # players for feasible-subset enumeration


# ---------------------------------------------------------------------------
# maximum-weight matching by enumeration

def enumerate_matching_value(valuations: Sequence[Sequence[Fraction]]) -> Fraction:
    """Best total value over every partial matching, by recursion on items."""
    n = len(valuations)
    m = len(valuations[0]) if n else 0
    if n > MATCHING_CAP or m > MATCHING_CAP:
        raise ConfigError("matching oracle capped at %d" % MATCHING_CAP)

    def rec(item: int, used: int) -> Fraction:
        if item == m:
            return Fraction(0)
        best = rec(item + 1, used)  # item unassigned
        for i in range(n):
            if not used >> i & 1:
                cand = valuations[i][item] + rec(item + 1, used | (1 << i))
                if cand > best:
                    best = cand
        return best

    return rec(0, 0)


def enumerate_matching_canonical(valuations: Sequence[Sequence[Fraction]]
                                 ) -> tuple[tuple[int, ...], Fraction]:
    """Lexicographically least per-item assignment vector among optima.

    Entry 0 means "item unassigned" and sorts before every player, the
    same contract the production path implements with feasibility
    checks against the Kuhn-Munkres optimum.
    """
    n = len(valuations)
    m = len(valuations[0]) if n else 0
    best_value = enumerate_matching_value(valuations)
    best_vec: tuple[int, ...] | None = None

    def rec(item: int, used: int, acc: list, value: Fraction):
        nonlocal best_vec
        if item == m:
            if value == best_value:
                vec = tuple(acc)
                if best_vec is None or vec < best_vec:
                    best_vec = vec
            return
        rec(item + 1, used, acc + [0], value)
        for i in range(n):
            if not used >> i & 1:
                rec(item + 1, used | (1 << i), acc + [i + 1],
                    value + valuations[i][item])

    rec(0, 0, [], Fraction(0))
    assert best_vec is not None
    return best_vec, best_value


# ---------------------------------------------------------------------------
# single-minded winners by feasible-subset enumeration

def _interval_mask(a: int, b: int) -> int:
    return ((1 << (b - a + 1)) - 1) << (a - 1)


def enumerate_interval_value(intervals: Sequence[tuple[int, int]],
                             values: Sequence[Fraction],
                             prefix_items: int | None = None) -> Fraction:
    """Best total value over disjoint interval sets; optionally restricted
    to intervals contained in items 1..prefix_items."""
    n = len(intervals)
    if n > SUBSET_CAP:
        raise ConfigError("subset oracle capped at %d" % SUBSET_CAP)
    eligible = [i for i in range(n)
                if prefix_items is None or intervals[i][1] <= prefix_items]
    best = Fraction(0)

    def rec(pos: int, taken: int, value: Fraction):
        nonlocal best
        if value > best:
            best = value
        if pos == len(eligible):
            return
        i = eligible[pos]
        rec(pos + 1, taken, value)
        mask = _interval_mask(*intervals[i])
        if not taken & mask:
            rec(pos + 1, taken | mask, value + values[i])

    rec(0, 0, Fraction(0))
    return best


def enumerate_interval_canonical(intervals: Sequence[tuple[int, int]],
                                 values: Sequence[Fraction],
                                 item_count: int) -> tuple[tuple[int, ...], Fraction]:
    """Winner set under the platform's fixed reconstruction rule, derived
    from independently enumerated prefix optima (not the DP recurrence)."""
    from ..mechlib.intervals import winners_from_table
    opt = [enumerate_interval_value(intervals, values, prefix_items=k)
           for k in range(item_count + 1)]
    return winners_from_table(intervals, values, opt), opt[item_count]


# ---------------------------------------------------------------------------
# whole-mechanism evaluation: decision, welfare, VCG taxes

def evaluate(mechanism_id: str, params: dict, joint: JointType) -> dict:
    """Brute-force (decision, welfare, taxes) for one mechanism instance.

    Re-derives each mechanism from its definition; the only ingredient
    shared with the production path is the published tie-breaking
    contract.
    """
    indices = joint.indices
    values = [v for _, v in joint.entries]
    if mechanism_id in ("vickrey", "vickrey-cavallo"):
        best = max(values)
        winner = indices[values.index(best)]
        taxes = []
        for pos, i in enumerate(indices):
            others = [v for j, v in zip(indices, values) if j != i]
            welfare_others_chosen = Fraction(0) if i == winner else best
            best_without = max(others) if others else Fraction(0)
            t = welfare_others_chosen - best_without
            if mechanism_id == "vickrey-cavallo":
                rest = sorted(others, reverse=True)
                rebate = rest[1] / len(indices) if len(rest) >= 2 else Fraction(0)
                t += rebate
            taxes.append(t)
        welfare = best
        decision = winner
    elif mechanism_id == "unit-demand":
        matrix = [list(v) for v in values]
        decision_vec, welfare = enumerate_matching_canonical(matrix)
        decision = tuple(0 if o == 0 else indices[o - 1] for o in decision_vec)
        taxes = []
        for pos, i in enumerate(indices):
            own = sum(matrix[pos][j] for j, o in enumerate(decision_vec) if o == pos + 1)
            reduced = [matrix[k] for k in range(len(indices)) if k != pos]
            best_without = enumerate_matching_value(reduced) if reduced else Fraction(0)
            taxes.append((welfare - own) - best_without)
    elif mechanism_id == "single-minded":
        m = int(params["items"])
        ivs = [(v[0], v[1]) for v in values]
        vals = [v[2] for v in values]
        winners_pos, welfare = enumerate_interval_canonical(ivs, vals, m)
        decision = tuple(indices[w] for w in winners_pos)
        taxes = []
        for pos, i in enumerate(indices):
            own = vals[pos] if pos in winners_pos else Fraction(0)
            reduced_iv = [ivs[k] for k in range(len(indices)) if k != pos]
            reduced_v = [vals[k] for k in range(len(indices)) if k != pos]
            best_without = (enumerate_interval_value(reduced_iv, reduced_v)
                            if reduced_iv else Fraction(0))
            taxes.append((welfare - own) - best_without)
    elif mechanism_id == "public-project":
        from ..mechlib.rational import rational
        cost = rational(params["cost"])
        share = cost / len(indices)
        surplus = sum((v - share for v in values), Fraction(0))
        decision = BUILD if surplus >= 0 else NO_BUILD
        welfare = max(Fraction(0), surplus)
        taxes = []
        for pos, i in enumerate(indices):
            others = [v for j, v in zip(indices, values) if j != i]
            others_chosen = (sum((v - share for v in others), Fraction(0))
                             if decision == BUILD else Fraction(0))
            best_without = max(Fraction(0),
                               sum((v - share for v in others), Fraction(0)))
            taxes.append(others_chosen - best_without)
    elif mechanism_id == "first-price":
        best = max(values)
        winner = indices[values.index(best)]
        decision = winner
        welfare = best
        taxes = [-best if i == winner else Fraction(0) for i in indices]
    else:
        raise ConfigError("no oracle for mechanism %r" % mechanism_id)
    return {"decision": decision, "welfare": welfare, "taxes": tuple(taxes)}
