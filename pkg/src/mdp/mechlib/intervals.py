"""Winner determination for single-minded interval bids.

Players bid a value for one contiguous block [a, b] of the items 1..m;
an allocation is a set of players whose blocks are pairwise disjoint.
The optimum is the classic weighted-interval-scheduling dynamic program

    opt[k] = max(opt[k-1],  max over bids with b_i = k of  v_i + opt[a_i - 1])

evaluated over exact rationals. Reconstruction follows the fixed tie
rule used everywhere in the platform: on equal value prefer the
solution that excludes the interval ending at the current item, and
among including candidates take the lowest player index. Replicas (and
the independent test oracle) reproduce the identical winner set.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..errors import ConfigError


def check_intervals(intervals: Sequence[tuple[int, int]], item_count: int) -> None:
    for a, b in intervals:
        if not (1 <= a <= b <= item_count):
            raise ConfigError("malformed interval [%d, %d] over 1..%d" % (a, b, item_count))


def optimum_table(intervals: Sequence[tuple[int, int]],
                  values: Sequence[Fraction],
                  item_count: int) -> list[Fraction]:
    """opt[k] = best total value using only items 1..k (opt[0] = 0)."""
    opt = [Fraction(0)] * (item_count + 1)
    by_end: dict[int, list[int]] = {}
    for i, (_, b) in enumerate(intervals):
        by_end.setdefault(b, []).append(i)
    for k in range(1, item_count + 1):
        best = opt[k - 1]
        for i in by_end.get(k, ()):
            a, _ = intervals[i]
            cand = values[i] + opt[a - 1]
            if cand > best:
                best = cand
        opt[k] = best
    return opt


def winners_from_table(intervals: Sequence[tuple[int, int]],
                       values: Sequence[Fraction],
                       opt: list[Fraction]) -> tuple[int, ...]:
    """Canonical winner set (0-based indices, ascending) for a DP table.

    Works on any table satisfying the recurrence, which lets the brute
    force oracle feed its independently computed prefix optima through
    the same reconstruction contract.
    """
    winners: list[int] = []
    k = len(opt) - 1
    while k > 0:
        if opt[k] == opt[k - 1]:
            k -= 1
            continue
        pick = None
        for i in range(len(intervals)):
            a, b = intervals[i]
            if b == k and values[i] + opt[a - 1] == opt[k]:
                pick = i
                break
        if pick is None:
            raise ConfigError("table does not satisfy the interval recurrence")
        winners.append(pick)
        k = intervals[pick][0] - 1
    winners.reverse()
    return tuple(winners)


def solve(intervals: Sequence[tuple[int, int]],
          values: Sequence[Fraction],
          item_count: int) -> tuple[tuple[int, ...], Fraction]:
    """(canonical winner indices, optimal welfare)."""
    check_intervals(intervals, item_count)
    opt = optimum_table(intervals, values, item_count)
    return winners_from_table(intervals, values, opt), opt[item_count]
