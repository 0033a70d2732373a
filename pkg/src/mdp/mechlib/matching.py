"""Maximum-weight assignment of items to players (Kuhn-Munkres).

Weights are exact rationals; the potential-based O(n^3) algorithm below
never rounds, so two replicas running it on the same valuation matrix
produce the same optimum value. The *assignment* returned to callers is
additionally canonicalized: among all maximum-weight partial matchings
we return the one whose per-item vector (0 = item unassigned, else the
1-based player index) is lexicographically least. Replicas must agree
byte-for-byte, and "in argmax" gives us the freedom to pick.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = Sequence[Sequence[Fraction]]


def max_matching_value(valuations: Matrix) -> Fraction:
    """Best total value of any partial matching (player -> at most 1 item).

    `valuations[i][j]` is player i's value for item j; all values must be
    >= 0, which makes the unconstrained optimum equal to the best perfect
    matching on a zero-padded square matrix.
    """
    n = len(valuations)
    if n == 0:
        return Fraction(0)
    m = len(valuations[0])
    size = max(n, m)
    if all(v.denominator == 1 for row in valuations for v in row):
        wi = [[int(valuations[i][j]) if i < n and j < m else 0
               for j in range(size)] for i in range(size)]
        return Fraction(sum(wi[i][j] for i, j in _hungarian_max_int(wi)))
    zero = Fraction(0)
    # pad to square with zero-value dummy rows/columns
    w = [[valuations[i][j] if i < n and j < m else zero for j in range(size)]
         for i in range(size)]
    total = zero
    for i, j in _hungarian_max(w):
        total += w[i][j]
    return total


def canonical_assignment(valuations: Matrix) -> tuple[tuple[int, ...], Fraction]:
    """Return (per-item assignment vector, optimal value).

    Vector entry j is 0 when item j stays unallocated, else the 1-based
    index of the player taking it. The vector is the lexicographically
    least one among maximum-weight matchings: items are fixed in order,
    preferring "unassigned", then players by ascending index, keeping
    only choices that still allow the global optimum.

    Integer matrices take a single-solve fast path; general rationals go
    through the greedy feasibility-checked construction. Both implement
    the identical canonical order.
    """
    n = len(valuations)
    m = len(valuations[0]) if n else 0
    if n and m and all(v.denominator == 1 for row in valuations for v in row):
        return _canonical_assignment_lex_int(valuations)
    return _canonical_assignment_greedy(valuations)


def _canonical_assignment_greedy(valuations: Matrix) -> tuple[tuple[int, ...], Fraction]:
    n = len(valuations)
    m = len(valuations[0]) if n else 0
    best = max_matching_value(valuations)
    assigned: list[int] = []
    fixed_value = Fraction(0)
    used_players: set[int] = set()
    for j in range(m):
        choice = None
        for candidate in range(0, n + 1):  # 0 = leave item j unassigned
            if candidate != 0 and (candidate - 1) in used_players:
                continue
            value = fixed_value if candidate == 0 else fixed_value + valuations[candidate - 1][j]
            rest = _submatrix_value(valuations, used_players | ({candidate - 1} if candidate else set()),
                                    j + 1)
            if value + rest == best:
                choice = candidate
                break
        assert choice is not None, "no extension reaches the optimum"
        assigned.append(choice)
        if choice != 0:
            used_players.add(choice - 1)
            fixed_value += valuations[choice - 1][j]
    return tuple(assigned), best


def _canonical_assignment_lex_int(valuations: Matrix) -> tuple[tuple[int, ...], Fraction]:
    """One Hungarian solve on perturbed integer weights.

    Among maximum-weight matchings, the lexicographically least per-item
    vector is the one minimizing sum over items of entry * B^(m-1-j)
    (digits of a base-B number, B > n). Subtracting that penalty from
    weights scaled by S > max total penalty makes the unique optimum of
    the perturbed problem exactly the canonical matching. Dummy rows and
    columns give every item a genuine "unassigned" option.
    """
    n = len(valuations)
    m = len(valuations[0])
    base = n + 2
    powers = [base ** (m - 1 - j) for j in range(m)]
    scale = 2 * (n + 1) * base ** m
    size = n + m  # n real + m dummy players; m real + n dummy items
    w = [[0] * size for _ in range(size)]
    for i in range(n):
        for j in range(m):
            w[i][j] = int(valuations[i][j]) * scale - (i + 1) * powers[j]
    matches = _hungarian_max_int(w)
    vector = [0] * m
    total = Fraction(0)
    for i, j in matches:
        if i < n and j < m and w[i][j] > 0:
            vector[j] = i + 1
            total += valuations[i][j]
    return tuple(vector), total


def _hungarian_max_int(w: list[list[int]]) -> list[tuple[int, int]]:
    """Integer twin of _hungarian_max (kept separate: no Fraction churn)."""
    size = len(w)
    cost = [[-w[i][j] for j in range(size)] for i in range(size)]
    u = [0] * (size + 1)
    v = [0] * (size + 1)
    match_col = [size] * (size + 1)
    for i in range(size):
        match_col[size] = i
        j_cur = size
        min_to = [None] * (size + 1)
        prev = [size] * (size + 1)
        visited = [False] * (size + 1)
        while True:
            visited[j_cur] = True
            i_cur = match_col[j_cur]
            delta = None
            j_next = size
            for j in range(size):
                if visited[j]:
                    continue
                cur = cost[i_cur][j] - u[i_cur] - v[j]
                if min_to[j] is None or cur < min_to[j]:
                    min_to[j] = cur
                    prev[j] = j_cur
                if delta is None or min_to[j] < delta:
                    delta = min_to[j]
                    j_next = j
            for j in range(size + 1):
                if visited[j]:
                    u[match_col[j]] += delta
                    v[j] -= delta
                elif min_to[j] is not None:
                    min_to[j] -= delta
            j_cur = j_next
            if match_col[j_cur] == size:
                break
        while j_cur != size:
            j_prev = prev[j_cur]
            match_col[j_cur] = match_col[j_prev]
            j_cur = j_prev
    return [(match_col[j], j) for j in range(size)]


def _submatrix_value(valuations: Matrix, used_players: set[int], first_item: int) -> Fraction:
    n = len(valuations)
    m = len(valuations[0]) if n else 0
    rows = [valuations[i][first_item:] for i in range(n) if i not in used_players]
    if not rows or first_item >= m:
        return Fraction(0)
    return max_matching_value(rows)


def _hungarian_max(w: list[list[Fraction]]) -> list[tuple[int, int]]:
    """Maximum-weight perfect matching on a square matrix, exact arithmetic.

    Classic shortest-augmenting-path formulation run on negated weights
    (minimization); returns the list of (row, col) pairs.
    """
    size = len(w)
    INF = None  # sentinel: larger than any Fraction
    cost = [[-w[i][j] for j in range(size)] for i in range(size)]
    u = [Fraction(0)] * (size + 1)
    v = [Fraction(0)] * (size + 1)
    match_col = [size] * (size + 1)  # match_col[j] = row matched to column j
    for i in range(size):
        match_col[size] = i
        j_cur = size
        min_to = [INF] * (size + 1)
        prev = [size] * (size + 1)
        visited = [False] * (size + 1)
        while True:
            visited[j_cur] = True
            i_cur = match_col[j_cur]
            delta = INF
            j_next = size
            for j in range(size):
                if visited[j]:
                    continue
                cur = cost[i_cur][j] - u[i_cur] - v[j]
                if min_to[j] is None or cur < min_to[j]:
                    min_to[j] = cur
                    prev[j] = j_cur
                if delta is None or min_to[j] < delta:
                    delta = min_to[j]
                    j_next = j
            for j in range(size + 1):
                if visited[j]:
                    u[match_col[j]] += delta
                    v[j] -= delta
                elif min_to[j] is not None:
                    min_to[j] -= delta
            j_cur = j_next
            if match_col[j_cur] == size:
                break
        while j_cur != size:
            j_prev = prev[j_cur]
            match_col[j_cur] = match_col[j_prev]
            j_cur = j_prev
    return [(match_col[j], j) for j in range(size)]
