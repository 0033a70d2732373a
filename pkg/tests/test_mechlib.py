"""Mechanism math against the enumeration oracles.

Expected values in the point tests were computed by the brute-force
oracles (enumeration over decisions / matchings / feasible subsets)
and frozen here; the property loops re-run the oracles on seeded
random instances.
"""

import random
from fractions import Fraction as F

import pytest

from mdp.errors import ConfigError, SettlementError
from mdp.harness import oracles
from mdp.mechlib import (BALANCED_OBSERVED, FEASIBLE_OBSERVED, JointType,
                         build_problem, cavallo_redistribution,
                         cavallo_problem, check_strategy_proof, classify,
                         decide_efficient, first_price_problem, groves_tax,
                         public_project, public_project_problem, settle,
                         single_minded, single_minded_problem, tax_vector,
                         unit_demand, unit_demand_problem, vcg_offset, vickrey,
                         vickrey_problem)


def F_(x):
    return F(x)


# ---------------------------------------------------------------------------
# decide_efficient

def test_public_project_build_decision():
    # enumerate D={build, no-build}: surplus 6-10 + 7-10 + 25-10 = 8 > 0
    d, _ = public_project(F(30), [F(6), F(7), F(25)])
    assert d == "build"


def test_vickrey_unique_max():
    winner, _ = vickrey([F(10), F(8), F(5)])
    assert winner == 1


def test_unit_demand_example_matches_brute_force():
    vals = [[F(5), F(0)], [F(4), F(3)]]
    assignment, taxes = unit_demand(vals)
    assert assignment == {1: 1, 2: 2}
    vec, welfare = oracles.enumerate_matching_canonical(vals)
    assert welfare == F(8)
    assert vec == (1, 2)


# ---------------------------------------------------------------------------
# groves_tax / vcg_offset spec examples

def test_groves_tax_single_player_is_zero():
    p = vickrey_problem()
    assert groves_tax(p, JointType.from_values([F(4)]), 1) == 0


def test_vickrey_taxes_by_vcg_formula():
    _, taxes = vickrey([F(10), F(8), F(5)])
    assert taxes == (F(-8), F(0), F(0))


def test_vcg_offset_examples():
    p = public_project_problem(F(30), 3)
    others = JointType(((1, F(6)), (2, F(7))))
    assert vcg_offset(p, 3, others) == 0
    joint = JointType.from_values([F(6), F(7), F(25)])
    assert groves_tax(p, joint, 3) == F(-7)

    ud = unit_demand_problem(2)
    others = JointType(((2, (F(4), F(3))),))
    assert vcg_offset(ud, 1, others) == F(-4)


def test_vickrey_tie_and_singleton():
    winner, taxes = vickrey([F(7), F(7)])
    assert winner == 1 and taxes == (F(-7), F(0))
    winner, taxes = vickrey([F(4)])
    assert winner == 1 and taxes == (F(0),)


def test_vickrey_empty_rejected():
    with pytest.raises(ConfigError):
        vickrey([])


# ---------------------------------------------------------------------------
# cavallo redistribution

def test_cavallo_spec_values():
    taxes = cavallo_redistribution([F(10), F(8), F(5)])
    assert taxes == (F(-19, 3), F(5, 3), F(8, 3))
    assert sum(taxes) == F(-2)


def test_cavallo_two_bidders_equals_vickrey():
    assert cavallo_redistribution([F(10), F(8)]) == vickrey([F(10), F(8)])[1]


def test_cavallo_equal_bids_fully_balanced():
    taxes = cavallo_redistribution([F(6), F(6), F(6)])
    assert taxes == (F(-4), F(2), F(2))
    assert sum(taxes) == 0


def test_cavallo_needs_two():
    with pytest.raises(ConfigError):
        cavallo_redistribution([F(5)])


def test_cavallo_dominates_vickrey_randomized():
    rng = random.Random(4242)
    for _ in range(300):
        n = rng.randint(2, 6)
        bids = [F(rng.randint(0, 20)) for _ in range(n)]
        tv = vickrey(bids)[1]
        tc = cavallo_redistribution(bids)
        assert sum(tc) >= sum(tv)
        assert sum(tc) <= 0


# ---------------------------------------------------------------------------
# unit demand

def test_unit_demand_reduces_to_vickrey_on_one_item():
    assignment, taxes = unit_demand([[F(9)], [F(2)]])
    assert assignment == {1: 1}
    assert taxes == (F(-2), F(0))
    assert taxes == vickrey([F(9), F(2)])[1]


def test_unit_demand_zero_matrix():
    assignment, taxes = unit_demand([[F(0), F(0)], [F(0), F(0)]])
    assert assignment == {}
    assert taxes == (F(0), F(0))


def test_unit_demand_rejects_more_items_than_players():
    with pytest.raises(ConfigError):
        unit_demand([[F(1), F(2)]])


def test_unit_demand_matches_enumeration_randomized():
    rng = random.Random(77)
    for _ in range(150):
        n = rng.randint(1, 5)
        m = rng.randint(1, n)
        vals = [[F(rng.randint(0, 20)) for _ in range(m)] for _ in range(n)]
        problem = unit_demand_problem(m)
        joint = JointType.from_values([tuple(r) for r in vals])
        d = problem.decide(joint)
        vec, best = oracles.enumerate_matching_canonical(vals)
        assert d == vec
        got = sum((vals[o - 1][j] for j, o in enumerate(d) if o), F(0))
        assert got == best


def test_unit_demand_fractional_valuations_match_enumeration():
    # non-integer valuations take the general (greedy) canonical path
    rng = random.Random(78)
    for _ in range(60):
        n = rng.randint(1, 4)
        m = rng.randint(1, n)
        vals = [[F(rng.randint(0, 12), rng.randint(1, 3)) for _ in range(m)]
                for _ in range(n)]
        problem = unit_demand_problem(m)
        joint = JointType.from_values([tuple(r) for r in vals])
        assert problem.decide(joint) == oracles.enumerate_matching_canonical(vals)[0]


# ---------------------------------------------------------------------------
# single minded

def test_single_minded_spec_example():
    winners, taxes = single_minded([(1, 2), (2, 3), (3, 3)],
                                   [F(5), F(4), F(3)], 3)
    assert winners == (1, 3)
    assert taxes == (F(-1), F(0), F(0))


def test_single_minded_whole_range_single_player():
    winners, taxes = single_minded([(1, 4)], [F(7)], 4)
    assert winners == (1,)
    assert taxes == (F(0),)


def test_single_minded_identical_intervals_lowest_wins():
    winners, taxes = single_minded([(1, 2), (1, 2)], [F(5), F(5)], 2)
    assert winners == (1,)
    assert taxes == (F(-5), F(0))


def test_single_minded_bad_interval():
    with pytest.raises(ConfigError):
        single_minded([(3, 2)], [F(1)], 3)


def test_single_minded_matches_subset_enumeration_randomized():
    rng = random.Random(99)
    for _ in range(150):
        n = rng.randint(1, 9)
        m = rng.randint(1, 8)
        intervals, values = [], []
        for _ in range(n):
            a = rng.randint(1, m)
            b = rng.randint(a, m)
            intervals.append((a, b))
            values.append(F(rng.randint(0, 20)))
        winners, taxes = single_minded(intervals, values, m)
        vec, best = oracles.enumerate_interval_canonical(intervals, values, m)
        assert winners == tuple(w + 1 for w in vec)
        assert sum((values[w - 1] for w in winners), F(0)) == best


# ---------------------------------------------------------------------------
# public project

def test_public_project_examples():
    d, taxes = public_project(F(30), [F(6), F(7), F(25)])
    assert (d, taxes) == ("build", (F(0), F(0), F(-7)))
    d, taxes = public_project(F(30), [F(1), F(1), F(1)])
    assert (d, taxes) == ("no-build", (F(0), F(0), F(0)))
    d, taxes = public_project(F(10), [F(10)])
    assert (d, taxes) == ("build", (F(0),))


# ---------------------------------------------------------------------------
# classification

def test_classify_vcg_feasible():
    rng = random.Random(11)
    samples = [JointType.from_values([F(rng.randint(0, 20)) for _ in range(3)])
               for _ in range(200)]
    assert classify(vickrey_problem(), samples) == FEASIBLE_OBSERVED


def test_classify_cavallo_smaller_burn():
    rng = random.Random(12)
    vp, cp = vickrey_problem(), cavallo_problem()
    for _ in range(200):
        joint = JointType.from_values([F(rng.randint(0, 20)) for _ in range(4)])
        burn_v = -sum(tax_vector(vp, joint))
        burn_c = -sum(tax_vector(cp, joint))
        assert burn_c <= burn_v


def test_classify_zero_tax_balanced():
    p = build_problem("vickrey", {}, 1)
    zero = JointType.from_values([F(0), F(0)])
    # a vector of all-zero bids yields zero taxes: balanced on this sample
    assert classify(p, [zero]) == BALANCED_OBSERVED


# ---------------------------------------------------------------------------
# strategy-proofness

def test_strategy_proof_vickrey_grid():
    p = vickrey_problem()
    joint = JointType.from_values([F(10), F(8), F(5)])
    devs = [F(k) for k in range(21)]
    for i in (1, 2, 3):
        assert check_strategy_proof(p, joint, i, devs).holds


def test_first_price_negative_control():
    p = first_price_problem()
    joint = JointType.from_values([F(10), F(8)])
    verdict = check_strategy_proof(p, joint, 1, [F(9)])
    assert not verdict.holds
    assert verdict.witness == F(9)
    assert verdict.witness_utility - verdict.truthful_utility == F(1)


def test_strategy_proof_vacuous_on_empty_deviations():
    p = vickrey_problem()
    joint = JointType.from_values([F(3), F(2)])
    assert check_strategy_proof(p, joint, 1, []).holds


def test_strategy_proof_all_mechanisms_randomized():
    rng = random.Random(31337)
    grid = [F(k) for k in range(0, 21, 4)]
    for _ in range(40):
        bids = [F(rng.randint(0, 20)) for _ in range(rng.randint(2, 5))]
        for problem in (vickrey_problem(), cavallo_problem()):
            joint = JointType.from_values(bids)
            for i in joint.indices:
                assert check_strategy_proof(problem, joint, i, grid).holds
        thetas = [F(rng.randint(0, 20)) for _ in range(3)]
        pp = public_project_problem(F(25), 3)
        joint = JointType.from_values(thetas)
        for i in joint.indices:
            assert check_strategy_proof(pp, joint, i, grid).holds


# ---------------------------------------------------------------------------
# decide_efficient against brute force (the efficiency invariant)

@pytest.mark.parametrize("mech,params", [
    ("vickrey", {}),
    ("public-project", {"cost": "25/1"}),
])
def test_decide_efficient_welfare_optimal_scalar(mech, params):
    rng = random.Random(5150)
    for _ in range(100):
        n = rng.randint(1, 5)
        values = [F(rng.randint(0, 20)) for _ in range(n)]
        joint = JointType.from_values(values)
        problem = build_problem(mech, params, n)
        d = decide_efficient(problem, joint)
        ev = oracles.evaluate(mech, params, joint)
        total = sum((problem.utility(d, i, v) for i, v in joint.entries), F(0))
        assert total == ev["welfare"]
