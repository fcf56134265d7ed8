from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pruneprice.knapsack import fractional_opt
from pruneprice.model import Instance
from pruneprice.pruning import EmptyPruneError, cap_payment, fopt_bound, prune
from oracles import brute_prune
from strategies import instances, small_fractions


def _prune(inst):
    return prune(inst.values, inst.costs, inst.budget)


def test_d1(d1):
    p = _prune(d1)
    assert (p.r, p.kept, p.star, p.rest) == (F(3, 2), (0, 1), 0, (1,))
    assert (p.v_kept, p.v_rest, p.c_kept_lower) == (10, 4, 4)


def test_d2(d2):
    p = _prune(d2)
    assert (p.r, p.kept, p.star, p.rest) == (2, (1, 2, 3), 1, (2, 3))
    assert p.discarded == (0,)


def test_single(single):
    p = _prune(single)
    assert (p.r, p.kept) == (F(1, 2), (0,))
    assert p.rest == ()


def test_lower_bound(lower_bound):
    p = _prune(lower_bound)
    assert (p.r, p.kept) == (F(399, 200), (0, 2))


def test_lone_kept_item_meets_budget_line_with_equality():
    p = prune([5], [0], 10)
    assert p.r * 10 == p.v_kept
    assert fopt_bound(p, 10, {0: F(0)}) == 2 * p.v_kept


def test_accepts_sequences():
    p = prune([6, 4, 2], [2, 2, 2], 4)
    assert p.kept == (0, 1)


def test_bids_above_budget_can_empty_the_market():
    with pytest.raises(EmptyPruneError):
        prune([1], [5], 1)


@pytest.mark.parametrize("raw, value, r, expected", [
    (4, 6, F(3, 2), 4),
    (10, 6, F(3, 2), 4),
    (F(1, 2), 1, F(399, 200), F(1, 2)),
])
def test_cap_payment(raw, value, r, expected):
    assert cap_payment(F(raw), F(value), r) == expected


def test_fopt_bound(d1, d2, single):
    for inst, expected in ((d1, 10), (d2, 2), (single, F(17, 2))):
        assert fopt_bound(_prune(inst), inst.budget, inst.costs) == expected


@given(instances(max_n=8))
@settings(max_examples=400, deadline=None)
def test_structural_invariants(inst):
    p = _prune(inst)
    v, b, B, r = inst.values, inst.costs, inst.budget, p.r
    assert p.kept
    for i in p.kept:
        assert b[i] * r <= v[i] <= r * B
    assert p.v_rest <= r * B <= p.v_kept
    fopt = fractional_opt(inst).fopt
    bound = fopt_bound(p, B, b)
    assert fopt <= bound <= 2 * p.v_kept
    if p.rest:
        assert r * B < p.v_kept
        assert bound < 2 * p.v_kept
    else:
        # a lone kept item never enters the loop: r B is exactly its value
        assert r * B == p.v_kept
    for k in p.discarded:
        assert v[k] <= r * b[k]
    assert set(p.kept) | set(p.discarded) <= set(inst.ids)
    assert p.star == min(i for i in p.kept if v[i] == max(v[j] for j in p.kept))


@given(instances(max_n=6, max_den=4))
@settings(max_examples=400, deadline=None)
def test_matches_event_grid_simulator(inst):
    p = _prune(inst)
    assert (p.r, p.kept) == brute_prune(inst.values, inst.costs, inst.budget)


@given(instances(max_n=6), st.data())
@settings(max_examples=300, deadline=None)
def test_kept_bid_changes_leave_output_alone(inst, data):
    p = _prune(inst)
    agent = data.draw(st.sampled_from(p.kept))
    new_bid = data.draw(small_fractions(max_num=24, max_den=6))
    assume(new_bid <= inst.budget)
    bids = dict(inst.costs)
    bids[agent] = new_bid
    try:
        q = prune(inst.values, bids, inst.budget)
    except EmptyPruneError:
        return
    if agent in q.kept:
        assert (q.r, q.kept) == (p.r, p.kept)


def test_input_validation():
    with pytest.raises(ValueError):
        prune({}, {}, 1)
    with pytest.raises(ValueError):
        prune([1], [1, 2], 1)
    with pytest.raises(ValueError):
        prune([1], [-1], 1)
    with pytest.raises(ValueError):
        prune([1], [0], 0)
