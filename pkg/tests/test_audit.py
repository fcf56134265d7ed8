import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pruneprice.audit import (
    AuditReport,
    InfiniteRatio,
    acceptance_probabilities,
    audit_all_agents,
    audit_truthfulness,
    check_budget_feasibility,
    check_individual_rationality,
    expected_payments,
    expected_value,
    meets_bound,
    monte_carlo,
    ratio,
)
from pruneprice.knapsack import fractional_opt
from pruneprice.mechanisms import MechanismKind, randomized_distribution, run
from pruneprice.model import Instance, Outcome
from pruneprice.pruning import prune
from oracles import mixture_oracle
from strategies import instances, small_fractions

KINDS = list(MechanismKind)


def _p(inst, bids=None):
    return prune(inst.values, inst.costs if bids is None else bids, inst.budget)


def _oracle(inst, bids):
    p = _p(inst, bids)
    d = randomized_distribution(p, inst.budget)
    return mixture_oracle(p.values, bids, inst.budget, p.r, p.star, p.rest,
                          d.q, d.q_star, d.q_rest, d.lo, d.hi)


def _payment_oracle(inst, bids):
    """Expected payments by exact midpoint integration of each linear piece."""
    p = _p(inst, bids)
    d = randomized_distribution(p, inst.budget)
    B = inst.budget

    def pay(s):
        out = {p.star: s if bids[p.star] <= s else F(0)}
        for i in p.rest:
            offer = p.values[i] / p.v_rest * (B - s)
            out[i] = offer if bids[i] <= offer else F(0)
        return out

    total = {i: F(0) for i in p.kept}
    for weight, s in ((d.q_star, d.hi), (d.q_rest, d.lo)):
        for i, x in pay(s).items():
            total[i] += weight * x
    cuts = {d.lo, d.hi, bids[p.star]}
    cuts |= {B - p.v_rest * bids[i] / p.values[i] for i in p.rest}
    cuts = sorted(c for c in cuts if d.lo <= c <= d.hi)
    for a, b in zip(cuts, cuts[1:]):
        for i, x in pay((a + b) / 2).items():
            total[i] += d.q * (b - a) / (d.hi - d.lo) * x
    return total


def test_acceptance_d2(d2):
    probs = acceptance_probabilities(_p(d2), d2.costs, d2.budget)
    assert probs.x == {1: 0, 2: F(1, 2), 3: F(1, 2)}
    assert probs.expected_value == 1


def test_acceptance_lower_bound(lower_bound):
    p = _p(lower_bound)
    d = randomized_distribution(p, lower_bound.budget)
    assert d.lo == F(199, 399)
    probs = acceptance_probabilities(p, lower_bound.costs, lower_bound.budget)
    assert probs.x == {0: 1, 2: F(1, 2)}
    assert probs.expected_value == F(3, 2)


def test_top_bid_above_hi_never_accepts(d1):
    bids = dict(d1.costs)
    bids[0] = F(39, 10)
    p = _p(d1, bids)
    d = randomized_distribution(p, d1.budget)
    bids_high = dict(bids)
    bids_high[p.star] = d.hi + 1
    assert acceptance_probabilities(p, bids_high, d1.budget).x[p.star] == 0


def test_lone_item_probabilities(single):
    probs = acceptance_probabilities(_p(single), single.costs, single.budget)
    assert probs.x == {0: 1}
    assert probs.expected_value == 5


@given(instances(max_n=7))
@settings(max_examples=300, deadline=None)
def test_probabilities_match_mixture_oracle(inst):
    p = _p(inst)
    if not p.rest:
        return
    probs = acceptance_probabilities(p, inst.costs, inst.budget)
    assert probs.x == _oracle(inst, inst.costs)
    assert all(0 <= x <= 1 for x in probs.x.values())
    assert probs.expected_value == sum(p.values[i] * x for i, x in probs.x.items())


@given(instances(max_n=6), st.data())
@settings(max_examples=200, deadline=None)
def test_probabilities_match_oracle_under_misreports(inst, data):
    bids = {i: data.draw(small_fractions(max_num=8, max_den=4)) for i in inst.ids}
    try:
        p = _p(inst, bids)
    except ValueError:
        return
    if not p.rest:
        return
    assert acceptance_probabilities(p, bids, inst.budget).x == _oracle(inst, bids)


def test_collapsed_price_interval():
    # the top-value items overbid B, so r B = v(S): q = 0 and lo = hi
    from pruneprice import rng
    inst = Instance.build(1, ["2/3", "1/3", 1, 1], [0, 0, 0, 0])
    bids = {0: F(0), 1: F(0), 2: F(2), 3: F(2)}
    p = _p(inst, bids)
    d = randomized_distribution(p, inst.budget)
    assert d.q == 0 and d.lo == d.hi
    probs = acceptance_probabilities(p, bids, inst.budget)
    assert probs.x == _oracle(inst, bids) == {0: 1, 1: 1}
    assert expected_payments(p, bids, inst.budget) == {0: F(2, 3), 1: F(1, 3)}
    mc = monte_carlo("randomized", inst, 50, seed=2, bids=bids)
    assert mc.x_hat == {0: 1, 1: 1, 2: 0, 3: 0}
    for t in range(50):
        out = run("randomized", inst, bids, rng.derive_seed(2, t))
        assert out.winners == (0, 1)


@given(instances(max_n=7))
@settings(max_examples=300, deadline=None)
def test_expected_payments_match_oracle(inst):
    p = _p(inst)
    if not p.rest:
        return
    pay = expected_payments(p, inst.costs, inst.budget)
    assert pay == _payment_oracle(inst, inst.costs)
    assert sum(pay.values()) <= inst.budget


@given(instances(max_n=7))
@settings(max_examples=300, deadline=None)
def test_per_item_value_inequalities(inst):
    p = _p(inst)
    if not p.rest:
        return
    b = inst.costs
    d = randomized_distribution(p, inst.budget)
    x = acceptance_probabilities(p, b, inst.budget).x
    v = p.values
    assert v[p.star] * x[p.star] >= d.q_star * v[p.star] + (v[p.star] - p.r * b[p.star]) / 2
    for i in p.rest:
        assert v[i] * x[i] >= d.q_rest * v[i] + (v[i] - p.r * b[i]) / 2


@given(instances(max_n=7), st.sampled_from(KINDS))
@settings(max_examples=300, deadline=None)
def test_proven_bounds(inst, kind):
    fopt = fractional_opt(inst).fopt
    assert meets_bound(kind, fopt, expected_value(kind, inst))


def test_meets_bound_second_warmup_edges():
    # bound 2 + sqrt(2) ~ 3.41421
    assert meets_bound("second-warmup", F(341, 100), F(1))
    assert not meets_bound("second-warmup", F(342, 100), F(1))
    assert meets_bound("second-warmup", F(2), F(1))
    assert not meets_bound("randomized", F(201, 100), F(1))
    assert meets_bound("randomized", F(2), F(1))


def test_ratio_examples(lower_bound, d2, single):
    assert ratio(lower_bound, "deterministic") == F(599, 200)
    assert ratio(d2, "randomized") == 2
    for kind in KINDS:
        assert ratio(single, kind) == 1


def test_ratio_infinite_when_nothing_bought(d2):
    # find a seed where the single Monte-Carlo trial buys nothing
    for seed in range(200):
        if monte_carlo("randomized", d2, 1, seed).value == 0:
            result = ratio(d2, "randomized", mode="monte-carlo", seed=seed, trials=1)
            assert isinstance(result, InfiniteRatio)
            assert result.instance == d2
            assert str(result) == "inf"
            return
    pytest.fail("no empty realization found")


def test_ratio_mode_validation(d1):
    with pytest.raises(ValueError):
        ratio(d1, "deterministic", mode="guess")


def test_audit_d1_top_item(d1):
    grid = [F(0), F(1), F(2), F(3), F(16, 5), F(7, 2), F(4)]
    report = audit_truthfulness("deterministic", d1, 0, deviations=grid)
    assert report.passed, report.to_dict()
    wins = [0 in run("deterministic", d1, {**d1.costs, 0: g}).winners for g in grid]
    assert wins == [True] * 5 + [False] * 2


def test_audit_lower_bound_top_item(lower_bound):
    grid = [F(0), F(1, 4), F(1, 2), F(1, 2) + F(1, 10**6), F(3, 4), F(1)]
    report = audit_truthfulness("deterministic", lower_bound, 0, deviations=grid)
    assert report.passed, report.to_dict()
    wins = [0 in run("deterministic", lower_bound, {**lower_bound.costs, 0: g}).winners
            for g in grid]
    assert wins == [True, True, True, False, False, False]


def test_agent_bidding_above_budget_never_wins(d1):
    for kind in KINDS:
        for agent in d1.ids:
            bids = {**d1.costs, agent: d1.budget + 1}
            for seed in range(4):
                assert agent not in run(kind, d1, bids, seed).winners


@pytest.mark.parametrize("kind", KINDS)
def test_audit_examples_pass(kind, d1, d2, lower_bound, single):
    for inst in (d1, d2, lower_bound, single):
        report = audit_all_agents(kind, inst, seeds=range(8))
        assert report.passed, report.to_dict()
        assert report.checked_points > 0


def test_audit_detects_overpayment(monkeypatch, d1):
    # a mechanism that pays winners twice their threshold fails the audit
    import pruneprice.audit as audit

    def greedy_run(kind, instance, bids=None, seed=0):
        out = run(kind, instance, bids, seed)
        return Outcome(out.winners, {i: 2 * x for i, x in out.payments.items()},
                       out.value, out.offers)

    monkeypatch.setattr(audit, "run", greedy_run)
    report = audit_truthfulness("deterministic", d1, 0)
    assert not report.passed
    checks = {v.check for v in report.violations}
    assert "threshold-payment" in checks or "budget-feasibility" in checks


def test_audit_detects_non_monotone_rule(monkeypatch, d1):
    import pruneprice.audit as audit

    def odd_run(kind, instance, bids=None, seed=0):
        # agent 0 wins only when it overbids its cost
        win = bids is not None and bids[0] > instance.costs[0]
        if win:
            return Outcome((0,), {0: bids[0]}, instance.values[0], {0: bids[0]})
        return Outcome((), {}, F(0), {})

    monkeypatch.setattr(audit, "run", odd_run)
    report = audit_truthfulness("deterministic", d1, 0)
    checks = {v.check for v in report.violations}
    assert {"profitable-deviation", "monotonicity"} <= checks


@given(instances(max_n=5), st.sampled_from(KINDS), st.integers(0, 2**64 - 1))
@settings(max_examples=60, deadline=None)
def test_audit_random_instances(inst, kind, seed):
    report = audit_all_agents(kind, inst, seeds=(seed,))
    assert report.passed, report.to_dict()


def test_monte_carlo_d2(d2):
    mc = monte_carlo("randomized", d2, 100_000, seed=42)
    exact = acceptance_probabilities(_p(d2), d2.costs, d2.budget).x
    for i, x in exact.items():
        se = math.sqrt(float(x) * (1 - float(x)) / mc.trials)
        assert abs(float(mc.x_hat[i]) - float(x)) <= 3 * se
    assert mc.x_hat[0] == 0


def test_monte_carlo_deterministic_is_constant(d1):
    mc = monte_carlo("deterministic", d1, 10, seed=3)
    assert mc.x_hat == {0: 1, 1: 0, 2: 0}
    assert mc.value == 6
    assert mc.value_se == 0


def test_monte_carlo_lone_item(single):
    mc = monte_carlo("randomized", single, 100, seed=1)
    assert mc.x_hat == {0: 1}


def test_monte_carlo_matches_individual_runs(d2, lower_bound):
    from pruneprice import rng
    for inst in (d2, lower_bound):
        mc = monte_carlo("randomized", inst, 200, seed=9)
        counts = {i: 0 for i in inst.ids}
        for t in range(200):
            for i in run("randomized", inst, seed=rng.derive_seed(9, t)).winners:
                counts[i] += 1
        assert mc.x_hat == {i: F(c, 200) for i, c in counts.items()}


def test_monte_carlo_needs_trials(d1):
    with pytest.raises(ValueError):
        monte_carlo("randomized", d1, 0)


def test_outcome_checks(d1):
    out = run("deterministic", d1)
    assert check_individual_rationality(out, d1.costs).passed
    assert check_budget_feasibility(out, d1.budget).passed
    bad = Outcome((0,), {0: 2 * d1.budget}, F(6), {0: 2 * d1.budget})
    report = check_budget_feasibility(bad, d1.budget)
    assert not report.passed
    assert report.violations[0].witness == {"total": "8", "budget": "4"}
    underpaid = Outcome((0,), {0: F(1)}, F(6))
    assert not check_individual_rationality(underpaid, d1.costs).passed
    empty = Outcome((), {}, F(0))
    assert check_individual_rationality(empty, d1.costs).passed
    assert check_budget_feasibility(empty, d1.budget).passed


def test_report_serialization():
    report = AuditReport()
    report.add(3, "monotonicity", bid=F(1, 3))
    assert report.to_dict() == {
        "passed": False, "checked_points": 0,
        "violations": [{"item": 3, "check": "monotonicity", "witness": {"bid": "1/3"}}],
    }
