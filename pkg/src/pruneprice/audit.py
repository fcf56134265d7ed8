"""Exact and statistical verification of mechanism outcomes.

Covers individual rationality and budget checks, the closed-form acceptance
probabilities of the randomized mechanism, approximation ratios, a seeded
Monte-Carlo estimator, and a grid-plus-bisection truthfulness audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import kernels, rng
from .knapsack import fractional_opt
from .mechanisms import (
    MechanismKind,
    randomized_distribution,
    run,
)
from .model import Instance, Outcome, validate_bids
from .pruning import EmptyPruneError, PruneResult, prune

__all__ = [
    "Violation",
    "AuditReport",
    "AllocationProbabilities",
    "MonteCarloResult",
    "InfiniteRatio",
    "acceptance_probabilities",
    "expected_payments",
    "expected_value",
    "ratio",
    "monte_carlo",
    "check_individual_rationality",
    "check_budget_feasibility",
    "structural_grid",
    "audit_truthfulness",
    "audit_all_agents",
    "BOUND_LABELS",
    "meets_bound",
]

BISECTION_DEPTH = 40


@dataclass(frozen=True)
class Violation:
    item: int | None
    check: str
    witness: dict[str, str]


@dataclass
class AuditReport:
    violations: list[Violation] = field(default_factory=list)
    checked_points: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def add(self, item, check, **witness):
        self.violations.append(Violation(item, check, {k: str(v) for k, v in witness.items()}))

    def merge(self, other: "AuditReport") -> "AuditReport":
        self.violations.extend(other.violations)
        self.checked_points += other.checked_points
        return self

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked_points": self.checked_points,
            "violations": [
                {"item": v.item, "check": v.check, "witness": v.witness}
                for v in self.violations
            ],
        }


@dataclass(frozen=True)
class AllocationProbabilities:
    x: dict[int, Fraction]
    expected_value: Fraction

    def to_dict(self) -> dict:
        return {"x": {str(i): str(p) for i, p in self.x.items()},
                "expected_value": str(self.expected_value)}


@dataclass(frozen=True)
class MonteCarloResult:
    trials: int
    x_hat: dict[int, Fraction]
    value: Fraction
    x_se: dict[int, float]
    value_se: float


@dataclass(frozen=True)
class InfiniteRatio:
    """Sentinel for ``alg == 0``; carries the instance that produced it."""

    instance: Instance

    def __str__(self):
        return "inf"


# ---------------------------------------------------------------------------
# closed-form analysis of the randomized mechanism


def _clip_length(lo, hi, a, b):
    """Length of ``[a, b] ∩ [lo, hi]``."""
    return max(Fraction(0), min(hi, b) - max(lo, a))


def _acceptance_thresholds(p: PruneResult, bids, budget):
    """Per kept item, the set of top-item prices ``s`` it accepts at.

    Returned as ``(item, kind, t)``: kind ``"ge"`` means accept iff
    ``s >= t`` (the top item), ``"le"`` means ``s <= t`` (rest items).
    """
    B = Fraction(budget)
    out = [(p.star, "ge", Fraction(bids[p.star]))]
    for i in p.rest:
        out.append((i, "le", B - p.v_rest * Fraction(bids[i]) / p.values[i]))
    return out


def acceptance_probabilities(p: PruneResult, bids: Mapping[int, Fraction],
                             budget: Fraction) -> AllocationProbabilities:
    """Exact probability that each kept item accepts its randomized offer."""
    if not p.rest:
        x = {p.star: Fraction(int(Fraction(bids[p.star]) <= p.v_star / p.r))}
        return AllocationProbabilities(x, p.v_star * x[p.star])
    d = randomized_distribution(p, budget)
    width = d.hi - d.lo
    x = {}
    for i, kind, t in _acceptance_thresholds(p, bids, budget):
        if kind == "ge":
            at_hi, at_lo = d.hi >= t, d.lo >= t
            spread = _clip_length(d.lo, d.hi, t, d.hi)
        else:
            at_hi, at_lo = d.hi <= t, d.lo <= t
            spread = _clip_length(d.lo, d.hi, d.lo, t)
        x[i] = d.q_star * at_hi + d.q_rest * at_lo
        if d.q:
            x[i] += d.q * spread / width
    ev = sum((p.values[i] * x[i] for i in x), Fraction(0))
    return AllocationProbabilities(dict(sorted(x.items())), ev)


def expected_payments(p: PruneResult, bids: Mapping[int, Fraction],
                      budget: Fraction) -> dict[int, Fraction]:
    """Exact expected payment to each kept item under the randomized mechanism."""
    B = Fraction(budget)
    if not p.rest:
        hi = p.v_star / p.r
        return {p.star: hi if Fraction(bids[p.star]) <= hi else Fraction(0)}
    d = randomized_distribution(p, B)
    # q == 0 exactly when lo == hi (only reachable with bids above B)
    width = (d.hi - d.lo) or Fraction(1)
    pay = {}
    for i, kind, t in _acceptance_thresholds(p, bids, B):
        if kind == "ge":
            # price is s itself
            a = max(d.lo, t)
            smooth = (d.hi ** 2 - a ** 2) / 2 if a < d.hi else Fraction(0)
            pay[i] = (d.q_star * d.hi * (d.hi >= t) + d.q_rest * d.lo * (d.lo >= t)
                      + d.q * smooth / width)
        else:
            share = p.values[i] / p.v_rest
            m = min(d.hi, t)
            smooth = B * (m - d.lo) - (m ** 2 - d.lo ** 2) / 2 if m > d.lo else Fraction(0)
            pay[i] = share * (d.q_star * (B - d.hi) * (d.hi <= t)
                              + d.q_rest * (B - d.lo) * (d.lo <= t)
                              + d.q * smooth / width)
    return dict(sorted(pay.items()))


def expected_value(kind, instance: Instance, bids=None, seed: int = 0) -> Fraction:
    """``alg``: realized value, or the exact expectation for the randomized kind."""
    kind = MechanismKind.parse(kind)
    if kind is not MechanismKind.RANDOMIZED:
        return run(kind, instance, bids, seed).value
    bids = instance.costs if bids is None else validate_bids(instance, bids)
    try:
        p = prune(instance.values, bids, instance.budget)
    except EmptyPruneError:
        return Fraction(0)
    return acceptance_probabilities(p, bids, instance.budget).expected_value


def ratio(instance: Instance, kind, mode: str = "exact", seed: int = 0,
          trials: int = 10_000) -> Fraction | InfiniteRatio:
    """``fopt / alg`` under truthful bidding."""
    fopt = fractional_opt(instance).fopt
    if mode == "exact":
        alg = expected_value(kind, instance, seed=seed)
    elif mode == "monte-carlo":
        alg = monte_carlo(kind, instance, trials, seed).value
    else:
        raise ValueError(f"unknown ratio mode {mode!r}")
    if alg == 0:
        return InfiniteRatio(instance)
    return fopt / alg


# ---------------------------------------------------------------------------
# Monte Carlo


def _ceil_scaled(t: Fraction) -> int:
    return -((-t.numerator * rng.TWO64) // t.denominator)


def _floor_scaled(t: Fraction) -> int:
    return (t.numerator * rng.TWO64) // t.denominator


def _kernel_args(p: PruneResult, bids, budget):
    """Integer encoding of the randomized mechanism's acceptance events."""
    d = randomized_distribution(p, budget)
    top = rng.MASK64
    cut_a = _ceil_scaled(d.q_star)
    cut_b_m1 = _ceil_scaled(d.q_star + d.q_rest) - 1
    # zero width means q == 0: branch (c) is never drawn
    width = (d.hi - d.lo) or Fraction(1)
    ids, acc_a, acc_b, lo_k, hi_k = [], [], [], [], []
    for i, kind, t in _acceptance_thresholds(p, bids, budget):
        ids.append(i)
        pos = (t - d.lo) / width
        if kind == "ge":
            acc_a.append(int(d.hi >= t))
            acc_b.append(int(d.lo >= t))
            lo, hi = max(0, _ceil_scaled(pos)), top
        else:
            acc_a.append(int(d.hi <= t))
            acc_b.append(int(d.lo <= t))
            lo, hi = 0, min(top, _floor_scaled(pos))
        if lo > hi:
            lo, hi = 1, 0
        lo_k.append(lo)
        hi_k.append(hi)
    return ids, (cut_a, cut_b_m1, acc_a, acc_b, lo_k, hi_k)


def monte_carlo(kind, instance: Instance, trials: int, seed: int = 0,
                bids: Mapping[int, Fraction] | None = None) -> MonteCarloResult:
    """Empirical acceptance frequencies over ``trials`` seeded runs.

    Trial ``t`` behaves exactly like ``run(kind, instance, bids,
    derive_seed(seed, t))``.  Pruning does not depend on the seed, so it is
    done once; the randomized second stage goes through the compiled kernel.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    kind = MechanismKind.parse(kind)
    bids = instance.costs if bids is None else validate_bids(instance, bids)
    counts = {i: 0 for i in instance.ids}
    try:
        p = prune(instance.values, bids, instance.budget)
    except EmptyPruneError:
        p = None
    if kind is MechanismKind.RANDOMIZED and p is not None and p.rest:
        ids, args = _kernel_args(p, bids, instance.budget)
        vals = [float(p.values[i]) for i in ids]
        hits, s1, s2 = kernels.mc_accept_counts(seed & rng.MASK64, trials, *args, vals)
        counts.update(zip(ids, hits))
        mean = s1 / trials
        var = max(0.0, s2 / trials - mean * mean)
    else:
        # no randomness left: every trial has the same outcome
        out = run(kind, instance, bids, rng.derive_seed(seed & rng.MASK64, 0))
        for i in out.winners:
            counts[i] = trials
        var = 0.0
    x_hat = {i: Fraction(c, trials) for i, c in counts.items()}
    value = sum((instance.values[i] * x_hat[i] for i in counts), Fraction(0))
    x_se = {i: math.sqrt(float(x) * (1 - float(x)) / trials) for i, x in x_hat.items()}
    return MonteCarloResult(trials, x_hat, value, x_se, math.sqrt(var / trials))


# ---------------------------------------------------------------------------
# outcome checks


def check_individual_rationality(outcome: Outcome, bids: Mapping[int, Fraction]) -> AuditReport:
    report = AuditReport()
    for i in outcome.winners:
        report.checked_points += 1
        pay = outcome.payments.get(i)
        if pay is None or pay < Fraction(bids[i]):
            report.add(i, "individual-rationality", payment=pay, bid=bids[i])
    for i, pay in outcome.payments.items():
        if i not in outcome.winners:
            report.checked_points += 1
            if pay < 0:
                report.add(i, "individual-rationality", payment=pay, bid=bids.get(i))
    return report


def check_budget_feasibility(outcome: Outcome, budget: Fraction) -> AuditReport:
    report = AuditReport(checked_points=1)
    total = outcome.total_payment
    if total > budget:
        report.add(None, "budget-feasibility", total=total, budget=budget)
    return report


# ---------------------------------------------------------------------------
# truthfulness


def structural_grid(instance: Instance, agent: int, truth: Outcome,
                    r: Fraction | None) -> list[Fraction]:
    """Bids worth probing: 0, c/2, c, each posted price (and just above it),
    v/r, and B."""
    B = instance.budget
    c = instance.costs[agent]
    tiny = B / 2 ** BISECTION_DEPTH
    points = {Fraction(0), c / 2, c, B}
    if r is not None:
        points.add(instance.values[agent] / r)
    if agent in truth.offers:
        price = truth.offers[agent]
        points.update({price, price + tiny})
    return sorted(x for x in points if 0 <= x <= B)


def _utility(outcome: Outcome, agent: int, cost: Fraction) -> Fraction:
    if agent in outcome.winners:
        return outcome.payments[agent] - cost
    return Fraction(0)


def audit_truthfulness(kind, instance: Instance, agent: int,
                       deviations: Iterable[Fraction] = (),
                       seeds: Sequence[int] = (0,),
                       depth: int = BISECTION_DEPTH) -> AuditReport:
    """Audit one agent's incentives, one seed (one realization) at a time.

    Per seed: no grid deviation beats truthful bidding, the winning region is
    downward closed on the grid, and a truthful winner's payment lies inside
    the win/lose bracket found by ``depth`` rounds of exact bisection.
    """
    kind = MechanismKind.parse(kind)
    costs = instance.costs
    B = instance.budget
    cost = costs[agent]
    extra = [Fraction(x) for x in deviations]
    if kind is not MechanismKind.RANDOMIZED:
        seeds = tuple(seeds)[:1] or (0,)
    report = AuditReport()

    try:
        r_truth = prune(instance.values, costs, B).r
    except EmptyPruneError:
        r_truth = None

    for seed in seeds:
        def at(bid):
            bids = dict(costs)
            bids[agent] = bid
            return run(kind, instance, bids, seed)

        truth = at(cost)
        u_truth = _utility(truth, agent, cost)
        report.merge(check_individual_rationality(truth, costs))
        report.merge(check_budget_feasibility(truth, B))

        grid = sorted(set(structural_grid(instance, agent, truth, r_truth)) | set(extra))
        wins = []
        for bid in grid:
            out = at(bid)
            report.checked_points += 1
            won = agent in out.winners
            wins.append(won)
            u = _utility(out, agent, cost)
            if u > u_truth:
                report.add(agent, "profitable-deviation", seed=seed, bid=bid,
                           utility=u, truthful_utility=u_truth)
            report.merge(check_budget_feasibility(out, B))
        for lower, higher in zip(range(len(grid)), range(1, len(grid))):
            if wins[higher] and not wins[lower]:
                report.add(agent, "monotonicity", seed=seed, losing_bid=grid[lower],
                           winning_bid=grid[higher])

        if agent not in truth.winners:
            continue
        paid = truth.payments[agent]
        lo, hi = cost, B
        if agent in at(B).winners:
            report.checked_points += 1
            if paid != B:
                report.add(agent, "threshold-payment", seed=seed, payment=paid, threshold=B)
            continue
        for _ in range(depth):
            mid = (lo + hi) / 2
            if agent in at(mid).winners:
                lo = mid
            else:
                hi = mid
            report.checked_points += 1
        # re-verify the bracket endpoints
        if agent not in at(lo).winners or agent in at(hi).winners:
            report.add(agent, "threshold-bracket", seed=seed, lo=lo, hi=hi)
        if not lo <= paid <= hi:
            report.add(agent, "threshold-payment", seed=seed, payment=paid, lo=lo, hi=hi)
        report.checked_points += 2
    return report


def audit_all_agents(kind, instance: Instance, seeds: Sequence[int] = (0,),
                     agents: Iterable[int] | None = None) -> AuditReport:
    report = AuditReport()
    for agent in (instance.ids if agents is None else agents):
        report.merge(audit_truthfulness(kind, instance, agent, seeds=seeds))
    return report


# ---------------------------------------------------------------------------
# proven approximation bounds against the fractional optimum

BOUND_LABELS = {
    MechanismKind.FIRST_WARMUP: "4",
    MechanismKind.SECOND_WARMUP: "2+sqrt(2)",
    MechanismKind.DETERMINISTIC: "3",
    MechanismKind.RANDOMIZED: "2",
}


def meets_bound(kind, fopt: Fraction, alg: Fraction) -> bool:
    """Exact check of ``fopt <= bound * alg`` for the kind's proven bound."""
    kind = MechanismKind.parse(kind)
    if kind is MechanismKind.FIRST_WARMUP:
        return 4 * alg >= fopt
    if kind is MechanismKind.SECOND_WARMUP:
        # fopt - 2 alg <= sqrt(2) alg
        gap = fopt - 2 * alg
        return gap <= 0 or gap * gap <= 2 * alg * alg
    if kind is MechanismKind.DETERMINISTIC:
        return 3 * alg >= fopt
    return 2 * alg >= fopt
