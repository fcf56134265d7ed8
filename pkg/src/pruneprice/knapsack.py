"""Benchmark oracles: greedy Fractional Knapsack and exact Knapsack."""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from fractions import Fraction

from .model import Instance

DEFAULT_ORACLE_LIMIT = 30
ORACLE_ENV = "PRUNEPRICE_ORACLE_LIMIT"


class OracleSizeError(ValueError):
    """Instance too large for the exact Knapsack oracle."""


@dataclass(frozen=True)
class FractionalSolution:
    fopt: Fraction
    allocation: dict[int, Fraction]


@dataclass(frozen=True)
class IntegralSolution:
    opt: Fraction
    chosen: tuple[int, ...]


def oracle_limit() -> int:
    raw = os.environ.get(ORACLE_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_ORACLE_LIMIT
    try:
        limit = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ORACLE_ENV} must be an integer, got {raw!r}") from exc
    if limit < 0:
        raise ValueError(f"{ORACLE_ENV} must be nonnegative")
    return limit


def ratio_order(values: dict[int, Fraction], costs: dict[int, Fraction]) -> list[int]:
    """Ids by decreasing value-per-cost; zero cost counts as infinite, ties by id.

    Ratios are compared by cross-multiplication so zero costs need no
    special case.
    """
    def cmp(i, j):
        lhs = values[i] * costs[j]
        rhs = values[j] * costs[i]
        if lhs != rhs:
            return -1 if lhs > rhs else 1
        return -1 if i < j else (1 if i > j else 0)

    return sorted(values, key=functools.cmp_to_key(cmp))


def fractional_opt(instance: Instance) -> FractionalSolution:
    values, costs = instance.values, instance.costs
    remaining = instance.budget
    alloc = {i: Fraction(0) for i in instance.ids}
    total = Fraction(0)
    for i in ratio_order(values, costs):
        if costs[i] <= remaining:
            alloc[i] = Fraction(1)
            remaining -= costs[i]
            total += values[i]
        else:
            frac = remaining / costs[i]
            alloc[i] = frac
            total += frac * values[i]
            break
    return FractionalSolution(total, alloc)


def integral_opt(instance: Instance, limit: int | None = None) -> IntegralSolution:
    """Exact Knapsack optimum by depth-first branch-and-bound.

    Items are branched in id order, include-first, and the incumbent is only
    replaced by a strictly better set.  The first optimal set met is therefore
    the lexicographically smallest one.  The bound is the greedy fractional
    relaxation of the undecided items.
    """
    if limit is None:
        limit = oracle_limit()
    n = len(instance)
    if n > limit:
        raise OracleSizeError(f"{n} items exceeds the exact-oracle limit of {limit}")

    ids = list(instance.ids)
    # scale to integers; the argmax is unchanged
    vden = math.lcm(*(it.value.denominator for it in instance.items))
    cden = math.lcm(instance.budget.denominator,
                    *(it.cost.denominator for it in instance.items))
    val = [int(it.value * vden) for it in instance.items]
    cost = [int(it.cost * cden) for it in instance.items]
    cap = int(instance.budget * cden)

    # positions ordered by ratio for the bound
    order = ratio_order(dict(enumerate(val)), dict(enumerate(cost)))

    best_val = -1
    best_set: tuple[int, ...] = ()

    def beats_best(cur_val, pos, rem):
        # Is the fractional bound over positions >= pos strictly above best_val?
        num, den = cur_val, 1
        for k in order:
            if k < pos:
                continue
            if cost[k] <= rem:
                rem -= cost[k]
                num += val[k]
            else:
                # num + rem * val[k] / cost[k]
                return num * cost[k] + rem * val[k] > best_val * cost[k]
        return num > best_val

    chosen: list[int] = []

    def dfs(pos, cur_val, rem):
        nonlocal best_val, best_set
        if pos == n:
            if cur_val > best_val:
                best_val = cur_val
                best_set = tuple(chosen)
            return
        if not beats_best(cur_val, pos, rem):
            return
        if cost[pos] <= rem:
            chosen.append(pos)
            dfs(pos + 1, cur_val + val[pos], rem - cost[pos])
            chosen.pop()
        dfs(pos + 1, cur_val, rem)

    dfs(0, 0, cap)
    return IntegralSolution(Fraction(best_val, vden), tuple(ids[p] for p in best_set))
