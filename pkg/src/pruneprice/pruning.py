"""First-stage pruning by value-per-cost ratio, and the payment cap of the
composition template.

The ratio ``r`` rises continuously in the mechanism's definition.  Here it
jumps between events only: the next kept item's ratio, or the point
``(v(S) - max v) / B`` where the loop condition turns false.  Between two
consecutive events neither the loop condition nor membership of ``S``
changes, so the jump is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

Values = Union[Mapping[int, Fraction], Sequence[Fraction]]


class EmptyPruneError(ValueError):
    """No item passes the initial ratio (only possible with bids above B)."""


@dataclass(frozen=True)
class PruneResult:
    r: Fraction
    kept: tuple[int, ...]
    star: int
    rest: tuple[int, ...]
    v_kept: Fraction
    v_rest: Fraction
    c_kept_lower: Fraction
    discarded: tuple[int, ...] = ()
    values: Mapping[int, Fraction] = field(default_factory=dict, repr=False, compare=False)

    @property
    def v_star(self) -> Fraction:
        return self.v_kept - self.v_rest


def _as_map(xs: Values) -> dict[int, Fraction]:
    if isinstance(xs, Mapping):
        return {i: Fraction(x) for i, x in xs.items()}
    return {i: Fraction(x) for i, x in enumerate(xs)}


def prune(values: Values, bids: Values, budget: Fraction) -> PruneResult:
    v = _as_map(values)
    b = _as_map(bids)
    B = Fraction(budget)
    if not v:
        raise ValueError("prune needs at least one item")
    if set(v) != set(b):
        raise ValueError("values and bids cover different items")
    if B <= 0:
        raise ValueError("budget must be positive")
    if any(x <= 0 for x in v.values()):
        raise ValueError("values must be positive")
    if any(x < 0 for x in b.values()):
        raise ValueError("bids must be nonnegative")

    r = max(v.values()) / B
    kept = [i for i in sorted(v) if v[i] >= r * b[i]]
    if not kept:
        raise EmptyPruneError("no item has value-per-bid ratio at least max(v)/B")
    v_kept = sum((v[i] for i in kept), Fraction(0))
    discarded = []

    while True:
        gap = v_kept - max(v[i] for i in kept)
        if r * B >= gap:
            break
        # one discard at a time, lowest id first, re-checking the stop condition
        k = next((i for i in kept if v[i] <= r * b[i]), None)
        if k is not None:
            kept.remove(k)
            v_kept -= v[k]
            discarded.append(k)
            continue
        r_next = gap / B
        for i in kept:
            if b[i] > 0 and v[i] < r_next * b[i]:
                r_next = v[i] / b[i]
        r = r_next

    top = max(v[i] for i in kept)
    star = next(i for i in kept if v[i] == top)
    rest = tuple(i for i in kept if i != star)
    return PruneResult(
        r=r,
        kept=tuple(kept),
        star=star,
        rest=rest,
        v_kept=v_kept,
        v_rest=v_kept - top,
        c_kept_lower=sum((b[i] for i in kept), Fraction(0)),
        discarded=tuple(discarded),
        values={i: v[i] for i in kept},
    )


def cap_payment(raw: Fraction, value: Fraction, r: Fraction) -> Fraction:
    if r <= 0:
        raise ValueError("ratio must be positive")
    return min(Fraction(raw), Fraction(value) / r)


def fopt_bound(p: PruneResult, budget: Fraction, bids: Mapping[int, Fraction]) -> Fraction:
    """Upper bound ``v(S) + r (B - b(S))`` on the fractional optimum."""
    return p.v_kept + p.r * (Fraction(budget) - sum((Fraction(bids[i]) for i in p.kept), Fraction(0)))
