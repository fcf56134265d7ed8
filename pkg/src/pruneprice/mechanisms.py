"""Second-stage posted-price mechanisms and the composition wrapper.

Each second stage receives the pruning output and posts take-it-or-leave-it
prices to the kept items.  An item accepts an offer equal to its bid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import rng
from .model import Instance, Outcome, validate_bids
from .pruning import EmptyPruneError, PruneResult, cap_payment, prune

__all__ = [
    "MechanismKind",
    "PriceDistribution",
    "DegenerateSupportError",
    "run_first_warmup",
    "run_second_warmup",
    "run_deterministic",
    "randomized_distribution",
    "randomized_draw",
    "run_randomized",
    "second_stage",
    "run",
]


class MechanismKind(str, enum.Enum):
    FIRST_WARMUP = "first-warmup"
    SECOND_WARMUP = "second-warmup"
    DETERMINISTIC = "deterministic"
    RANDOMIZED = "randomized"

    @classmethod
    def parse(cls, name: "str | MechanismKind") -> "MechanismKind":
        try:
            return cls(name)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown mechanism {name!r} (choose from {choices})") from None


class DegenerateSupportError(ValueError):
    """The randomized price distribution needs a nonempty rest set."""


@dataclass(frozen=True)
class PriceDistribution:
    """Mixture over the price offered to the top item.

    With probability ``q_star`` the price is ``hi``, with ``q_rest`` it is
    ``lo``, and with ``q`` it is uniform on ``[lo, hi]``.
    """

    q: Fraction
    q_star: Fraction
    q_rest: Fraction
    lo: Fraction
    hi: Fraction


def _posted(p: PruneResult, bids: Mapping[int, Fraction],
            offers: dict[int, Fraction]) -> Outcome:
    winners = tuple(sorted(i for i, price in offers.items() if bids[i] <= price))
    return Outcome(
        winners=winners,
        payments={i: offers[i] for i in winners},
        value=sum((p.values[i] for i in winners), Fraction(0)),
        offers=dict(offers),
    )


def _full_prices(p: PruneResult, ids) -> dict[int, Fraction]:
    return {i: p.values[i] / p.r for i in ids}


def run_first_warmup(p: PruneResult, bids: Mapping[int, Fraction],
                     budget: Fraction) -> Outcome:
    if p.v_star >= p.v_rest:
        return _posted(p, bids, _full_prices(p, [p.star]))
    return _posted(p, bids, _full_prices(p, p.rest))


def run_second_warmup(p: PruneResult, bids: Mapping[int, Fraction],
                      budget: Fraction) -> Outcome:
    # v* >= sqrt(2) v(T), squared since both sides are nonnegative
    if p.v_star ** 2 >= 2 * p.v_rest ** 2:
        return _posted(p, bids, _full_prices(p, [p.star]))
    offers = _full_prices(p, p.rest)
    offers[p.star] = Fraction(budget) - p.v_rest / p.r
    return _posted(p, bids, offers)


def run_deterministic(p: PruneResult, bids: Mapping[int, Fraction],
                      budget: Fraction) -> Outcome:
    B = Fraction(budget)
    vs, vt = p.v_star, p.v_rest
    if 2 * vs <= vt:
        return _posted(p, bids, _full_prices(p, p.rest))
    if vs >= 2 * vt:
        return _posted(p, bids, _full_prices(p, [p.star]))
    # v(T)/2 < v* < 2 v(T): adaptive two-round offers, top item decides first
    top_price = min(vs / p.r, (2 * vs - vt) * B / p.v_kept)
    if bids[p.star] <= top_price:
        offers = {i: min(p.values[i] / p.r, p.values[i] / vt * (B - top_price))
                  for i in p.rest}
    else:
        offers = _full_prices(p, p.rest)
    offers[p.star] = top_price
    return _posted(p, bids, offers)


def randomized_distribution(p: PruneResult, budget: Fraction) -> PriceDistribution:
    if not p.rest:
        raise DegenerateSupportError("rest set is empty; price mixture undefined")
    B = Fraction(budget)
    vs, vt = p.v_star, p.v_rest
    q = (p.v_kept - p.r * B) / (2 * min(vs, vt))
    half = Fraction(1, 2)
    if vs <= vt:
        q_star, q_rest = half - q, half
    else:
        q_star, q_rest = half, half - q
    return PriceDistribution(q=q, q_star=q_star, q_rest=q_rest,
                             lo=B - vt / p.r, hi=vs / p.r)


def randomized_draw(dist: PriceDistribution, seed: int) -> tuple[str, Fraction]:
    """Branch label (``"a"``, ``"b"``, ``"c"``) and the top item's price.

    Stream word 0 picks the branch, word 1 the uniform position; both are
    read as exact fractions ``w / 2**64``.
    """
    seed &= rng.MASK64
    u = rng.unit_fraction(rng.word(seed, 0))
    if u < dist.q_star:
        return "a", dist.hi
    if u < dist.q_star + dist.q_rest:
        return "b", dist.lo
    t = rng.unit_fraction(rng.word(seed, 1))
    return "c", dist.lo + t * (dist.hi - dist.lo)


def run_randomized(p: PruneResult, bids: Mapping[int, Fraction],
                   budget: Fraction, seed: int = 0) -> Outcome:
    B = Fraction(budget)
    if not p.rest:
        return _posted(p, bids, _full_prices(p, [p.star]))
    _, top_price = randomized_draw(randomized_distribution(p, B), seed)
    offers = {i: p.values[i] / p.v_rest * (B - top_price) for i in p.rest}
    offers[p.star] = top_price
    return _posted(p, bids, offers)


_STAGES = {
    MechanismKind.FIRST_WARMUP: run_first_warmup,
    MechanismKind.SECOND_WARMUP: run_second_warmup,
    MechanismKind.DETERMINISTIC: run_deterministic,
}


def second_stage(kind: MechanismKind, p: PruneResult, bids: Mapping[int, Fraction],
                 budget: Fraction, seed: int = 0) -> Outcome:
    kind = MechanismKind.parse(kind)
    if kind is MechanismKind.RANDOMIZED:
        return run_randomized(p, bids, budget, seed)
    return _STAGES[kind](p, bids, budget)


def compose(p: PruneResult, stage: Outcome) -> Outcome:
    """Cap each winner's payment at ``v_i / r``."""
    payments = {i: cap_payment(x, p.values[i], p.r) for i, x in stage.payments.items()}
    return Outcome(stage.winners, payments, stage.value, stage.offers)


def run(kind: MechanismKind | str, instance: Instance,
        bids: Mapping[int, Fraction] | None = None, seed: int = 0) -> Outcome:
    """Prune, run the chosen second stage on the kept items, cap payments.

    ``bids`` defaults to the true costs.  Items outside the kept set never
    win.
    """
    kind = MechanismKind.parse(kind)
    bids = instance.costs if bids is None else validate_bids(instance, bids)
    try:
        p = prune(instance.values, bids, instance.budget)
    except EmptyPruneError:
        return Outcome((), {}, Fraction(0), {})
    return compose(p, second_stage(kind, p, bids, instance.budget, seed))
