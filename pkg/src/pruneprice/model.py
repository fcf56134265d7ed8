"""Procurement-market domain types and instance generators.

All monetary and value quantities are :class:`fractions.Fraction`; nothing in
allocation or payment logic ever touches a float.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from . import rng

Scalar = Fraction
BidProfile = Mapping[int, Fraction]
RationalLike = Union[Fraction, int, str]

__all__ = [
    "Scalar",
    "BidProfile",
    "Item",
    "Instance",
    "Outcome",
    "InstanceError",
    "EmptyMarketError",
    "to_scalar",
    "parse_instance",
    "parse_bundle",
    "serialize_instance",
    "normalize",
    "truthful_bids",
    "validate_bids",
    "gen_random",
    "gen_lower_bound",
    "random_suite",
]


class InstanceError(ValueError):
    """Malformed or invalid market description."""


class EmptyMarketError(InstanceError):
    """No item can be afforded within the budget."""


def to_scalar(x: RationalLike) -> Fraction:
    """Exact conversion of ``"p/q"``, decimal strings, ints and Fractions.

    Floats are rejected: they would smuggle binary rounding into the
    exact arithmetic.
    """
    if isinstance(x, bool) or isinstance(x, float):
        raise InstanceError(f"refusing inexact scalar {x!r}; use a string")
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"not a rational number: {x!r}") from exc
    raise InstanceError(f"unsupported scalar type {type(x).__name__}")


@dataclass(frozen=True)
class Item:
    id: int
    value: Fraction
    cost: Fraction

    def __post_init__(self):
        if self.value <= 0:
            raise InstanceError(f"item {self.id}: nonpositive value {self.value}")
        if self.cost < 0:
            raise InstanceError(f"item {self.id}: negative cost {self.cost}")


@dataclass(frozen=True)
class Instance:
    """Budget plus items; item ids are stable under :func:`normalize`."""

    budget: Fraction
    items: tuple[Item, ...]

    def __post_init__(self):
        if self.budget <= 0:
            raise InstanceError(f"budget must be positive, got {self.budget}")
        if not self.items:
            raise InstanceError("instance has no items")
        ids = [it.id for it in self.items]
        if any(a >= b for a, b in zip(ids, ids[1:])):
            raise InstanceError("item ids must be strictly increasing")

    @classmethod
    def build(cls, budget: RationalLike, values: Sequence[RationalLike],
              costs: Sequence[RationalLike]) -> "Instance":
        if len(values) != len(costs):
            raise InstanceError("values and costs differ in length")
        items = tuple(Item(i, to_scalar(v), to_scalar(c))
                      for i, (v, c) in enumerate(zip(values, costs)))
        return cls(to_scalar(budget), items)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(it.id for it in self.items)

    @property
    def values(self) -> dict[int, Fraction]:
        return {it.id: it.value for it in self.items}

    @property
    def costs(self) -> dict[int, Fraction]:
        return {it.id: it.cost for it in self.items}

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class Outcome:
    """Result of one mechanism run.

    ``offers`` records every posted price actually made, keyed by item id;
    ``payments`` only covers winners.
    """

    winners: tuple[int, ...]
    payments: dict[int, Fraction]
    value: Fraction
    offers: dict[int, Fraction] = field(default_factory=dict)

    @property
    def total_payment(self) -> Fraction:
        return sum(self.payments.values(), Fraction(0))


def truthful_bids(instance: Instance) -> dict[int, Fraction]:
    return instance.costs


def validate_bids(instance: Instance, bids: BidProfile) -> dict[int, Fraction]:
    out = {}
    for i in instance.ids:
        if i not in bids:
            raise InstanceError(f"missing bid for item {i}")
        b = to_scalar(bids[i])
        if b < 0:
            raise InstanceError(f"item {i}: negative bid {b}")
        out[i] = b
    extra = set(bids) - set(out)
    if extra:
        raise InstanceError(f"bids for unknown items {sorted(extra)}")
    return out


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    if "budget" not in doc:
        raise InstanceError("missing budget")
    if not isinstance(doc.get("items"), list):
        raise InstanceError("missing items array")
    return doc


def _instance_from_doc(doc: dict) -> Instance:
    items = []
    for i, raw in enumerate(doc["items"]):
        if not isinstance(raw, dict) or "value" not in raw or "cost" not in raw:
            raise InstanceError(f"item {i} needs value and cost")
        item_id = raw.get("id", i)
        if not isinstance(item_id, int) or isinstance(item_id, bool) or item_id < 0:
            raise InstanceError(f"item {i}: id must be a nonnegative integer")
        items.append(Item(item_id, to_scalar(raw["value"]), to_scalar(raw["cost"])))
    return Instance(to_scalar(doc["budget"]), tuple(items))


def parse_instance(text: str) -> Instance:
    """Parse the JSON instance format.

    Items keep file order; ids default to positions unless an item carries
    an explicit ``"id"``.
    """
    return _instance_from_doc(_load(text))


def parse_bundle(text: str) -> tuple[Instance, dict[int, Fraction] | None]:
    """Parse an instance together with its optional ``"bids"`` array."""
    doc = _load(text)
    inst = _instance_from_doc(doc)
    if doc.get("bids") is None:
        return inst, None
    raw = doc["bids"]
    if not isinstance(raw, list) or len(raw) != len(inst.items):
        raise InstanceError("bids must be an array with one entry per item")
    return inst, validate_bids(inst, {i: to_scalar(b) for i, b in zip(inst.ids, raw)})


def serialize_instance(instance: Instance, bids: BidProfile | None = None) -> str:
    """Canonical JSON; rationals as ``"p/q"`` strings.

    Item ids are written only when they differ from ``0..n-1`` (e.g. after
    :func:`normalize` dropped items).
    """
    dense = instance.ids == tuple(range(len(instance)))
    items = []
    for it in instance.items:
        entry = {} if dense else {"id": it.id}
        entry.update(value=str(it.value), cost=str(it.cost))
        items.append(entry)
    doc: dict = {"budget": str(instance.budget), "items": items}
    if bids is not None:
        doc["bids"] = [str(Fraction(bids[i])) for i in instance.ids]
    return json.dumps(doc, indent=2) + "\n"


def normalize(instance: Instance) -> Instance:
    """Drop items whose cost exceeds the budget; they can never win."""
    kept = tuple(it for it in instance.items if it.cost <= instance.budget)
    if not kept:
        raise EmptyMarketError("every item costs more than the budget")
    if len(kept) == len(instance.items):
        return instance
    return Instance(instance.budget, kept)


def _grid_draw(seed: int, index: int, lo: Fraction, hi: Fraction,
               denominator: int, positive: bool) -> Fraction:
    # uniform over lo + (hi - lo) * k / denominator
    if hi == lo:
        return lo
    start = 1 if (positive and lo == 0) else 0
    k = start + rng.below(seed, index, denominator + 1 - start)
    return lo + (hi - lo) * Fraction(k, denominator)


def gen_random(n: int, seed: int,
               value_range: tuple[RationalLike, RationalLike] = (Fraction(1, 1000), 1),
               cost_range: tuple[RationalLike, RationalLike] = (0, 1),
               budget: RationalLike = 1,
               denominator: int = 1000) -> Instance:
    """Seeded random instance on a bounded-denominator grid.

    Costs above the budget are clamped to the budget.
    """
    if n < 1:
        raise InstanceError("n must be at least 1")
    if denominator < 1:
        raise InstanceError("denominator must be at least 1")
    vlo, vhi = (to_scalar(x) for x in value_range)
    clo, chi = (to_scalar(x) for x in cost_range)
    B = to_scalar(budget)
    if vlo < 0 or vhi < vlo or vhi <= 0:
        raise InstanceError(f"invalid value range [{vlo}, {vhi}]")
    if clo < 0 or chi < clo:
        raise InstanceError(f"invalid cost range [{clo}, {chi}]")
    seed &= rng.MASK64
    items = []
    for i in range(n):
        v = _grid_draw(seed, 2 * i, vlo, vhi, denominator, positive=True)
        c = _grid_draw(seed, 2 * i + 1, clo, chi, denominator, positive=False)
        items.append(Item(i, v, min(c, B)))
    return Instance(B, tuple(items))


def gen_lower_bound(epsilon: RationalLike, budget: RationalLike = 1
                    ) -> tuple[Instance, dict[int, Fraction]]:
    """Three unit-value items with costs ``(0, c*, c*)``, ``c* = B / (2 - eps/2)``.

    No deterministic truthful mechanism beats ratio ``3 - eps/2`` against
    the fractional optimum here.  The returned bids are the true costs.
    """
    eps = to_scalar(epsilon)
    B = to_scalar(budget)
    if not 0 < eps < 2:
        raise InstanceError(f"epsilon must lie in (0, 2), got {eps}")
    c_star = B / (2 - eps / 2)
    inst = Instance.build(B, [1, 1, 1], [0, c_star, c_star])
    return inst, truthful_bids(inst)


def random_suite(count: int, seed: int, n_max: int = 12, n_min: int = 1,
                 denominator: int = 1000) -> list[Instance]:
    """``count`` normalized random instances with sizes in ``[n_min, n_max]``.

    Instance ``k`` depends only on ``(seed, k)``.  Budgets are drawn from
    ``{1, 2, 3, 4}``; costs span ``[0, budget]`` and values ``(0, 1]``.
    """
    if not 1 <= n_min <= n_max:
        raise InstanceError("need 1 <= n_min <= n_max")
    suite = []
    for k in range(count):
        s = rng.derive_seed(seed & rng.MASK64, k)
        n = n_min + rng.below(s, 1000, n_max - n_min + 1)
        budget = Fraction(1 + rng.below(s, 1001, 4))
        inst = gen_random(n, s, value_range=(0, 1), cost_range=(0, budget),
                          budget=budget, denominator=denominator)
        suite.append(normalize(inst))
    return suite
