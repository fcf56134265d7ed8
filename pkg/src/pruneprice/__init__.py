"""Budget-feasible procurement mechanisms for an additive buyer.

Pruning by value-per-cost ratio followed by posted-price second stages
(two warm-ups, a deterministic 3-approximation and a randomized
2-approximation), exact Knapsack benchmarks, and audits.  All allocation and
payment arithmetic is exact (:class:`fractions.Fraction`).
"""

from .audit import (
    AllocationProbabilities,
    AuditReport,
    InfiniteRatio,
    acceptance_probabilities,
    audit_truthfulness,
    check_budget_feasibility,
    check_individual_rationality,
    meets_bound,
    monte_carlo,
    ratio,
)
from .knapsack import FractionalSolution, IntegralSolution, fractional_opt, integral_opt
from .mechanisms import MechanismKind, PriceDistribution, randomized_distribution, run
from .model import (
    Instance,
    InstanceError,
    Item,
    Outcome,
    gen_lower_bound,
    gen_random,
    normalize,
    parse_instance,
    serialize_instance,
)
from .pruning import PruneResult, cap_payment, fopt_bound, prune

__version__ = "0.1.0"

__all__ = [
    "AllocationProbabilities",
    "AuditReport",
    "FractionalSolution",
    "InfiniteRatio",
    "Instance",
    "InstanceError",
    "IntegralSolution",
    "Item",
    "MechanismKind",
    "Outcome",
    "PriceDistribution",
    "PruneResult",
    "acceptance_probabilities",
    "audit_truthfulness",
    "cap_payment",
    "check_budget_feasibility",
    "check_individual_rationality",
    "fopt_bound",
    "fractional_opt",
    "gen_lower_bound",
    "gen_random",
    "integral_opt",
    "meets_bound",
    "monte_carlo",
    "normalize",
    "parse_instance",
    "prune",
    "randomized_distribution",
    "ratio",
    "run",
    "serialize_instance",
]
