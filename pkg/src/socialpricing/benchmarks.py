"""Honest-buyer benchmarks: no learning and undisclosed learning, two or N buyers."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from socialpricing.model import MarketParams, Plan, PricingPolicy


class Mechanism(Enum):
    NO_LEARNING = "NoLearning"
    UNDISCLOSED = "UndisclosedLearning"
    UNDISCLOSED_WITH_KNOWN = "UndisclosedWithKnown"


HONEST_RULE = "honest: same-preference pairs interact at 1, different-preference pairs at 0"


@dataclass(frozen=True)
class BenchmarkOutcome:
    """Subgame-perfect outcome of a benchmark mechanism.

    Attributes:
        mechanism: Which benchmark produced the outcome.
        n_buyers: Number of unknown buyers served.
        stage1_rule: Description of the (honest) interaction behaviour.
        pricing: Signal-keyed plan for the two-buyer game; for N buyers the
            same plans read as "probe at v_H, then price every inferred buyer
            at their value". None when every period is personalized.
        uniform_price: The single price charged to everybody, if any.
        personalized_from: First period priced at the buyer's inferred value.
        expected_revenue: Expected total revenue over all buyers.
        gain_over_no_learning: (revenue - no-learning revenue) / no-learning revenue.
    """

    mechanism: Mechanism
    n_buyers: int
    stage1_rule: str
    pricing: PricingPolicy | None
    uniform_price: float | None
    personalized_from: int | None
    expected_revenue: float
    gain_over_no_learning: float


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"need at least two buyers, got {n}")


def no_learning_price(params: MarketParams) -> float:
    """Uniform price without learning; ties 2 v_L = v_H go to v_H."""
    return params.v_H if 2 * params.v_L <= params.v_H else params.v_L


def no_learning_revenue(params: MarketParams, n_buyers: int = 2) -> float:
    if 2 * params.v_L <= params.v_H:
        return n_buyers * params.v_H / 2
    return n_buyers * params.v_L


def undisclosed_revenue(params: MarketParams, n_buyers: int = 2) -> float:
    _check_n(n_buyers)
    n = n_buyers
    if params.ratio >= n / (n + 1):
        return n * params.v_L
    return n * params.v_H / 2 + (n - 1) * params.v_L / 2


def known_buyer_revenue(params: MarketParams, n_unknown: int = 2) -> float:
    return n_unknown * (params.v_L + params.v_H) / 2


def no_learning_spe(params: MarketParams, n_buyers: int = 2) -> BenchmarkOutcome:
    price = no_learning_price(params)
    plan = Plan.UNIFORM_HIGH if price == params.v_H else Plan.UNIFORM_LOW
    return BenchmarkOutcome(
        mechanism=Mechanism.NO_LEARNING,
        n_buyers=n_buyers,
        stage1_rule=HONEST_RULE,
        pricing=PricingPolicy.pure(plan, plan),
        uniform_price=price,
        personalized_from=None,
        expected_revenue=no_learning_revenue(params, n_buyers),
        gain_over_no_learning=0.0,
    )


def undisclosed_learning_spe(params: MarketParams, n_buyers: int = 2) -> BenchmarkOutcome:
    """Honest buyers, seller learns from true interactions.

    Uniform v_L when v_L/v_H >= N/(N+1) (ties go to the uniform branch);
    otherwise v_H in the first period and personalized prices afterwards.
    """
    _check_n(n_buyers)
    n = n_buyers
    if params.ratio >= n / (n + 1):
        pricing = PricingPolicy.pure(Plan.UNIFORM_LOW, Plan.UNIFORM_LOW)
        uniform, personalized = params.v_L, None
    else:
        pricing = PricingPolicy.pure(Plan.HIGH_THEN_MATCH, Plan.HIGH_THEN_FLIP)
        uniform, personalized = None, 2
    return BenchmarkOutcome(
        mechanism=Mechanism.UNDISCLOSED,
        n_buyers=n,
        stage1_rule=HONEST_RULE,
        pricing=pricing,
        uniform_price=uniform,
        personalized_from=personalized,
        expected_revenue=undisclosed_revenue(params, n),
        gain_over_no_learning=revenue_gain_undisclosed(params, n),
    )


def revenue_gain_undisclosed(params: MarketParams, n_buyers: int = 2) -> float:
    base = no_learning_revenue(params, n_buyers)
    return (undisclosed_revenue(params, n_buyers) - base) / base


def known_buyer_undisclosed(params: MarketParams, n_unknown: int = 2, n_known: int = 1) -> BenchmarkOutcome:
    """A known buyer attached to the unknown component reveals every preference."""
    _check_n(n_unknown)
    if n_known < 1:
        raise ValueError("known-buyer benchmark needs at least one known buyer")
    revenue = known_buyer_revenue(params, n_unknown)
    base = no_learning_revenue(params, n_unknown)
    return BenchmarkOutcome(
        mechanism=Mechanism.UNDISCLOSED_WITH_KNOWN,
        n_buyers=n_unknown,
        stage1_rule=HONEST_RULE,
        pricing=None,
        uniform_price=None,
        personalized_from=1,
        expected_revenue=revenue,
        gain_over_no_learning=(revenue - base) / base,
    )


def known_buyer_gain(params: MarketParams, n_unknown: int = 2) -> float:
    """Relative revenue gain of adding a known buyer to the undisclosed benchmark."""
    base = undisclosed_revenue(params, n_unknown)
    return (known_buyer_revenue(params, n_unknown) - base) / base
