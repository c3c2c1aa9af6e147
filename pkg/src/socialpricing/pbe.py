"""Closed-form perfect Bayesian equilibrium of the strategic-learning game."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from socialpricing.model import MarketParams, Plan, PricingPolicy


class Region(Enum):
    """Equilibrium regions of the (v_H, v_L, l) parameter space.

    I: uniform v_L, no manipulation. II: honest, probe-then-personalize.
    III: pure pricing with interior manipulation. IV: seller mixes UniformLow
    after signal 1. V: seller mixes UniformHigh after signal 0. V_PRIME only
    exists under a skewed prior (alpha < 1/2): honest buyers, UniformLow after
    signal 1 and probe-then-flip after signal 0.
    """

    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    V_PRIME = "V'"


MIXING_REGIONS = (Region.IV, Region.V)


@dataclass(frozen=True)
class EquilibriumOutcome:
    """Equilibrium of the two-buyer strategic-learning game.

    Attributes:
        region: Parameter region the equilibrium belongs to.
        rho_star: Probability a high buyer withholds interaction from a high partner.
        beta_star: Seller's mixing weight: UniformLow after signal 1 (Region IV)
            or UniformHigh after signal 0 (Region V); None elsewhere.
        policy: Seller's pricing policy.
        belief_s: Probability two high buyers show signal 1, (1 - rho)^2.
        posterior_hh_given_1: Pr(both high | signal 1).
        posterior_hh_given_0: Pr(both high | signal 0).
        alpha: Prior probability of the high preference.
    """

    region: Region
    rho_star: float
    beta_star: float | None
    policy: PricingPolicy
    belief_s: float
    posterior_hh_given_1: float
    posterior_hh_given_0: float
    alpha: float = 0.5


def _validate(v_H: float, v_L: float, l: float, alpha: float) -> None:
    if not (math.isfinite(v_H) and math.isfinite(v_L) and 0 < v_L < v_H):
        raise ValueError(f"need 0 < v_L < v_H, got v_L={v_L}, v_H={v_H}")
    if not 0 < l < 1:
        raise ValueError(f"need 0 < l < 1, got l={l}")
    if not 0 < alpha <= 0.5:
        raise ValueError(f"need 0 < alpha <= 1/2, got alpha={alpha}")


def region_boundaries(v_H: float, v_L: float, l: float, alpha: float = 0.5) -> dict[str, float]:
    """Signed distances to each region boundary (positive on the 'greater' side).

    OD: v_L/v_H - 2/3. OCD: v_L/v_H - 2a^2/(3a^2 - 2a + 1).
    BC: (v_H - v_L) - 2(1-l). CP: (v_H - v_L) v_L - 8a^2(1-l)^2/(1-a)^2.
    BP: (v_H - v_L)(v_H - v_L/a) - 4(1-l)^2. SPLIT: v_L/v_H - 2a^2/(1+a^2).
    """
    _validate(v_H, v_L, l, alpha)
    a2 = alpha * alpha
    k = 1.0 - l
    d = v_H - v_L
    ratio = v_L / v_H
    return {
        "OD": ratio - 2 / 3,
        "OCD": ratio - 2 * a2 / (3 * a2 - 2 * alpha + 1),
        "BC": d - 2 * k,
        "CP": d * v_L - 8 * a2 * k * k / (1 - alpha) ** 2,
        "BP": d * (v_H - v_L / alpha) - 4 * k * k,
        "SPLIT": ratio - 2 * a2 / (1 + a2),
    }


def _classify(v_H: float, v_L: float, l: float, alpha: float) -> Region:
    b = region_boundaries(v_H, v_L, l, alpha)
    if b["OD"] >= 0:
        return Region.I
    if alpha < 0.5 and b["OCD"] > 0:
        return Region.V_PRIME
    if b["BC"] <= 0:
        return Region.II
    if b["CP"] < 0 and b["BP"] < 0:
        return Region.III
    if b["SPLIT"] >= 0 and b["CP"] >= 0:
        return Region.IV
    if b["SPLIT"] < 0 and b["BP"] >= 0:
        return Region.V
    raise AssertionError(f"unclassified point v_H={v_H}, v_L={v_L}, l={l}, alpha={alpha}")


def classify_region(v_H: float, v_L: float, l: float) -> Region:
    """Region of the uniform-prior equilibrium map; ties resolve I > II > III > IV > V."""
    return _classify(v_H, v_L, l, 0.5)


def _rho(region: Region, p: MarketParams) -> float:
    d = p.v_H - p.v_L
    k = 1.0 - p.l
    a = p.alpha
    if region in (Region.I, Region.II, Region.V_PRIME):
        return 0.0
    if region is Region.III:
        return 1.0 - 2 * k / d
    if region is Region.IV:
        return 1.0 - math.sqrt((1 - a) ** 2 * p.v_L / (2 * a * a * d))
    return 1.0 - math.sqrt((p.v_H - p.v_L / a) / d)


def _mixing(region: Region, p: MarketParams) -> float | None:
    d = p.v_H - p.v_L
    k = 1.0 - p.l
    a = p.alpha
    if region is Region.IV:
        return 0.5 - math.sqrt(2) * k * (a / (1 - a)) / math.sqrt(d * p.v_L)
    if region is Region.V:
        return 1.0 - 2 * k / math.sqrt(d * (p.v_H - p.v_L / a))
    return None


def _check_region(region: Region, params: MarketParams) -> None:
    actual = _classify(params.v_H, params.v_L, params.l, params.alpha)
    if actual is not region:
        raise ValueError(f"params lie in region {actual.value}, not {region.value}")


def manipulation_probability(region: Region, params: MarketParams) -> float:
    """Equilibrium manipulation probability of a high buyer toward a high partner."""
    _check_region(region, params)
    return _rho(region, params)


def seller_mixing(region: Region, params: MarketParams) -> float | None:
    """Seller's mixing weight in Regions IV/V, None in the pure-pricing regions.

    Region IV: weight on UniformLow after signal 1.
    Region V: weight on UniformHigh after signal 0.
    """
    _check_region(region, params)
    return _mixing(region, params)


def personalization_weight(outcome: EquilibriumOutcome) -> float:
    """Probability the seller runs probe-then-personalize after the mixed signal."""
    if outcome.region is Region.IV:
        return outcome.policy.weight(1, Plan.HIGH_THEN_MATCH)
    if outcome.region is Region.V:
        return outcome.policy.weight(0, Plan.HIGH_THEN_FLIP)
    raise ValueError(f"no mixing in region {outcome.region.value}")


def posterior_beliefs(rho: float, alpha: float = 0.5) -> tuple[float, float]:
    """Return (Pr(both high | signal 1), Pr(both high | signal 0))."""
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return _posteriors_from_s((1.0 - rho) ** 2, alpha)


def _posteriors_from_s(s: float, alpha: float) -> tuple[float, float]:
    if alpha == 0.5:
        return s / (s + 1), (1 - s) / (3 - s)
    hh, ll, mixed = alpha * alpha, (1 - alpha) ** 2, 2 * alpha * (1 - alpha)
    return hh * s / (hh * s + ll), hh * (1 - s) / (hh * (1 - s) + mixed)


def plan_revenues(signal: int, s: float, params: MarketParams) -> dict[Plan, float]:
    """Seller's expected two-period revenue of each plan after a signal."""
    lo, hi = params.v_L, params.v_H
    q1, q0 = _posteriors_from_s(s, params.alpha)
    if signal == 1:
        q = q1
        return {
            Plan.UNIFORM_LOW: 2 * lo,
            Plan.UNIFORM_HIGH: 2 * q * hi,
            Plan.HIGH_THEN_MATCH: 2 * q * hi + (1 - q) * lo,
            Plan.HIGH_THEN_FLIP: q * (hi + lo),
        }
    q = q0
    return {
        Plan.UNIFORM_LOW: 2 * lo,
        Plan.UNIFORM_HIGH: (1 + q) * hi,
        Plan.HIGH_THEN_MATCH: 2 * q * hi + (1 - q) * (hi + lo) / 2,
        Plan.HIGH_THEN_FLIP: hi + lo * (1 + q) / 2,
    }


def optimal_pricing_given_s(s: float, params: MarketParams) -> PricingPolicy:
    """Seller's best pure plan after each signal when high pairs show signal 1 w.p. s.

    Ties favour UniformLow, then the probe-then-personalize plan.
    """
    if not 0 <= s <= 1:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    r1 = plan_revenues(1, s, params)
    on_1 = Plan.UNIFORM_LOW if r1[Plan.UNIFORM_LOW] >= r1[Plan.HIGH_THEN_MATCH] else Plan.HIGH_THEN_MATCH
    r0 = plan_revenues(0, s, params)
    if r0[Plan.UNIFORM_LOW] >= max(r0[Plan.HIGH_THEN_FLIP], r0[Plan.UNIFORM_HIGH]):
        on_0 = Plan.UNIFORM_LOW
    elif r0[Plan.HIGH_THEN_FLIP] >= r0[Plan.UNIFORM_HIGH]:
        on_0 = Plan.HIGH_THEN_FLIP
    else:
        on_0 = Plan.UNIFORM_HIGH
    return PricingPolicy.pure(on_1, on_0)


def _policy(region: Region, beta: float | None) -> PricingPolicy:
    match, flip = Plan.HIGH_THEN_MATCH, Plan.HIGH_THEN_FLIP
    if region is Region.I:
        return PricingPolicy.pure(Plan.UNIFORM_LOW, Plan.UNIFORM_LOW)
    if region in (Region.II, Region.III):
        return PricingPolicy.pure(match, flip)
    if region is Region.V_PRIME:
        return PricingPolicy.pure(Plan.UNIFORM_LOW, flip)
    if region is Region.IV:
        return PricingPolicy(((Plan.UNIFORM_LOW, beta), (match, 1 - beta)), ((flip, 1.0),))
    return PricingPolicy(((match, 1.0),), ((Plan.UNIFORM_HIGH, beta), (flip, 1 - beta)))


def _solve(params: MarketParams) -> EquilibriumOutcome:
    region = _classify(params.v_H, params.v_L, params.l, params.alpha)
    rho = _rho(region, params)
    beta = _mixing(region, params)
    q1, q0 = posterior_beliefs(rho, params.alpha)
    return EquilibriumOutcome(
        region=region,
        rho_star=rho,
        beta_star=beta,
        policy=_policy(region, beta),
        belief_s=(1.0 - rho) ** 2,
        posterior_hh_given_1=q1,
        posterior_hh_given_0=q0,
        alpha=params.alpha,
    )


def solve_pbe(params: MarketParams) -> EquilibriumOutcome:
    """Equilibrium under the uniform prior (alpha = 1/2)."""
    if params.alpha != 0.5:
        raise ValueError("solve_pbe needs alpha = 1/2; use solve_pbe_nonuniform")
    return _solve(params)


def solve_pbe_nonuniform(params: MarketParams) -> EquilibriumOutcome:
    """Equilibrium for any prior alpha in (0, 1/2].

    Regions III-V keep the uniform-prior structure; rho and the mixing weight
    come from the prior-weighted seller and buyer indifference conditions.
    For alpha < 1/2 a band OCD < v_L/v_H < 2/3 (Region V') has honest buyers
    and UniformLow after signal 1.
    """
    return _solve(params)


def high_buyer_payoff_matrix(outcome: EquilibriumOutcome, params: MarketParams) -> tuple[tuple[float, float], tuple[float, float]]:
    """Expected final payoff of a high buyer facing a high partner.

    Rows are the buyer's own frequency (1, 0); columns are the partner's (1, 0).
    """
    d = params.v_H - params.v_L
    l = params.l
    region = outcome.region
    if region is Region.I:
        return ((1 + d, 1 - l + d), (l + d, d))
    if region is Region.V_PRIME:
        return ((1 + d, 1 - l + d / 2), (l + d / 2, d / 2))
    if region in (Region.II, Region.III):
        return ((1.0, 1 - l + d / 2), (l + d / 2, d / 2))
    if region is Region.IV:
        beta = outcome.beta_star
        return ((1 + beta * d, 1 - l + d / 2), (l + d / 2, d / 2))
    half = (1 - outcome.beta_star) * d / 2
    return ((1.0, 1 - l + half), (l + half, half))


def buyer_gap(outcome: EquilibriumOutcome, params: MarketParams) -> float:
    """Expected payoff of manipulating minus that of staying honest."""
    m = high_buyer_payoff_matrix(outcome, params)
    rho = outcome.rho_star
    honest = (1 - rho) * m[0][0] + rho * m[0][1]
    manipulate = (1 - rho) * m[1][0] + rho * m[1][1]
    return manipulate - honest


def seller_gap(outcome: EquilibriumOutcome, params: MarketParams) -> float | None:
    """Revenue difference between the two plans the seller mixes over, if any."""
    if outcome.region is Region.IV:
        r = plan_revenues(1, outcome.belief_s, params)
        return r[Plan.UNIFORM_LOW] - r[Plan.HIGH_THEN_MATCH]
    if outcome.region is Region.V:
        r = plan_revenues(0, outcome.belief_s, params)
        return r[Plan.UNIFORM_HIGH] - r[Plan.HIGH_THEN_FLIP]
    return None
