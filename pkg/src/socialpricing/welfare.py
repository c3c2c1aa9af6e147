"""Closed-form revenues, buyer payoffs and cross-mechanism comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from socialpricing.benchmarks import no_learning_revenue, undisclosed_revenue
from socialpricing.model import MarketParams
from socialpricing.pbe import Region, classify_region

TOL = 1e-12


class PayoffMechanism(Enum):
    UNDISCLOSED = "UndisclosedLearning"
    STRATEGIC = "StrategicLearning"


@dataclass(frozen=True)
class WelfareReport:
    """Revenues and average buyer payoffs under the three mechanisms.

    Attributes:
        region: Strategic-learning equilibrium region.
        revenue_no_learning: Expected revenue with uniform pricing.
        revenue_undisclosed: Expected revenue when buyers are unaware.
        revenue_strategic: Expected revenue when buyers manipulate.
        payoff_undisclosed: Average buyer payoff when unaware.
        payoff_strategic: Average buyer payoff when aware.
        gain_strategic_vs_no: Relative revenue gain of strategic over no learning.
        loss_awareness: Relative revenue loss of strategic versus undisclosed learning.
        buyer_worse_off: Whether awareness lowers the average buyer payoff.
    """

    region: Region
    revenue_no_learning: float
    revenue_undisclosed: float
    revenue_strategic: float
    payoff_undisclosed: float
    payoff_strategic: float
    gain_strategic_vs_no: float
    loss_awareness: float
    buyer_worse_off: bool


def _check(params: MarketParams) -> Region:
    if params.alpha != 0.5:
        raise ValueError("welfare formulas assume alpha = 1/2")
    return classify_region(params.v_H, params.v_L, params.l)


def strategic_revenue(params: MarketParams) -> float:
    region = _check(params)
    hi, lo, k = params.v_H, params.v_L, 1 - params.l
    if region is Region.I:
        return 2 * lo
    if region is Region.II:
        return hi + lo / 2
    if region is Region.III:
        return 3 * hi / 4 + 3 * lo / 4 + k * k / (hi - lo)
    if region is Region.IV:
        return 3 * hi / 4 + 7 * lo / 8
    return hi + lo / 4


def undisclosed_payoff(params: MarketParams) -> float:
    if params.ratio <= 2 / 3:
        return 0.5
    return (params.diff + 1) / 2


def strategic_payoff(params: MarketParams) -> float:
    region = _check(params)
    hi, lo, l = params.v_H, params.v_L, params.l
    d = hi - lo
    if region is Region.I:
        return (d + 1) / 2
    if region is Region.II:
        return 0.5
    if region is Region.III:
        return l * (1 - l) / (2 * d) + d / 8 + 0.25
    if region is Region.IV:
        return l / 4 * math.sqrt(lo / (2 * d)) + d / 8 + 0.25
    t = hi - 2 * lo
    return (1 - l) / 4 * math.sqrt(d / t) + l / 4 * math.sqrt(t / d) + 0.25


def average_buyer_payoff(params: MarketParams, mechanism: PayoffMechanism) -> float:
    """Per-buyer expected payoff (purchase surplus plus social utility)."""
    _check(params)
    if mechanism is PayoffMechanism.UNDISCLOSED:
        return undisclosed_payoff(params)
    return strategic_payoff(params)


def buyer_worse_off(params: MarketParams) -> bool:
    """True iff awareness strictly lowers the average buyer payoff (tolerance 1e-12)."""
    return strategic_payoff(params) < undisclosed_payoff(params) - TOL


def gain_strategic_vs_no_learning(params: MarketParams) -> float:
    base = no_learning_revenue(params)
    return (strategic_revenue(params) - base) / base


def loss_from_awareness(params: MarketParams) -> float:
    """Relative revenue loss (undisclosed - strategic) / undisclosed, region-wise."""
    region = _check(params)
    hi, lo, k = params.v_H, params.v_L, 1 - params.l
    d = hi - lo
    if region in (Region.I, Region.II):
        return 0.0
    if region is Region.III:
        return (d * d - 4 * k * k) / (d * (4 * hi + 2 * lo))
    if region is Region.IV:
        return (2 * hi - 3 * lo) / (8 * hi + 4 * lo)
    return lo / (4 * hi + 2 * lo)


def known_low_buyer_gain(params: MarketParams) -> float:
    """Relative gain of knowing one buyer is low: (v_L + v_H - strategic) / strategic."""
    region = _check(params)
    hi, lo, k = params.v_H, params.v_L, 1 - params.l
    if region is Region.I:
        return (hi - lo) / (2 * lo)
    if region is Region.II:
        return lo / (2 * hi + lo)
    if region is Region.III:
        sq = hi * hi - lo * lo
        return (sq - 4 * k * k) / (3 * sq + 4 * k * k)
    if region is Region.IV:
        return (2 * hi + lo) / (6 * hi + 7 * lo)
    return 3 * lo / (4 * hi + lo)


def welfare_report(params: MarketParams) -> WelfareReport:
    region = _check(params)
    rev_st = strategic_revenue(params)
    rev_un = undisclosed_revenue(params)
    rev_no = no_learning_revenue(params)
    return WelfareReport(
        region=region,
        revenue_no_learning=rev_no,
        revenue_undisclosed=rev_un,
        revenue_strategic=rev_st,
        payoff_undisclosed=undisclosed_payoff(params),
        payoff_strategic=strategic_payoff(params),
        gain_strategic_vs_no=(rev_st - rev_no) / rev_no,
        loss_awareness=loss_from_awareness(params),
        buyer_worse_off=buyer_worse_off(params),
    )
