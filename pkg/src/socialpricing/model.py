"""Primitive types and payoff/signal arithmetic for the two-stage pricing game."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Preference(Enum):
    """Binary purchase preference of a buyer."""

    LOW = "L"
    HIGH = "H"

    def worth(self, params: MarketParams) -> float:
        return params.v_H if self is Preference.HIGH else params.v_L


@dataclass(frozen=True)
class MarketParams:
    """Exogenous parameters of the game.

    Attributes:
        v_L: Low willingness to pay.
        v_H: High willingness to pay.
        l: Social loss when a same-preference partner withholds interaction.
        alpha: Prior probability that a buyer has the high preference.
        c: Disutility of frequent interaction between different preferences.
        r: Relief from the partner's rare interaction (different preferences).
    """

    v_L: float
    v_H: float
    l: float = 0.5
    alpha: float = 0.5
    c: float = 1.0
    r: float = 0.5

    def __post_init__(self) -> None:
        for name in ("v_L", "v_H", "l", "alpha", "c", "r"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0 < self.v_L < self.v_H:
            raise ValueError(f"need 0 < v_L < v_H, got v_L={self.v_L}, v_H={self.v_H}")
        if not 0 < self.l < 1:
            raise ValueError(f"need 0 < l < 1, got l={self.l}")
        if not 0 < self.alpha <= 0.5:
            raise ValueError(f"need 0 < alpha <= 1/2, got alpha={self.alpha}")
        if not 0 < self.r < self.c:
            raise ValueError(f"need 0 < r < c, got c={self.c}, r={self.r}")

    @property
    def ratio(self) -> float:
        return self.v_L / self.v_H

    @property
    def diff(self) -> float:
        return self.v_H - self.v_L


@dataclass(frozen=True)
class InteractionPair:
    """Directed interaction frequencies of buyer i toward j and j toward i."""

    x_ij: float
    x_ji: float

    def __post_init__(self) -> None:
        for x in (self.x_ij, self.x_ji):
            if not 0 <= x <= 1:
                raise ValueError(f"interaction frequency {x} outside [0, 1]")

    @property
    def is_binary(self) -> bool:
        return self.x_ij in (0, 1) and self.x_ji in (0, 1)


@dataclass(frozen=True)
class PurchaseRecord:
    period: int
    price: float
    bought: bool


def social_utility(
    v_i: Preference, v_j: Preference, x: InteractionPair, params: MarketParams
) -> float:
    """Buyer i's social utility from the binary interaction tables."""
    if not x.is_binary:
        raise ValueError("binary model requires interaction frequencies in {0, 1}")
    a, b = int(x.x_ij), int(x.x_ji)
    if v_i is v_j:
        return (0.0, params.l, 1.0 - params.l, 1.0)[2 * a + b]
    return (0.0, -params.r, -params.c + params.r, -params.c)[2 * a + b]


def common_frequency(x: InteractionPair) -> float:
    """The seller's observed signal: the smaller of the two directed frequencies."""
    return min(x.x_ij, x.x_ji)


def purchase_decision(v: float, p: float) -> bool:
    """A buyer purchases whenever the price does not exceed their preference."""
    return v >= p


def buyer_final_payoff(v: float, p: float, u_social: float) -> float:
    return max(v - p, 0.0) + u_social


class Plan(Enum):
    """Deterministic two-period pricing plans over {v_L, v_H}.

    HIGH_THEN_MATCH charges v_H, then v_H after a purchase and v_L otherwise.
    HIGH_THEN_FLIP charges v_H, then v_L after a purchase and v_H otherwise.
    """

    UNIFORM_LOW = "UniformLow"
    UNIFORM_HIGH = "UniformHigh"
    HIGH_THEN_MATCH = "HighThenPersonalizedMatch"
    HIGH_THEN_FLIP = "HighThenPersonalizedFlip"

    def prices(self, params: MarketParams) -> tuple[float, float, float]:
        """Return (p1, p2 after a purchase, p2 after no purchase)."""
        lo, hi = params.v_L, params.v_H
        return {
            Plan.UNIFORM_LOW: (lo, lo, lo),
            Plan.UNIFORM_HIGH: (hi, hi, hi),
            Plan.HIGH_THEN_MATCH: (hi, hi, lo),
            Plan.HIGH_THEN_FLIP: (hi, lo, hi),
        }[self]


Mixture = tuple[tuple[Plan, float], ...]


def _check_mixture(mix: Mixture) -> Mixture:
    mix = tuple((Plan(p), float(w)) for p, w in mix if w > 0)
    if not mix:
        raise ValueError("empty plan mixture")
    if any(w < 0 or w > 1 for _, w in mix):
        raise ValueError("plan weights must lie in [0, 1]")
    if abs(sum(w for _, w in mix) - 1.0) > 1e-9:
        raise ValueError("plan weights must sum to 1")
    if len({p for p, _ in mix}) != len(mix):
        raise ValueError("duplicate plan in mixture")
    return mix


@dataclass(frozen=True)
class PricingPolicy:
    """Seller's (possibly randomized) plan choice after each observed signal."""

    on_signal_1: Mixture
    on_signal_0: Mixture

    def __post_init__(self) -> None:
        object.__setattr__(self, "on_signal_1", _check_mixture(self.on_signal_1))
        object.__setattr__(self, "on_signal_0", _check_mixture(self.on_signal_0))

    @classmethod
    def pure(cls, on_1: Plan, on_0: Plan) -> PricingPolicy:
        return cls(((on_1, 1.0),), ((on_0, 1.0),))

    def mixture(self, signal: int) -> Mixture:
        return self.on_signal_1 if signal == 1 else self.on_signal_0

    def weight(self, signal: int, plan: Plan) -> float:
        return dict(self.mixture(signal)).get(plan, 0.0)

    def describe(self) -> dict[str, dict[str, float]]:
        return {
            "signal_1": {p.value: w for p, w in self.on_signal_1},
            "signal_0": {p.value: w for p, w in self.on_signal_0},
        }
