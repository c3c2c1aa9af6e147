import pytest

from socialpricing.model import (
    InteractionPair,
    MarketParams,
    Plan,
    Preference,
    PricingPolicy,
    buyer_final_payoff,
    common_frequency,
    purchase_decision,
    social_utility,
)

H, L = Preference.HIGH, Preference.LOW


def test_same_preference_table():
    p = MarketParams(v_L=1, v_H=2)
    assert social_utility(H, H, InteractionPair(1, 1), p) == 1
    assert social_utility(H, H, InteractionPair(0, 1), MarketParams(v_L=1, v_H=2, l=0.4)) == pytest.approx(0.4)
    assert social_utility(L, L, InteractionPair(1, 0), MarketParams(v_L=1, v_H=2, l=0.4)) == pytest.approx(0.6)
    assert social_utility(L, L, InteractionPair(0, 0), p) == 0


def test_cross_preference_table():
    p = MarketParams(v_L=1, v_H=2, c=0.6, r=0.2)
    assert social_utility(H, L, InteractionPair(1, 0), p) == pytest.approx(-0.4)
    assert social_utility(H, L, InteractionPair(0, 1), p) == pytest.approx(-0.2)
    assert social_utility(H, L, InteractionPair(1, 1), p) == pytest.approx(-0.6)
    assert social_utility(L, H, InteractionPair(0, 0), p) == 0


def test_non_binary_frequency_rejected():
    with pytest.raises(ValueError):
        social_utility(H, H, InteractionPair(0.5, 1), MarketParams(v_L=1, v_H=2))


def test_frequency_range_enforced():
    with pytest.raises(ValueError):
        InteractionPair(1.2, 0)


@pytest.mark.parametrize("a,b,expected", [(1, 1, 1), (1, 0, 0), (0, 0, 0), (0.3, 0.7, 0.3)])
def test_common_frequency(a, b, expected):
    assert common_frequency(InteractionPair(a, b)) == expected


@pytest.mark.parametrize("v,p,expected", [(4, 4, True), (1, 4, False), (4, 1, True)])
def test_purchase_decision(v, p, expected):
    assert purchase_decision(v, p) is expected


@pytest.mark.parametrize("v,p,u,expected", [(4, 1, 1, 4), (1, 4, 0.4, 0.4), (2, 2, -0.6, -0.6)])
def test_buyer_final_payoff(v, p, u, expected):
    assert buyer_final_payoff(v, p, u) == pytest.approx(expected)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(v_L=2, v_H=2),
        dict(v_L=0, v_H=2),
        dict(v_L=1, v_H=2, l=1.0),
        dict(v_L=1, v_H=2, alpha=0.6),
        dict(v_L=1, v_H=2, c=0.5, r=0.5),
        dict(v_L=1, v_H=float("inf")),
    ],
)
def test_market_params_validation(kwargs):
    with pytest.raises(ValueError):
        MarketParams(**kwargs)


def test_preference_worth():
    p = MarketParams(v_L=1.5, v_H=4)
    assert H.worth(p) == 4 and L.worth(p) == 1.5


def test_plan_prices():
    p = MarketParams(v_L=1, v_H=3)
    assert Plan.UNIFORM_LOW.prices(p) == (1, 1, 1)
    assert Plan.UNIFORM_HIGH.prices(p) == (3, 3, 3)
    assert Plan.HIGH_THEN_MATCH.prices(p) == (3, 3, 1)
    assert Plan.HIGH_THEN_FLIP.prices(p) == (3, 1, 3)


def test_policy_weights_validated():
    with pytest.raises(ValueError):
        PricingPolicy(((Plan.UNIFORM_LOW, 0.5),), ((Plan.UNIFORM_LOW, 1.0),))
    pol = PricingPolicy(((Plan.UNIFORM_LOW, 0.25), (Plan.HIGH_THEN_MATCH, 0.75)), ((Plan.HIGH_THEN_FLIP, 1.0),))
    assert pol.weight(1, Plan.HIGH_THEN_MATCH) == 0.75
    assert pol.weight(0, Plan.UNIFORM_HIGH) == 0.0
