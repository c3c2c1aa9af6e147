import io
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from socialpricing.benchmarks import no_learning_revenue, undisclosed_revenue
from socialpricing.continuous import ContinuousParams, loss_from_awareness_continuous, solve_continuous_pbe
from socialpricing.model import (
    InteractionPair,
    MarketParams,
    Preference,
    buyer_final_payoff,
    common_frequency,
    purchase_decision,
    social_utility,
)
from socialpricing.network import load_edge_list
from socialpricing.pbe import (
    MIXING_REGIONS,
    Region,
    buyer_gap,
    classify_region,
    posterior_beliefs,
    seller_gap,
    solve_pbe,
    solve_pbe_nonuniform,
)
from socialpricing.stats import Estimate
from socialpricing.welfare import known_low_buyer_gain, loss_from_awareness, strategic_revenue

bits = st.sampled_from([0, 1])
unit = st.floats(0.0, 1.0)
open_unit = st.floats(0.01, 0.99)


@st.composite
def markets(draw):
    v_H = draw(st.floats(0.1, 10.0))
    ratio = draw(st.floats(0.01, 0.99))
    return MarketParams(v_L=ratio * v_H, v_H=v_H, l=draw(open_unit))


@given(bits, bits, open_unit)
def test_same_preference_utility_in_unit_interval(a, b, l):
    p = MarketParams(v_L=1, v_H=2, l=l)
    u = social_utility(Preference.HIGH, Preference.HIGH, InteractionPair(a, b), p)
    assert 0 <= u <= 1
    assert social_utility(Preference.LOW, Preference.LOW, InteractionPair(a, b), p) == u


@given(bits, bits)
def test_cross_preference_utility_nonpositive(a, b):
    p = MarketParams(v_L=1, v_H=2)
    assert social_utility(Preference.HIGH, Preference.LOW, InteractionPair(a, b), p) <= 0


@given(unit, unit, unit)
def test_common_frequency_is_monotone_minimum(x, y, z):
    c = common_frequency(InteractionPair(x, y))
    assert c <= x and c <= y
    if z >= y:
        assert common_frequency(InteractionPair(x, z)) >= c


@given(st.floats(0, 10), st.floats(0, 10), st.floats(-2, 2))
def test_payoff_at_least_social(v, p, u):
    assert buyer_final_payoff(v, p, u) >= u
    if purchase_decision(v, p):
        assert purchase_decision(v, p * 0.5)


@given(markets())
def test_region_partition_and_outcome_ranges(p):
    region = classify_region(p.v_H, p.v_L, p.l)
    out = solve_pbe(p)
    assert out.region is region
    assert 0 <= out.rho_star < 1
    assert (out.beta_star is not None) == (region in MIXING_REGIONS)
    if out.beta_star is not None:
        assert 0 <= out.beta_star <= 1
    if region in (Region.I, Region.II):
        assert out.rho_star == 0


@given(markets())
def test_indifference_in_mixed_regions(p):
    out = solve_pbe(p)
    if out.region in (Region.III, Region.IV, Region.V):
        assert abs(buyer_gap(out, p)) < 1e-9
    if out.region in MIXING_REGIONS:
        assert abs(seller_gap(out, p)) < 1e-9


@given(markets())
def test_revenue_sandwich(p):
    rev = strategic_revenue(p)
    tol = 1e-9 * p.v_H
    assert no_learning_revenue(p) - tol <= rev <= undisclosed_revenue(p) + tol
    assert -1e-12 <= loss_from_awareness(p) <= 1 / 12 + 1e-12
    assert 0 <= known_low_buyer_gain(p) <= 1 + 1e-12


@given(st.floats(0.0, 0.99), st.floats(0.05, 0.5))
def test_posteriors_are_bayes_consistent(rho, alpha):
    on_1, on_0 = posterior_beliefs(rho, alpha)
    s = (1 - rho) ** 2
    p_one = alpha**2 * s + (1 - alpha) ** 2
    assert 0 <= on_0 <= 1 and 0 <= on_1 <= 1
    assert on_1 * p_one + on_0 * (1 - p_one) == pytest.approx(alpha**2, abs=1e-12)


@given(markets())
def test_nonuniform_solver_agrees_at_half(p):
    assert solve_pbe_nonuniform(p) == solve_pbe(p)


@given(st.floats(0.5, 40.0))
def test_continuous_rho_range_and_loss(v):
    cp = ContinuousParams(v)
    out = solve_continuous_pbe(cp)
    assert 0 <= out.rho_star < 1 - math.sqrt(3 / 8)
    assert -1e-12 <= loss_from_awareness_continuous(cp) < 0.04


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=20), st.lists(st.floats(-100, 100), min_size=1, max_size=20))
def test_estimate_merge_is_pooling(a, b):
    m = Estimate.of(a).merge(Estimate.of(b))
    assert m.n == len(a) + len(b)
    assert m.mean == pytest.approx(np.mean(a + b), abs=1e-9)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)).filter(lambda e: e[0] != e[1]), min_size=1, max_size=40))
def test_edge_list_roundtrip(pairs):
    g = load_edge_list(io.StringIO("".join(f"{u} {v}\n" for u, v in pairs)))
    expected = {(min(u, v), max(u, v)) for u, v in pairs}
    assert g.n_edges == len(expected)
    got = {(int(g.labels[u]), int(g.labels[v])) for u, v in g.edges}
    assert got == expected
