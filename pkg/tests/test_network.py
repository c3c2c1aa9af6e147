import io
import math

import numpy as np
import pytest

from socialpricing.model import MarketParams
from socialpricing.network import (
    HIGH,
    LOW,
    UNKNOWN,
    _components,
    ArrivalSequence,
    MechanismKind,
    SocialGraph,
    apply_manipulation,
    fixture_path,
    known_high_profile_active,
    load_edge_file,
    load_edge_list,
    no_gain_condition,
    revenue_sweep,
    run_mechanism,
    sample_preferences,
    simulate_mechanisms,
    sweep_grid,
    three_buyer_pbe_known_high,
)
from socialpricing.pbe import Region, solve_pbe
from socialpricing.welfare import strategic_revenue


def make_graph(n, edges, pref, known=()):
    k = np.zeros(n, dtype=bool)
    k[list(known)] = True
    return SocialGraph(np.arange(n), np.array(edges).reshape(-1, 2), np.array(pref), k)


# ---------------------------------------------------------------- loading


def test_load_small_edge_list():
    g = load_edge_list(io.StringIO("0 1\n1 2\n"))
    assert (g.n_nodes, g.n_edges) == (3, 2)
    assert not g.populated
    assert np.all(g.preference == UNKNOWN)


def test_load_compacts_and_dedupes():
    g = load_edge_list(io.StringIO("# comment\n10 30\n30 10\n\n30 20\n"))
    np.testing.assert_array_equal(g.labels, [10, 20, 30])
    np.testing.assert_array_equal(g.edges, [[0, 2], [1, 2]])


@pytest.mark.parametrize("text, line", [("0 0\n", 1), ("0 1\n1 x\n", 2), ("0 1 2\n", 1), ("-1 2\n", 1)])
def test_load_rejects_bad_lines(text, line):
    with pytest.raises(ValueError, match=f"line {line}"):
        load_edge_list(io.StringIO(text))


def test_fixture_shape():
    g = load_edge_file(fixture_path())
    assert (g.n_nodes, g.n_edges) == (100, 230)
    assert g.mean_degree == pytest.approx(4.6)
    assert sorted(g.component_sizes().tolist()) == [2, 2, 96]


def test_graph_rejects_self_loop_and_bad_shapes():
    with pytest.raises(ValueError):
        make_graph(2, [[0, 0]], [0, 0])
    with pytest.raises(ValueError):
        make_graph(2, [[0, 1]], [0])


# ---------------------------------------------------------------- preferences and manipulation


def test_sample_preferences_extremes_and_seed():
    g = load_edge_file(fixture_path())
    assert np.all(sample_preferences(g, 0.0, 1).preference == LOW)
    assert np.all(sample_preferences(g, 1.0, 1).preference == HIGH)
    a, b = sample_preferences(g, 0.5, 4), sample_preferences(g, 0.5, 4)
    np.testing.assert_array_equal(a.preference, b.preference)
    with pytest.raises(ValueError):
        sample_preferences(g, 1.5, 0)


def test_truthful_signal_is_homophily():
    g = make_graph(3, [[0, 1], [1, 2]], [HIGH, HIGH, LOW])
    np.testing.assert_array_equal(g.truthful(), [1, 0])


def test_honest_region_never_manipulates():
    g = sample_preferences(load_edge_file(fixture_path()), 0.5, 12)
    params = MarketParams(v_L=3.0, v_H=4.0)
    assert solve_pbe(params).rho_star == 0
    m = apply_manipulation(g, params, 0)
    np.testing.assert_array_equal(m.realized, g.truthful())


def test_manipulation_only_on_high_high_edges():
    g = sample_preferences(load_edge_file(fixture_path()), 0.5, 12)
    params = MarketParams(v_L=1.9, v_H=3.8)
    p = g.preference
    hh = (p[g.edges[:, 0]] == HIGH) & (p[g.edges[:, 1]] == HIGH)
    flips = 0
    for seed in range(200):
        m = apply_manipulation(g, params, seed)
        np.testing.assert_array_equal(m.realized[~hh], g.truthful()[~hh])
        assert not m.withheld[~hh].any()
        flips += int((m.realized[hh] == 0).sum())
    rate = flips / (200 * hh.sum())
    s = (1 - solve_pbe(params).rho_star) ** 2
    assert rate == pytest.approx(1 - s, abs=0.02)
    assert 1 - s == pytest.approx(0.5, abs=1e-12)


# ---------------------------------------------------------------- known High buyers


def test_no_gain_condition_examples():
    assert no_gain_condition(2, 1, MarketParams(v_L=2.2, v_H=3.0))
    assert not no_gain_condition(2, 1, MarketParams(v_L=1.9, v_H=3.0))
    assert not no_gain_condition(2, 4, MarketParams(v_L=2.2, v_H=3.0))
    with pytest.raises(ValueError):
        no_gain_condition(0, 1, MarketParams(v_L=2.2, v_H=3.0))


def test_known_high_concealment_yields_uniform_low_revenue():
    g = sample_preferences(load_edge_file(fixture_path()), 0.5, 12)
    highs = np.flatnonzero(g.preference == HIGH)
    g = g.with_known(highs[:3])
    params = MarketParams(v_L=99.25, v_H=100.0)
    assert known_high_profile_active(g, params)
    n_unknown = g.unknown_nodes.size
    res = simulate_mechanisms(g, params, 2000, seed=3)
    assert res.slp.mean == pytest.approx(n_unknown * params.v_L, rel=1e-12)
    assert res.slp.stderr == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("params", [MarketParams(v_L=2.2, v_H=3.0), MarketParams(v_L=1.2, v_H=3.0, l=0.2)])
def test_three_buyer_cases(params):
    cases = {c.case for c in three_buyer_pbe_known_high(params)}
    d = params.v_H - params.v_L
    assert ("II" in cases) == (d < 2 * (1 - params.l))
    assert ("I" in cases) == (d >= 2 * (1 - params.l) and params.ratio >= 1 / 3)


def test_three_buyer_cases_at_reference_point():
    assert [c.case for c in three_buyer_pbe_known_high(MarketParams(v_L=2.2, v_H=3.0))] == ["II", "III", "IV", "V"]


def test_three_buyer_no_case():
    assert three_buyer_pbe_known_high(MarketParams(v_L=0.5, v_H=2.0, l=0.5)) == []


# ---------------------------------------------------------------- mechanisms


def test_arrival_sequence_validation():
    g = make_graph(3, [[0, 1], [1, 2]], [HIGH, LOW, LOW], known=[2])
    ArrivalSequence([1, 0]).validate(g)
    for bad in ([0, 1, 2], [0, 0], [0]):
        with pytest.raises(ValueError):
            ArrivalSequence(bad).validate(g)
    with pytest.raises(ValueError):
        run_mechanism(g, MechanismKind.NLP, ArrivalSequence([0]), MarketParams(v_L=1, v_H=2))


def test_ulp_with_known_low_extracts_everything():
    g = sample_preferences(load_edge_file(fixture_path()), 0.5, 12)
    roots = _components(g.n_nodes, g.edges)
    lows = np.flatnonzero(g.preference == LOW)
    # one known Low buyer per component pins every type through truthful signals
    known = {r: i for i in lows[::-1] for r in [roots[i]]}
    assert len(known) == len(np.unique(roots))
    g = g.with_known(known.values())
    params = MarketParams(v_L=1.0, v_H=2.0)
    value = np.where(g.preference == HIGH, 2.0, 1.0)
    for seed in range(5):
        res = run_mechanism(g, MechanismKind.ULP, ArrivalSequence.random(g, seed), params, seed)
        assert res.revenue == pytest.approx(value[~g.known].sum())


def test_nlp_revenue_expectation():
    g = sample_preferences(load_edge_file(fixture_path()), 0.5, 12)
    params = MarketParams(v_L=1.0, v_H=2.0)
    res = run_mechanism(g, MechanismKind.NLP, ArrivalSequence.random(g, 0), params)
    assert res.revenue == pytest.approx(2.0 * (g.preference == HIGH).sum())
    assert np.allclose(res.prices, 2.0)


def test_mechanism_payoffs_include_social_utility():
    g = make_graph(2, [[0, 1]], [LOW, LOW])
    params = MarketParams(v_L=1.0, v_H=2.0)
    res = run_mechanism(g, MechanismKind.ULP, ArrivalSequence([0, 1]), params)
    assert np.all(res.payoffs >= 1.0)


def test_two_buyer_slp_matches_closed_form():
    g0 = make_graph(2, [[0, 1]], [LOW, LOW])
    for params in (MarketParams(v_L=1.4, v_H=2.6), MarketParams(v_L=1.9, v_H=3.8), MarketParams(v_L=1.0, v_H=4.0)):
        mean, var = 0.0, 0.0
        for pref in ((LOW, LOW), (LOW, HIGH), (HIGH, LOW), (HIGH, HIGH)):
            g = SocialGraph(g0.labels, g0.edges, np.array(pref), g0.known)
            est = simulate_mechanisms(g, params, 20_000, seed=sum(pref) + 11)
            mean += est.slp.mean / 4
            var += est.slp.stderr**2 / 16
        assert abs(mean - strategic_revenue(params)) <= 4 * math.sqrt(var) + 1e-12


def test_mechanism_ordering_on_fixture():
    g = sample_preferences(load_edge_file(fixture_path()), 0.5, 12)
    res = simulate_mechanisms(g, MarketParams(v_L=1.9, v_H=3.8), 2000, seed=1)
    assert res.ulp.mean >= res.slp.mean >= res.nlp.mean


def test_simulation_independent_of_thread_count():
    g = sample_preferences(load_edge_file(fixture_path()), 0.5, 12)
    params = MarketParams(v_L=1.9, v_H=3.8)
    a = simulate_mechanisms(g, params, 2500, seed=9, threads=1)
    b = simulate_mechanisms(g, params, 2500, seed=9, threads=3)
    assert a == b
    assert a.slp.n == 2500


def test_simulation_rejects_zero_replications():
    g = sample_preferences(load_edge_file(fixture_path()), 0.5, 12)
    with pytest.raises(ValueError):
        simulate_mechanisms(g, MarketParams(v_L=1, v_H=2), 0, seed=0)


def test_sweep_grid_and_small_sweep():
    np.testing.assert_allclose(sweep_grid(10, 4), [2.5, 5.0, 7.5, 10.0])
    with pytest.raises(ValueError):
        sweep_grid(10, 0)
    g = load_edge_file(fixture_path())
    sw = revenue_sweep(g, [2.0, 4.0], n_shuffles=500, seed=12)
    assert sw.high_fraction == 0.5
    assert len(sw.points) == 2
    for p in sw.points:
        assert p.ulp_gain >= 0 and p.slp_loss >= 0
