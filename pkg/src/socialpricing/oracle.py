"""Independent checks of the closed-form equilibrium.

Everything here is computed by direct play of the two-period pricing game
(enumerating preference pairs and arrival orders) rather than from the
closed-form region formulas, so agreement is a genuine cross-check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from socialpricing.model import MarketParams, Mixture, Plan, PricingPolicy
from socialpricing.pbe import EquilibriumOutcome, Region
from socialpricing.stats import Estimate, SimulationReport, chunk_sizes, generators

NAMED_PLANS = tuple(Plan)
UtilityFn = Callable[[float, float], float]


@dataclass(frozen=True)
class GridSpec:
    """Discretization used by the brute-force search.

    Attributes:
        rho_step: Spacing of the buyer's mixing probability grid.
        mix_step: Spacing of the seller's mixing weight grid.
        price_grid: Candidate prices for seller deviations; None selects
            {0, v_L/2, v_L, (v_L+v_H)/2, v_H, v_H(1+1e-3)}.
    """

    rho_step: float = 1e-3
    mix_step: float = 1e-3
    price_grid: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not (self.rho_step > 0 and self.mix_step > 0):
            raise ValueError("grid steps must be positive")
        if self.price_grid is not None:
            if len(self.price_grid) == 0:
                raise ValueError("price grid is empty")
            if list(self.price_grid) != sorted(self.price_grid):
                raise ValueError("price grid must be sorted ascending")

    def prices(self, params: MarketParams) -> np.ndarray:
        if self.price_grid is not None:
            return np.asarray(self.price_grid, dtype=float)
        lo, hi = params.v_L, params.v_H
        return np.array([0.0, lo / 2, lo, (lo + hi) / 2, hi, hi * (1 + 1e-3)])


@dataclass(frozen=True)
class EpsEquilibrium:
    """A grid profile surviving the equilibrium filters.

    Attributes:
        rho: Probability a high buyer withholds interaction from a high partner.
        policy: Seller's plan mixture after each signal.
        epsilon: Largest unilateral gain any player has from deviating.
    """

    rho: float
    policy: PricingPolicy
    epsilon: float


@dataclass(frozen=True)
class FrequencyEquilibrium:
    """Symmetric high-buyer frequency strategy surviving the filters on a frequency grid."""

    support: tuple[float, ...]
    weights: tuple[float, ...]
    policy: PricingPolicy
    epsilon: float

    @property
    def is_polarized(self) -> bool:
        return all(x in (0.0, 1.0) for x in self.support)


# ---------------------------------------------------------------- direct play


def _play(v1: float, v2: float, plans: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Revenue and both surpluses when v1 arrives first, for every plan row (p1, p2|buy, p2|no buy)."""
    p1, p2_buy, p2_none = plans[:, 0], plans[:, 1], plans[:, 2]
    a1 = v1 >= p1
    p2 = np.where(a1, p2_buy, p2_none)
    a2 = v2 >= p2
    revenue = np.where(a1, p1, 0.0) + np.where(a2, p2, 0.0)
    return revenue, np.where(a1, v1 - p1, 0.0), np.where(a2, v2 - p2, 0.0)


def _pair_tables(vi: float, vj: float, plans: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Expected revenue and buyer i's expected surplus over a fair arrival order."""
    rev_ij, s_first, _ = _play(vi, vj, plans)
    rev_ji, _, s_second = _play(vj, vi, plans)
    return (rev_ij + rev_ji) / 2, (s_first + s_second) / 2


def _named_prices(params: MarketParams) -> np.ndarray:
    return np.array([p.prices(params) for p in NAMED_PLANS])


def _all_prices(params: MarketParams, prices: np.ndarray) -> np.ndarray:
    grid = np.unique(np.concatenate([prices, [params.v_L, params.v_H]]))
    triples = np.array(list(itertools.product(grid, repeat=3)))
    return np.vstack([_named_prices(params), triples])


@dataclass(frozen=True)
class _Tables:
    """Revenue of each plan given the pair is HH or not, per signal; HH buyer surplus per named plan."""

    hh_all: np.ndarray
    ll_all: np.ndarray
    mixed_all: np.ndarray
    surplus_hh: np.ndarray

    @classmethod
    def build(cls, params: MarketParams, prices: np.ndarray) -> _Tables:
        hi, lo = params.v_H, params.v_L
        plans = _all_prices(params, prices)
        hh, _ = _pair_tables(hi, hi, plans)
        ll, _ = _pair_tables(lo, lo, plans)
        hl, _ = _pair_tables(hi, lo, plans)
        _, s_hh = _pair_tables(hi, hi, _named_prices(params))
        return cls(hh, ll, hl, s_hh)


def bayes_posteriors(sigma_top: np.ndarray, sigma_bottom: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Pr(HH | signal 1), Pr(HH | signal 0) by enumerating the four preference pairs.

    sigma_top / sigma_bottom: probability a high buyer picks frequency 1 / 0
    toward a high partner. Low pairs interact fully and mixed pairs not at all.
    """
    joint = {
        ("H", "H"): alpha * alpha,
        ("H", "L"): alpha * (1 - alpha),
        ("L", "H"): (1 - alpha) * alpha,
        ("L", "L"): (1 - alpha) * (1 - alpha),
    }
    top = np.asarray(sigma_top, dtype=float)
    bottom = np.asarray(sigma_bottom, dtype=float)
    sig1 = {pair: np.full_like(top, 1.0 if pair == ("L", "L") else 0.0) for pair in joint}
    sig1[("H", "H")] = top * top
    sig0 = {pair: np.full_like(top, 1.0 if pair[0] != pair[1] else 0.0) for pair in joint}
    sig0[("H", "H")] = 1 - (1 - bottom) ** 2
    out = []
    for table in (sig1, sig0):
        total = sum(joint[p] * table[p] for p in joint)
        out.append(joint[("H", "H")] * table[("H", "H")] / total)
    return out[0], out[1]


# ---------------------------------------------------------------- search core


@dataclass(frozen=True)
class _Options:
    """Seller best-response mixtures after one signal."""

    plans: list[Mixture]
    surplus: np.ndarray
    gain: np.ndarray


def _seller_options(rev: np.ndarray, best: float, surplus: np.ndarray, eps: float, mix_step: float) -> _Options:
    br = [i for i in range(len(NAMED_PLANS)) if rev[i] >= best - eps]
    plans: list[Mixture] = []
    s_vals: list[float] = []
    gains: list[float] = []
    for i in br:
        plans.append(((NAMED_PLANS[i], 1.0),))
        s_vals.append(surplus[i])
        gains.append(best - rev[i])
    m = int(round(1 / mix_step))
    w = np.arange(1, m) / m
    for i, j in itertools.combinations(br, 2):
        s_vals.extend(w * surplus[i] + (1 - w) * surplus[j])
        gains.extend(best - (w * rev[i] + (1 - w) * rev[j]))
        plans.extend(((NAMED_PLANS[i], float(x)), (NAMED_PLANS[j], float(1 - x))) for x in w)
    return _Options(plans, np.asarray(s_vals), np.asarray(gains))


@dataclass
class _Game:
    params: MarketParams
    freq: np.ndarray
    utility: np.ndarray
    tables: _Tables
    eps_seller: float
    eps_buyer: float
    mix_step: float
    top: int = field(init=False)
    bottom: int = field(init=False)

    def __post_init__(self) -> None:
        self.top = int(np.flatnonzero(self.freq == 1.0)[0])
        self.bottom = int(np.flatnonzero(self.freq == 0.0)[0])

    def search(self, sigmas: np.ndarray) -> list[tuple[np.ndarray, PricingPolicy, float]]:
        """Keep symmetric high-buyer strategies (rows) that are epsilon-equilibria with some seller reply."""
        t = self.tables
        p_top, p_bot = sigmas[:, self.top], sigmas[:, self.bottom]
        q1, q0 = bayes_posteriors(p_top, p_bot, self.params.alpha)
        rev1 = q1[:, None] * t.hh_all + (1 - q1)[:, None] * t.ll_all
        rev0 = q0[:, None] * t.hh_all + (1 - q0)[:, None] * t.mixed_all
        best1, best0 = rev1.max(axis=1), rev0.max(axis=1)
        k = len(NAMED_PLANS)
        # Own-frequency payoff = social term + a * S(signal 1) + b * S(signal 0).
        social = sigmas @ self.utility.T
        a = np.zeros_like(sigmas)
        a[:, self.top] = p_top
        b = np.repeat(p_bot[:, None], len(self.freq), axis=1)
        b[:, self.bottom] = 1.0
        found = []
        for r in range(len(sigmas)):
            o1 = _seller_options(rev1[r, :k], best1[r], t.surplus_hh, self.eps_seller, self.mix_step)
            o0 = _seller_options(rev0[r, :k], best0[r], t.surplus_hh, self.eps_seller, self.mix_step)
            if not len(o1.plans) or not len(o0.plans):
                continue
            pay = (
                social[r][None, None, :]
                + a[r][None, None, :] * o1.surplus[:, None, None]
                + b[r][None, None, :] * o0.surplus[None, :, None]
            )
            support = np.flatnonzero(sigmas[r] > 0)
            shortfall = (pay.max(axis=2)[:, :, None] - pay[:, :, support]).max(axis=2)
            ok = np.argwhere(shortfall <= self.eps_buyer)
            for i, j in ok:
                eps = max(shortfall[i, j], o1.gain[i], o0.gain[j], 0.0)
                found.append((sigmas[r], PricingPolicy(o1.plans[i], o0.plans[j]), float(eps)))
        return found


def _epsilons(params: MarketParams, utility: np.ndarray, step: float, mix_step: float) -> tuple[float, float]:
    """Lipschitz slack of seller revenue and buyer payoff in the grid steps."""
    floor = 1e-6 * params.v_H
    d = params.diff
    eps_seller = max(4 * params.v_H * step, floor)
    eps_buyer = max((float(utility.max() - utility.min()) + 2 * d) * step + d * mix_step, floor)
    return eps_seller, eps_buyer


def _binary_utility(l: float) -> np.ndarray:
    """u[own, partner] over frequencies (0, 1) for two high buyers."""
    return np.array([[0.0, l], [1 - l, 1.0]])


def honest_structure_margin(params: MarketParams, policy: PricingPolicy) -> float:
    """Smallest payoff advantage of honest play for buyers outside high-high pairs.

    Low-low buyers compare frequency 1 with 0; mixed-pair buyers compare 0 with 1,
    the partner playing honestly. A positive value means no such buyer deviates.
    """
    lo, l, c, r = params.v_L, params.l, params.c, params.r
    named = _named_prices(params)

    def surplus(vi: float, vj: float, signal: int) -> float:
        _, s = _pair_tables(vi, vj, named)
        return sum(w * s[NAMED_PLANS.index(p)] for p, w in policy.mixture(signal))

    low_low = (1 + surplus(lo, lo, 1)) - (l + surplus(lo, lo, 0))
    # With the partner at 0 the signal is 0 either way, so only social utility moves.
    mixed = 0.0 - (r - c)
    return min(low_low, mixed)


def brute_force_pbe(params: MarketParams, grid: GridSpec = GridSpec()) -> list[EpsEquilibrium]:
    """All grid profiles (rho, seller mixture) that are epsilon-equilibria.

    Buyer mixing over {0, 1} is enumerated on the rho grid, seller replies are
    single plans or two-plan mixtures on the mix grid. A profile survives when
    posteriors follow Bayes' rule, every plan in the seller's support is within
    eps of the best of all plans over the price grid, the high buyer's
    supported frequencies are within eps of the best reply, and buyers outside
    high-high pairs strictly prefer honest play.
    """
    prices = grid.prices(params)
    utility = _binary_utility(params.l)
    eps_s, eps_b = _epsilons(params, utility, grid.rho_step, grid.mix_step)
    game = _Game(params, np.array([0.0, 1.0]), utility, _Tables.build(params, prices), eps_s, eps_b, grid.mix_step)
    m = int(round(1 / grid.rho_step))
    top = np.arange(m + 1) / m
    sigmas = np.column_stack([np.arange(m, -1, -1) / m, top])
    result = []
    for sigma, policy, eps in game.search(sigmas):
        if honest_structure_margin(params, policy) < -eps_b:
            continue
        result.append(EpsEquilibrium(rho=float(sigma[0]), policy=policy, epsilon=eps))
    return result


def mixing_weight(policy: PricingPolicy, region: Region) -> float | None:
    """The weight solve_pbe reports as beta for a region (None outside mixing regions)."""
    if region is Region.IV:
        return policy.weight(1, Plan.UNIFORM_LOW)
    if region is Region.V:
        return policy.weight(0, Plan.UNIFORM_HIGH)
    return None


def closest_profile(found: Sequence[EpsEquilibrium], outcome: EquilibriumOutcome) -> tuple[float, float]:
    """(|d rho|, |d beta|) of the profile nearest to the closed-form outcome."""
    best = (math.inf, math.inf)
    for eq in found:
        d_rho = abs(eq.rho - outcome.rho_star)
        d_beta = 0.0
        if outcome.beta_star is not None:
            d_beta = abs(mixing_weight(eq.policy, outcome.region) - outcome.beta_star)
        if max(d_rho, d_beta) < max(best):
            best = (d_rho, d_beta)
    return best


# ---------------------------------------------------------------- continuous frequencies


def _dominance_slack(fn: UtilityFn) -> float:
    return 1e-12 * max(1.0, abs(fn(1.0, 1.0)))


def check_same_preference_utility(fn: UtilityFn, l: float, grid: Sequence[float]) -> None:
    """Raise ValueError naming the first violated same-preference utility condition."""
    tol = 1e-9
    g = sorted(set(float(x) for x in grid) | {0.0, 1.0})
    u = np.array([[fn(x, y) for y in g] for x in g])
    if (u < -tol).any():
        raise ValueError("utility violates non-negativity")
    if (np.diff(u, axis=0) < -tol).any() or (np.diff(u, axis=1) < -tol).any():
        raise ValueError("utility violates monotonicity")
    if abs(fn(1.0, 1.0) - 1.0) > tol or abs(fn(0.0, 0.0)) > tol:
        raise ValueError("utility violates normalization u(1,1)=1, u(0,0)=0")
    for x in (0.0, 1.0):
        if abs(fn(x, 1.0) - fn(x, 0.0) - l) > tol:
            raise ValueError(f"utility violates normalization u({x:g},1) - u({x:g},0) = l")


def check_cross_preference_utility(fn: UtilityFn, grid: Sequence[float]) -> None:
    """Raise ValueError naming the first violated different-preference utility condition."""
    tol = 1e-9
    g = sorted(set(float(x) for x in grid) | {0.0, 1.0})
    u = np.array([[fn(x, y) for y in g] for x in g])
    if (u > tol).any():
        raise ValueError("cross-preference utility violates non-positivity")
    if (np.diff(u, axis=0) > tol).any() or (np.diff(u, axis=1) > tol).any():
        raise ValueError("cross-preference utility violates monotonicity")


def frequency_equilibria(
    params: MarketParams,
    freq_grid: Sequence[float],
    utility_fn: UtilityFn,
    weight_step: float = 1e-3,
    mix_step: float = 1e-3,
    cross_utility_fn: UtilityFn | None = None,
) -> list[FrequencyEquilibrium]:
    """Symmetric epsilon-equilibria with high-buyer strategies of support size at most two.

    A common frequency strictly between 0 and 1 can only come from two high
    buyers, so the seller charges v_H twice and the buyers keep no surplus.
    """
    freq = np.array(sorted(set(float(x) for x in freq_grid)))
    if freq[0] != 0.0 or freq[-1] != 1.0:
        raise ValueError("frequency grid must include 0 and 1")
    check_same_preference_utility(utility_fn, params.l, freq)
    if cross_utility_fn is not None:
        check_cross_preference_utility(cross_utility_fn, freq)
    utility = np.array([[utility_fn(x, y) for y in freq] for x in freq])
    eps_s, eps_b = _epsilons(params, utility, weight_step, mix_step)
    game = _Game(params, freq, utility, _Tables.build(params, GridSpec().prices(params)), eps_s, eps_b, mix_step)
    n = len(freq)
    m = int(round(1 / weight_step))
    w = np.arange(1, m) / m
    families = [np.eye(n)]
    for i, j in itertools.combinations(range(n), 2):
        rows = np.zeros((len(w), n))
        rows[:, i], rows[:, j] = 1 - w, w
        families.append(rows)
    out = []
    for rows in families:
        for sigma, policy, eps in game.search(rows):
            idx = np.flatnonzero(sigma > 0)
            out.append(FrequencyEquilibrium(tuple(freq[idx]), tuple(sigma[idx]), policy, eps))
    return out


def verify_frequency_polarization(
    params: MarketParams,
    freq_grid: Sequence[float],
    utility_fn: UtilityFn,
    weight_step: float = 1e-3,
    mix_step: float = 1e-3,
) -> bool:
    """True iff at least one equilibrium exists and every one puts high-high frequencies in {0, 1}."""
    found = frequency_equilibria(params, freq_grid, utility_fn, weight_step, mix_step)
    return bool(found) and all(eq.is_polarized for eq in found)


# ---------------------------------------------------------------- binary pricing


def binary_pricing_violations(
    params: MarketParams, price_grid: Sequence[float], s_grid: Sequence[float] | None = None
) -> list[str]:
    """Information sets where some optimal grid price lies outside {v_L, v_H}.

    Beliefs about the pair come from Bayes' rule after each signal for every
    s in s_grid; the grid is extended with 16 interior prices and with v_L, v_H.
    """
    lo, hi = params.v_L, params.v_H
    interior = lo + (hi - lo) * np.arange(1, 17) / 17
    prices = np.unique(np.concatenate([np.asarray(price_grid, float), interior, [lo, hi]]))
    binary = np.isin(prices, [lo, hi])
    s_grid = np.linspace(0, 1, 21) if s_grid is None else np.asarray(s_grid, float)
    tol = 1e-12 * hi
    problems = []
    for s in s_grid:
        q1, q0 = bayes_posteriors(np.array([math.sqrt(s)]), np.array([1 - math.sqrt(s)]), params.alpha)
        # Pair beliefs given the signal: P(first, second) with types 0=L, 1=H.
        beliefs = {
            1: np.array([[1 - q1[0], 0.0], [0.0, q1[0]]]),
            0: np.array([[0.0, (1 - q0[0]) / 2], [(1 - q0[0]) / 2, q0[0]]]),
        }
        values = np.array([lo, hi])
        for signal, joint in beliefs.items():
            total = np.empty(len(prices))
            for k, p1 in enumerate(prices):
                buys = values >= p1
                value = 0.0
                for a1 in (True, False):
                    mass = joint[buys == a1].sum()
                    if mass <= 0:
                        continue
                    second = joint[buys == a1].sum(axis=0) / mass
                    rev2 = prices * np.array([second[values >= p].sum() for p in prices])
                    best2 = rev2.max()
                    if (~binary & (rev2 >= best2 - tol)).any():
                        problems.append(f"s={s:g}, signal={signal}, p1={p1:g}, a1={int(a1)}")
                    value += mass * (p1 * a1 + best2)
                total[k] = value
            if (~binary & (total >= total.max() - tol)).any():
                problems.append(f"s={s:g}, signal={signal}, first period")
    return problems


def verify_binary_pricing(params: MarketParams, price_grid: Sequence[float]) -> bool:
    """True iff every revenue-maximizing grid price, at every information set, is v_L or v_H."""
    return not binary_pricing_violations(params, price_grid)


# ---------------------------------------------------------------- Monte Carlo


def _mixture_arrays(policy: PricingPolicy, signal: int) -> tuple[np.ndarray, np.ndarray]:
    mix = policy.mixture(signal)
    idx = np.array([NAMED_PLANS.index(p) for p, _ in mix])
    cum = np.cumsum([w for _, w in mix])
    cum[-1] = 1.0
    return idx, cum


def _social(same: np.ndarray, own: np.ndarray, other: np.ndarray, params: MarketParams) -> np.ndarray:
    k = 2 * own.astype(int) + other.astype(int)
    same_tab = np.array([0.0, params.l, 1 - params.l, 1.0])
    diff_tab = np.array([0.0, -params.r, -params.c + params.r, -params.c])
    return np.where(same, same_tab[k], diff_tab[k])


def _mc_chunk(g: np.random.Generator, m: int, rho: float, policy: PricingPolicy, params: MarketParams):
    a, hi, lo = params.alpha, params.v_H, params.v_L
    hi_i, hi_j = g.random(m) < a, g.random(m) < a
    man_i, man_j = g.random(m) < rho, g.random(m) < rho
    hh = hi_i & hi_j
    same = hi_i == hi_j
    x_i = np.where(hh, ~man_i, same)
    x_j = np.where(hh, ~man_j, same)
    signal = x_i & x_j
    draw = g.random(m)
    plan = np.empty(m, dtype=int)
    for sig in (0, 1):
        idx, cum = _mixture_arrays(policy, sig)
        sel = signal == bool(sig)
        plan[sel] = idx[np.searchsorted(cum, draw[sel], side="right").clip(max=len(idx) - 1)]
    prices = _named_prices(params)[plan]
    i_first = g.random(m) < 0.5
    v_i, v_j = np.where(hi_i, hi, lo), np.where(hi_j, hi, lo)
    v1, v2 = np.where(i_first, v_i, v_j), np.where(i_first, v_j, v_i)
    a1 = v1 >= prices[:, 0]
    p2 = np.where(a1, prices[:, 1], prices[:, 2])
    a2 = v2 >= p2
    revenue = np.where(a1, prices[:, 0], 0.0) + np.where(a2, p2, 0.0)
    s1, s2 = np.where(a1, v1 - prices[:, 0], 0.0), np.where(a2, v2 - p2, 0.0)
    pay_i = np.where(i_first, s1, s2) + _social(same, x_i, x_j, params)
    pay_j = np.where(i_first, s2, s1) + _social(same, x_j, x_i, params)
    return revenue, (pay_i + pay_j) / 2


def monte_carlo_play(outcome: EquilibriumOutcome, params: MarketParams, n: int, seed: int) -> SimulationReport:
    """Simulate n independent plays of the two-buyer game under an equilibrium.

    Each sample draws both preferences from the prior, the high buyers'
    manipulation coins, the seller's plan from the policy mixture and a random
    arrival order. Samples are split in fixed-size chunks, each with its own
    PCG64 substream, so results are reproducible bit-for-bit.
    """
    sizes = chunk_sizes(n)
    rev, pay = Estimate.empty(), Estimate.empty()
    for g, m in zip(generators(seed, len(sizes)), sizes):
        r, p = _mc_chunk(g, m, outcome.rho_star, outcome.policy, params)
        rev, pay = rev.merge(Estimate.of(r)), pay.merge(Estimate.of(p))
    return SimulationReport(n_samples=n, seed=seed, revenue=rev, buyer_payoff=pay)
