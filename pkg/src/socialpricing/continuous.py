"""Two-class continuous-preference extension.

Preferences are uniform on [0, v_bar]; buyers at or above v_bar/2 form the
high-end class, the rest the low-end class. Class pairs play the binary
interaction game; only two high-end buyers may manipulate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from socialpricing.stats import Estimate, chunk_sizes, generators

LOW, HIGH = 0, 1
BISECTION_ITERS = 200


@dataclass(frozen=True)
class ContinuousParams:
    v_bar: float
    l: float = 0.5

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v_bar) and self.v_bar > 0):
            raise ValueError(f"need v_bar > 0, got {self.v_bar}")
        if not 0 < self.l < 1:
            raise ValueError(f"need 0 < l < 1, got l={self.l}")

    @property
    def case1_bound(self) -> float:
        return 8 * (1 - self.l)

    @property
    def case2_bound(self) -> float:
        return 64 * (1 - self.l) / (3 * math.sqrt(3))


@dataclass(frozen=True)
class ContinuousPlan:
    """First-period price and the second-period price after a purchase / no purchase."""

    p1: float
    p2_buy: float
    p2_no_buy: float

    def p2(self, a1: bool) -> float:
        return self.p2_buy if a1 else self.p2_no_buy


@dataclass(frozen=True)
class ContinuousOutcome:
    """Equilibrium (or benchmark) of the continuous-preference game.

    Attributes:
        case_id: 1, 2 or 3 for the strategic equilibrium; None for benchmarks.
        rho_star: High-end buyers' manipulation probability.
        on_signal_1: Pricing after common frequency 1.
        on_signal_0: Pricing after common frequency 0.
    """

    case_id: int | None
    rho_star: float
    on_signal_1: ContinuousPlan
    on_signal_0: ContinuousPlan

    @property
    def p1_on_signal1(self) -> float:
        return self.on_signal_1.p1

    @property
    def p1_on_signal0(self) -> float:
        return self.on_signal_0.p1

    def p2_rule(self, signal: int, a1: bool) -> float:
        return (self.on_signal_1 if signal == 1 else self.on_signal_0).p2(a1)

    def plan(self, signal: int) -> ContinuousPlan:
        return self.on_signal_1 if signal == 1 else self.on_signal_0


# ---------------------------------------------------------------- closed form


def case3_cubic(u: float, params: ContinuousParams) -> float:
    """8 v u^3 - 3 v u + 32 l - 32 with u = 1 - rho."""
    v = params.v_bar
    return 8 * v * u**3 - 3 * v * u + 32 * params.l - 32


def bisect(fn, lo: float, hi: float, iters: int = BISECTION_ITERS) -> float:
    """Root of fn on [lo, hi] given a sign change; stops when the bracket collapses."""
    f_lo = fn(lo)
    if f_lo == 0:
        return lo
    if f_lo * fn(hi) > 0:
        raise ValueError("no sign change on the bracket")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = fn(mid)
        if f_mid == 0:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _low_s_first_price(s: float, v: float) -> float:
    """First-period price after signal 1 when s < 1/4 (first-order condition root).

    With x = 2 p1 / v the condition reads 1 + s - 2x + s^2 / (4 (1-x)^2) = 0; it
    is convex in x, positive at 0 and negative at x = 1 - s, so the root below
    1 - s is unique.
    """
    if s == 0:
        return v / 4
    g = lambda x: 1 + s - 2 * x + s * s / (4 * (1 - x) ** 2)
    return bisect(g, 0.0, 1 - s) * v / 2


def continuous_optimal_pricing_given_s(s: float, params: ContinuousParams) -> tuple[ContinuousPlan, ContinuousPlan]:
    """Seller's pricing after signal 1 and signal 0 when high-end pairs show signal 1 w.p. s."""
    if not 0 <= s <= 1:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    v = params.v_bar
    if s >= 0.75:
        on_1 = ContinuousPlan(v / 2, v / 2, v / 4)
    elif s >= 0.25:
        on_1 = ContinuousPlan((4 * s + 5) * v / 16, v / 2, v / 4)
    else:
        p1 = _low_s_first_price(s, v)
        on_1 = ContinuousPlan(p1, v * (s * v + v - 2 * p1) / (4 * (v - 2 * p1)), v / 4)
    on_0 = ContinuousPlan(v / 2, (2 - s) * v / 4, v / 2)
    return on_1, on_0


def continuous_case(params: ContinuousParams) -> int:
    if params.v_bar <= params.case1_bound:
        return 1
    if params.v_bar <= params.case2_bound:
        return 2
    return 3


def solve_continuous_pbe(params: ContinuousParams) -> ContinuousOutcome:
    case = continuous_case(params)
    if case == 1:
        rho = 0.0
    elif case == 2:
        rho = 1 - 2 * ((1 - params.l) / params.v_bar) ** (1 / 3)
    else:
        u = bisect(lambda x: case3_cubic(x, params), math.sqrt(3 / 8), math.sqrt(3) / 2)
        rho = 1 - u
    on_1, on_0 = continuous_optimal_pricing_given_s((1 - rho) ** 2, params)
    return ContinuousOutcome(case, rho, on_1, on_0)


def undisclosed_continuous_outcome(params: ContinuousParams) -> ContinuousOutcome:
    """Honest buyers with a learning seller: the s = 1 pricing."""
    on_1, on_0 = continuous_optimal_pricing_given_s(1.0, params)
    return ContinuousOutcome(None, 0.0, on_1, on_0)


def no_learning_continuous_outcome(params: ContinuousParams) -> ContinuousOutcome:
    """Uniform price v_bar/2 in both periods regardless of the signal."""
    half = params.v_bar / 2
    plan = ContinuousPlan(half, half, half)
    return ContinuousOutcome(None, 0.0, plan, plan)


# ---------------------------------------------------------------- exact evaluation


def _bounds(cls: int, v: float) -> tuple[float, float]:
    return (v / 2, v) if cls == HIGH else (0.0, v / 2)


def _buy_prob(cls: int, p: float, v: float) -> float:
    a, b = _bounds(cls, v)
    return min(max((b - p) / (b - a), 0.0), 1.0)


def _surplus(cls: int, p: float, v: float) -> float:
    """E[(v_i - p)^+] for v_i uniform on the class interval."""
    a, b = _bounds(cls, v)
    if p <= a:
        return (a + b) / 2 - p
    if p >= b:
        return 0.0
    return (b - p) ** 2 / (2 * (b - a))


def _play(first: int, second: int, plan: ContinuousPlan, v: float) -> tuple[float, float, float]:
    """Expected revenue and the two buyers' expected surpluses for one arrival order."""
    q = _buy_prob(first, plan.p1, v)
    rev = plan.p1 * q
    rev += q * plan.p2_buy * _buy_prob(second, plan.p2_buy, v)
    rev += (1 - q) * plan.p2_no_buy * _buy_prob(second, plan.p2_no_buy, v)
    s_first = _surplus(first, plan.p1, v)
    s_second = q * _surplus(second, plan.p2_buy, v) + (1 - q) * _surplus(second, plan.p2_no_buy, v)
    return rev, s_first, s_second


def _pair_signal_probs(ci: int, cj: int, rho: float) -> dict[int, float]:
    if ci == cj == HIGH:
        s = (1 - rho) ** 2
        return {1: s, 0: 1 - s}
    return {1: 1.0} if ci == cj else {0: 1.0}


@dataclass(frozen=True)
class ContinuousWelfare:
    revenue: float
    buyer_payoff: float
    low_end_payoff: float
    high_end_payoff: float


def continuous_expected(outcome: ContinuousOutcome, params: ContinuousParams) -> ContinuousWelfare:
    """Exact expected revenue and payoffs by integrating over class pairs and arrival orders."""
    v, rho = params.v_bar, outcome.rho_star
    revenue = 0.0
    payoff = {LOW: 0.0, HIGH: 0.0}
    for ci in (LOW, HIGH):
        for cj in (LOW, HIGH):
            social = 0.0
            if ci == cj:
                social = 1.0 if ci == LOW else 1.0 - rho
            for signal, p_sig in _pair_signal_probs(ci, cj, rho).items():
                plan = outcome.plan(signal)
                r_ij, s_i_first, _ = _play(ci, cj, plan, v)
                r_ji, _, s_i_second = _play(cj, ci, plan, v)
                revenue += 0.25 * p_sig * (r_ij + r_ji) / 2
                payoff[ci] += 0.5 * p_sig * (s_i_first + s_i_second) / 2
            payoff[ci] += 0.5 * social
    # payoff[c] sums over the partner's class with weight 1/2: it is the class-conditional payoff.
    return ContinuousWelfare(
        revenue=revenue,
        buyer_payoff=(payoff[LOW] + payoff[HIGH]) / 2,
        low_end_payoff=payoff[LOW],
        high_end_payoff=payoff[HIGH],
    )


def continuous_revenue(outcome: ContinuousOutcome, params: ContinuousParams) -> float:
    return continuous_expected(outcome, params).revenue


def loss_from_awareness_continuous(params: ContinuousParams) -> float:
    """(undisclosed - strategic) / undisclosed expected revenue."""
    und = continuous_revenue(undisclosed_continuous_outcome(params), params)
    st = continuous_revenue(solve_continuous_pbe(params), params)
    return (und - st) / und


def high_end_gap(outcome: ContinuousOutcome, params: ContinuousParams) -> float:
    """Manipulate-minus-honest expected payoff of a high-end buyer facing a high-end partner."""
    v, rho, l = params.v_bar, outcome.rho_star, params.l

    def surplus(signal: int) -> float:
        _, first, _ = _play(HIGH, HIGH, outcome.plan(signal), v)
        _, _, second = _play(HIGH, HIGH, outcome.plan(signal), v)
        return (first + second) / 2

    s1, s0 = surplus(1), surplus(0)
    honest = (1 - rho) * (1 + s1) + rho * (1 - l + s0)
    manipulate = (1 - rho) * (l + s0) + rho * s0
    return manipulate - honest


# ---------------------------------------------------------------- best-response oracle


def _second_price(h: float, v: float) -> tuple[float, float]:
    """Revenue-maximizing price and revenue against h U[v/2, v] + (1-h) U[0, v/2]."""
    best = (v / 2, h * v / 2)
    if h < 1:
        p = min(v / (4 * (1 - h)), v / 2)
        rev = p * (h + (1 - h) * (1 - 2 * p / v))
        if rev > best[1]:
            best = (p, rev)
    return best


def _plan_value(p1: float, pairs: list[tuple[float, int, int]], v: float) -> tuple[float, ContinuousPlan]:
    """Best continuation after first price p1 given (weight, first class, second class) beliefs."""
    rev1 = 0.0
    mass = {True: 0.0, False: 0.0}
    high = {True: 0.0, False: 0.0}
    for w, c1, c2 in pairs:
        q = _buy_prob(c1, p1, v)
        rev1 += w * q * p1
        for a1, m in ((True, w * q), (False, w * (1 - q))):
            mass[a1] += m
            high[a1] += m * (c2 == HIGH)
    total = rev1
    p2 = {}
    for a1 in (True, False):
        if mass[a1] > 0:
            p2[a1], r2 = _second_price(high[a1] / mass[a1], v)
            total += mass[a1] * r2
        else:
            p2[a1] = v / 2
    return total, ContinuousPlan(p1, p2[True], p2[False])


def best_response_pricing(s: float, params: ContinuousParams, n_grid: int = 201) -> tuple[ContinuousPlan, ContinuousPlan]:
    """Numerically optimal pricing after each signal.

    Second-period prices are optimized exactly against the updated class
    mixture; the first-period price is searched on an n_grid-point grid over
    [0, v_bar] and refined by bounded scalar minimization around the best cell.
    """
    v = params.v_bar
    q1 = s / (s + 1)
    q0 = (1 - s) / (3 - s)
    beliefs = {
        1: [(q1, HIGH, HIGH), (1 - q1, LOW, LOW)],
        0: [(q0, HIGH, HIGH), ((1 - q0) / 2, HIGH, LOW), ((1 - q0) / 2, LOW, HIGH)],
    }
    plans = {}
    grid = np.linspace(0.0, v, n_grid)
    step = grid[1] - grid[0]
    for signal, pairs in beliefs.items():
        vals = [_plan_value(p, pairs, v)[0] for p in grid]
        k = int(np.argmax(vals))
        lo, hi = max(grid[k] - step, 0.0), min(grid[k] + step, v)
        res = minimize_scalar(lambda p: -_plan_value(p, pairs, v)[0], bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * v})
        p1 = float(res.x) if -res.fun > vals[k] else float(grid[k])
        plans[signal] = _plan_value(p1, pairs, v)[1]
    return plans[1], plans[0]


def oracle_rho(params: ContinuousParams, n_grid: int = 201, tol: float = 1e-9) -> float:
    """Manipulation probability at which the high-end buyer is indifferent under best-response pricing."""

    def gap(rho: float) -> float:
        on_1, on_0 = best_response_pricing((1 - rho) ** 2, params, n_grid)
        return high_end_gap(ContinuousOutcome(None, rho, on_1, on_0), params)

    if gap(0.0) <= 0:
        return 0.0
    rhos = np.linspace(0.0, 1.0, 101)
    for a, b in zip(rhos[:-1], rhos[1:]):
        if gap(b) <= 0:
            lo, hi = a, b
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                lo, hi = (mid, hi) if gap(mid) > 0 else (lo, mid)
            return 0.5 * (lo + hi)
    return 1.0


# ---------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class ContinuousReport:
    n_samples: int
    seed: int
    revenue: Estimate
    buyer_payoff: Estimate
    low_end_payoff: Estimate


def _mc_chunk(g: np.random.Generator, m: int, outcome: ContinuousOutcome, params: ContinuousParams):
    v, l = params.v_bar, params.l
    vi, vj = g.random(m) * v, g.random(m) * v
    hi_i, hi_j = vi >= v / 2, vj >= v / 2
    man_i, man_j = g.random(m) < outcome.rho_star, g.random(m) < outcome.rho_star
    hh = hi_i & hi_j
    same = hi_i == hi_j
    x_i = np.where(hh, ~man_i, same)
    x_j = np.where(hh, ~man_j, same)
    signal = x_i & x_j
    plans = np.array([[p.p1, p.p2_buy, p.p2_no_buy] for p in (outcome.on_signal_0, outcome.on_signal_1)])
    prices = plans[signal.astype(int)]
    i_first = g.random(m) < 0.5
    v1, v2 = np.where(i_first, vi, vj), np.where(i_first, vj, vi)
    a1 = v1 >= prices[:, 0]
    p2 = np.where(a1, prices[:, 1], prices[:, 2])
    a2 = v2 >= p2
    revenue = np.where(a1, prices[:, 0], 0.0) + np.where(a2, p2, 0.0)
    s1, s2 = np.where(a1, v1 - prices[:, 0], 0.0), np.where(a2, v2 - p2, 0.0)
    table = np.array([0.0, l, 1 - l, 1.0])
    u_i = np.where(same, table[2 * x_i.astype(int) + x_j.astype(int)], 0.0)
    u_j = np.where(same, table[2 * x_j.astype(int) + x_i.astype(int)], 0.0)
    pay_i = np.where(i_first, s1, s2) + u_i
    pay_j = np.where(i_first, s2, s1) + u_j
    low_pay = np.concatenate([pay_i[~hi_i], pay_j[~hi_j]])
    return revenue, (pay_i + pay_j) / 2, low_pay


def continuous_monte_carlo(outcome: ContinuousOutcome, params: ContinuousParams, n: int, seed: int) -> ContinuousReport:
    """Simulate n plays with uniform preferences, class-based interactions and the outcome's pricing.

    Mixed-class pairs interact at 0 and so earn zero social utility whatever
    the cross-class utility levels are.
    """
    sizes = chunk_sizes(n)
    rev, pay, low = Estimate.empty(), Estimate.empty(), Estimate.empty()
    for g, m in zip(generators(seed, len(sizes)), sizes):
        r, p, lp = _mc_chunk(g, m, outcome, params)
        rev, pay, low = rev.merge(Estimate.of(r)), pay.merge(Estimate.of(p)), low.merge(Estimate.of(lp))
    return ContinuousReport(n, seed, rev, pay, low)
