"""Multi-buyer social graphs, manipulation profiles and the NLP/ULP/SLP pricing mechanisms."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, TextIO

import numpy as np
from numba import njit

from socialpricing.benchmarks import no_learning_price
from socialpricing.model import MarketParams, Plan
from socialpricing.pbe import Region, solve_pbe
from socialpricing.stats import Estimate

THREADS_ENV = "SOCIALPRICING_THREADS"
UNKNOWN, LOW, HIGH = -1, 0, 1
TIE_TOL = 1e-12
BLOCK = 1000

MODE_NLP, MODE_ULP, MODE_SLP = 0, 1, 2


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Undirected simple graph with per-node preferences, known flags and edge signals.

    Attributes:
        labels: Original node id of each compact index.
        edges: (m, 2) array of node index pairs with u < v.
        preference: Per-node HIGH/LOW, or UNKNOWN before sampling.
        known: Whether the seller already knows the node's preference.
        realized: Observed common frequency per edge; None means truthful.
        withheld: (m, 2) flags for an endpoint choosing frequency 0 against homophily.
    """

    labels: np.ndarray
    edges: np.ndarray
    preference: np.ndarray
    known: np.ndarray
    realized: np.ndarray | None = None
    withheld: np.ndarray | None = None

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loops are not allowed")
        if edges.size and (edges.min() < 0 or edges.max() >= self.n_nodes):
            raise ValueError("edge endpoint out of range")
        object.__setattr__(self, "edges", _frozen(edges))
        for name, dtype in (("labels", np.int64), ("preference", np.int8), ("known", bool)):
            a = np.asarray(getattr(self, name), dtype=dtype)
            if a.shape != (self.n_nodes,):
                raise ValueError(f"{name} must have one entry per node")
            object.__setattr__(self, name, _frozen(a.copy()))
        if self.realized is not None:
            r = np.asarray(self.realized, dtype=np.int8)
            if r.shape != (self.n_edges,):
                raise ValueError("realized must have one entry per edge")
            object.__setattr__(self, "realized", _frozen(r.copy()))
        if self.withheld is not None:
            w = np.asarray(self.withheld, dtype=bool)
            if w.shape != (self.n_edges, 2):
                raise ValueError("withheld must be an (m, 2) array")
            object.__setattr__(self, "withheld", _frozen(w.copy()))

    @property
    def n_nodes(self) -> int:
        return int(np.asarray(self.labels).shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def mean_degree(self) -> float:
        return 2 * self.n_edges / self.n_nodes if self.n_nodes else 0.0

    @property
    def populated(self) -> bool:
        return bool(np.all(self.preference != UNKNOWN))

    @property
    def unknown_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.known)

    def truthful(self) -> np.ndarray:
        """Homophily signal: 1 iff the endpoint preferences are equal."""
        if not self.populated:
            raise ValueError("preferences are not assigned")
        p = self.preference
        return (p[self.edges[:, 0]] == p[self.edges[:, 1]]).astype(np.int8)

    def observed(self) -> np.ndarray:
        return self.truthful() if self.realized is None else self.realized

    def with_known(self, nodes: Iterable[int]) -> SocialGraph:
        known = np.zeros(self.n_nodes, dtype=bool)
        known[list(nodes)] = True
        return replace(self, known=known, realized=None, withheld=None)

    def component_sizes(self) -> np.ndarray:
        return np.bincount(np.unique(_components(self.n_nodes, self.edges), return_inverse=True)[1])


def _components(n: int, edges: np.ndarray) -> np.ndarray:
    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    return np.array([find(x) for x in range(n)], dtype=np.int64)


def load_edge_list(stream: TextIO) -> SocialGraph:
    """Parse a whitespace-separated edge list; '#' lines are comments.

    Duplicate and reversed edges collapse; ids are compacted to 0..n-1 in sorted order.
    """
    pairs: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ValueError(f"line {lineno}: expected two nonnegative integer ids, got {line!r}")
        u, v = int(parts[0]), int(parts[1])
        if u == v:
            raise ValueError(f"line {lineno}: self-loop on node {u}")
        pairs.add((min(u, v), max(u, v)))
    labels = np.array(sorted({x for e in pairs for x in e}), dtype=np.int64)
    index = {int(x): i for i, x in enumerate(labels)}
    edges = np.array(sorted((index[u], index[v]) for u, v in pairs), dtype=np.int64).reshape(-1, 2)
    n = labels.size
    return SocialGraph(labels, edges, np.full(n, UNKNOWN, dtype=np.int8), np.zeros(n, dtype=bool))


def load_edge_file(path: str | os.PathLike) -> SocialGraph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh)


def fixture_path() -> str:
    from importlib.resources import files

    return str(files("socialpricing") / "data" / "fixture.edges")


def sample_preferences(graph: SocialGraph, alpha: float, seed: int | np.random.SeedSequence) -> SocialGraph:
    """Independent High draw with probability alpha per node; clears any manipulation."""
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    rng = np.random.default_rng(seed)
    pref = np.where(rng.random(graph.n_nodes) < alpha, HIGH, LOW).astype(np.int8)
    return replace(graph, preference=pref, realized=None, withheld=None)


class MechanismKind(Enum):
    NLP = "NLP"
    ULP = "ULP"
    SLP = "SLP"


@dataclass(frozen=True, eq=False)
class ArrivalSequence:
    """Order in which the unknown buyers are served."""

    order: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", _frozen(np.asarray(self.order, dtype=np.int64).copy()))

    @classmethod
    def random(cls, graph: SocialGraph, seed: int | np.random.Generator) -> ArrivalSequence:
        rng = np.random.default_rng(seed)
        return cls(rng.permutation(graph.unknown_nodes))

    def validate(self, graph: SocialGraph) -> None:
        expected = graph.unknown_nodes
        if self.order.size != expected.size or not np.array_equal(np.sort(self.order), expected):
            raise ValueError("arrival sequence must be a permutation of the unknown buyers")


def no_gain_condition(n_unknown: int, k_max: int, params: MarketParams) -> bool:
    """N/(N+1) v_H < v_L < v_H - K(1-l): known High buyers give the seller nothing."""
    if n_unknown < 1 or k_max < 1:
        raise ValueError("need n_unknown >= 1 and k_max >= 1")
    return (
        n_unknown / (n_unknown + 1) * params.v_H < params.v_L
        and params.v_L < params.v_H - k_max * (1 - params.l)
    )


def _known_high_degree(graph: SocialGraph) -> int:
    """Largest number of known High neighbours of any unknown buyer."""
    e = graph.edges
    counts = np.zeros(graph.n_nodes, dtype=np.int64)
    kh = graph.known & (graph.preference == HIGH)
    for a, b in ((0, 1), (1, 0)):
        hit = kh[e[:, b]] & ~graph.known[e[:, a]]
        np.add.at(counts, e[hit, a], 1)
    return int(counts.max()) if counts.size else 0


def known_high_profile_active(graph: SocialGraph, params: MarketParams) -> bool:
    """Whether the known-High concealment profile is an equilibrium on this graph."""
    k = _known_high_degree(graph)
    n = int((~graph.known).sum())
    return k >= 1 and n >= 1 and no_gain_condition(n, k, params)


def _concealed_edges(graph: SocialGraph) -> np.ndarray:
    """Edges joining an unknown buyer to a known High buyer."""
    e, kh = graph.edges, graph.known & (graph.preference == HIGH)
    unk = ~graph.known
    return (unk[e[:, 0]] & kh[e[:, 1]]) | (kh[e[:, 0]] & unk[e[:, 1]])


def apply_manipulation(graph: SocialGraph, params: MarketParams, seed: int | np.random.Generator) -> SocialGraph:
    """Draw equilibrium manipulation: each unknown High endpoint of a High-High edge
    withholds with probability rho*; unknown High buyers conceal ties to known High
    buyers when the no-gain condition holds. All other edges stay honest."""
    if not graph.populated:
        raise ValueError("preferences are not assigned")
    rho = solve_pbe(params).rho_star
    rng = np.random.default_rng(seed)
    withheld = rng.random((graph.n_edges, 2)) < rho
    return _manipulated(graph, params, withheld)


def _withheld(graph: SocialGraph, params: MarketParams, draws: np.ndarray) -> np.ndarray:
    """Endpoint withholding flags from Bernoulli draws of shape (..., m, 2)."""
    e, known = graph.edges, graph.known
    high = graph.preference == HIGH
    hh = high[e[:, 0]] & high[e[:, 1]]
    withheld = draws & (hh & ~known[e[:, 0]] & ~known[e[:, 1]])[:, None]
    if known_high_profile_active(graph, params):
        conceal = _concealed_edges(graph) & hh
        withheld |= (conceal[:, None] & ~known[e])
    return withheld


def _manipulated(graph: SocialGraph, params: MarketParams, draws: np.ndarray) -> SocialGraph:
    withheld = _withheld(graph, params, draws)
    realized = graph.truthful() & ~withheld.any(axis=1)
    return replace(graph, realized=realized.astype(np.int8), withheld=withheld)


@dataclass(frozen=True, eq=False)
class MechanismResult:
    """Outcome of serving every unknown buyer once.

    Attributes:
        revenue: Sum of accepted prices.
        prices: Price offered to each node (NaN for known buyers).
        payoffs: Purchase surplus plus social utility summed over incident edges.
    """

    revenue: float
    prices: np.ndarray
    payoffs: np.ndarray


@dataclass(frozen=True)
class _SellerRule:
    mode: int
    s: float
    cluster_low_weight: float
    single_low_weight: float
    tie_high_weight: float
    ignore_known_high: bool


def _seller_rule(graph: SocialGraph, kind: MechanismKind, params: MarketParams) -> _SellerRule:
    if kind is MechanismKind.NLP:
        return _SellerRule(MODE_NLP, 1.0, 1.0, 1.0, 1.0, False)
    if kind is MechanismKind.ULP:
        return _SellerRule(MODE_ULP, 1.0, 0.0, 0.0, 1.0, False)
    if known_high_profile_active(graph, params):
        return _SellerRule(MODE_SLP, 1.0, 1.0, 1.0, 1.0, True)
    out = solve_pbe(params)
    low1 = out.policy.weight(1, Plan.UNIFORM_LOW)
    low0 = out.policy.weight(0, Plan.UNIFORM_LOW)
    tie = out.policy.weight(0, Plan.UNIFORM_HIGH) if out.region is Region.V else 1.0
    return _SellerRule(MODE_SLP, out.belief_s, low1, low0, tie, False)


def _csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = edges.shape[0]
    ends = np.concatenate([edges[:, 0], edges[:, 1]])
    other = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(m), np.arange(m)])
    order = np.argsort(ends, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(ends, minlength=n), out=indptr[1:])
    return indptr, other[order].astype(np.int64), eid[order].astype(np.int64)


@dataclass(frozen=True, eq=False)
class _Prepared:
    indptr: np.ndarray
    nbr: np.ndarray
    eid: np.ndarray
    ignore: np.ndarray
    known_type: np.ndarray
    is_high: np.ndarray
    comp_size: np.ndarray
    rule: _SellerRule
    v_H: float
    v_L: float
    alpha: float
    nlp_price: float


def _prepare(graph: SocialGraph, kind: MechanismKind, params: MarketParams) -> _Prepared:
    if not graph.populated:
        raise ValueError("preferences are not assigned")
    rule = _seller_rule(graph, kind, params)
    ignore = _concealed_edges(graph) if rule.ignore_known_high else np.zeros(graph.n_edges, dtype=bool)
    unk = ~graph.known
    e = graph.edges
    inner = e[unk[e[:, 0]] & unk[e[:, 1]]]
    comp = _components(graph.n_nodes, inner)
    sizes = np.bincount(comp, weights=unk.astype(float), minlength=graph.n_nodes)[comp].astype(np.int64)
    indptr, nbr, eid = _csr(graph.n_nodes, e)
    known_type = np.where(graph.known, graph.preference, UNKNOWN).astype(np.int8)
    return _Prepared(
        indptr, nbr, eid, ignore, known_type, graph.preference == HIGH, sizes, rule,
        params.v_H, params.v_L, params.alpha, no_learning_price(params),
    )


@njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _settle(root, t, state, h0, members_ptr, members, cl, indptr, nbr, eid, ignore, xhat, s, queue):
    """Fix a cluster's type and push consequences across 0-signal edges (BFS)."""
    state[root] = t
    head = 0
    tail = 0
    queue[tail] = root
    tail += 1
    while head < tail:
        c = queue[head]
        head += 1
        tc = state[c]
        for k in range(members_ptr[c], members_ptr[c + 1]):
            u = members[k]
            for q in range(indptr[u], indptr[u + 1]):
                e = eid[q]
                if ignore[e] or xhat[e] == 1:
                    continue
                d = cl[nbr[q]]
                if d == c or state[d] >= 0:
                    continue
                if tc == 0:
                    state[d] = 1
                    queue[tail] = d
                    tail += 1
                elif s >= 1.0:
                    state[d] = 0
                    queue[tail] = d
                    tail += 1
                else:
                    h0[d] += 1


@njit(cache=True, nogil=True)
def _serve(
    indptr, nbr, eid, ignore, xhat, known_type, is_high, comp_size, order, unif,
    mode, s, cluster_low, single_low, tie_high, v_H, v_L, alpha, nlp_price, prices,
):
    """Serve the arrivals in order; fill offered prices and return revenue."""
    n = known_type.shape[0]
    revenue = 0.0
    if mode == 0:
        for t in range(order.shape[0]):
            i = order[t]
            prices[i] = nlp_price
            if (v_H if is_high[i] else v_L) >= nlp_price:
                revenue += nlp_price
        return revenue
    parent = np.arange(n)
    for u in range(n):
        for q in range(indptr[u], indptr[u + 1]):
            e = eid[q]
            v = nbr[q]
            if v > u and xhat[e] == 1 and not ignore[e]:
                ru = _find(parent, u)
                rv = _find(parent, v)
                if ru != rv:
                    parent[max(ru, rv)] = min(ru, rv)
    cl = np.empty(n, np.int64)
    for u in range(n):
        cl[u] = _find(parent, u)
    size = np.zeros(n, np.int64)
    e1 = np.zeros(n, np.int64)
    z = np.zeros(n, np.int64)
    for u in range(n):
        size[cl[u]] += 1
        for q in range(indptr[u], indptr[u + 1]):
            v = nbr[q]
            e = eid[q]
            if v > u and not ignore[e] and cl[v] == cl[u]:
                if xhat[e] == 1:
                    e1[cl[u]] += 1
                else:
                    z[cl[u]] += 1
    members_ptr = np.zeros(n + 1, np.int64)
    for u in range(n):
        members_ptr[cl[u] + 1] += 1
    for c in range(n):
        members_ptr[c + 1] += members_ptr[c]
    fill = members_ptr[:-1].copy()
    members = np.empty(n, np.int64)
    for u in range(n):
        members[fill[cl[u]]] = u
        fill[cl[u]] += 1
    state = np.full(n, -1, np.int8)
    plan = np.full(n, -1, np.int8)
    h0 = np.zeros(n, np.int64)
    queue = np.empty(n, np.int64)
    for u in range(n):
        c = cl[u]
        if state[c] < 0:
            if known_type[u] >= 0:
                _settle(c, known_type[u], state, h0, members_ptr, members, cl, indptr, nbr, eid, ignore, xhat, s, queue)
            elif z[c] > 0 and s < 1.0:
                _settle(c, 1, state, h0, members_ptr, members, cl, indptr, nbr, eid, ignore, xhat, s, queue)
    ratio = v_L / v_H
    prior_odds = alpha / (1.0 - alpha)
    for t in range(order.shape[0]):
        i = order[t]
        c = cl[i]
        if state[c] >= 0:
            p = v_H if state[c] == 1 else v_L
        elif mode == 1:
            nc = comp_size[i]
            if nc <= 1:
                p = nlp_price
            elif ratio < nc / (nc + 1.0):
                p = v_H
            else:
                p = v_L
        elif h0[c] == 0:
            if plan[c] < 0:
                w = cluster_low if size[c] >= 2 else single_low
                plan[c] = 0 if unif[t] < w else 1
            p = v_L if plan[c] == 0 else v_H
        else:
            odds = prior_odds * s ** e1[c] * (1.0 - s) ** h0[c]
            gap = odds / (1.0 + odds) * v_H - v_L
            if abs(gap) <= TIE_TOL * v_H:
                p = v_H if unif[t] < tie_high else v_L
            elif gap > 0:
                p = v_H
            else:
                p = v_L
        prices[i] = p
        bought = (v_H if is_high[i] else v_L) >= p
        if bought:
            revenue += p
        if state[c] < 0 and p == v_H:
            _settle(c, 1 if bought else 0, state, h0, members_ptr, members, cl, indptr, nbr, eid, ignore, xhat, s, queue)
    return revenue


def _serve_prepared(prep: _Prepared, xhat: np.ndarray, order: np.ndarray, unif: np.ndarray, prices: np.ndarray) -> float:
    r = prep.rule
    return _serve(
        prep.indptr, prep.nbr, prep.eid, prep.ignore, xhat, prep.known_type, prep.is_high, prep.comp_size,
        order, unif, r.mode, r.s, r.cluster_low_weight, r.single_low_weight, r.tie_high_weight,
        prep.v_H, prep.v_L, prep.alpha, prep.nlp_price, prices,
    )


def _social_payoffs(graph: SocialGraph, params: MarketParams) -> np.ndarray:
    """Per-node social utility summed over incident edges, from directed frequencies."""
    e, pref = graph.edges, graph.preference
    same = pref[e[:, 0]] == pref[e[:, 1]]
    x = np.repeat(same[:, None], 2, axis=1).astype(int)
    if graph.withheld is not None:
        x = x & ~graph.withheld
    table_same = np.array([0.0, params.l, 1 - params.l, 1.0])
    table_diff = np.array([0.0, -params.r, -params.c + params.r, -params.c])
    out = np.zeros(graph.n_nodes)
    for a, b in ((0, 1), (1, 0)):
        idx = 2 * x[:, a] + x[:, b]
        np.add.at(out, e[:, a], np.where(same, table_same[idx], table_diff[idx]))
    return out


def run_mechanism(
    graph: SocialGraph,
    kind: MechanismKind,
    arrivals: ArrivalSequence,
    params: MarketParams,
    seed: int = 0,
) -> MechanismResult:
    """Serve every unknown buyer once under the given mechanism.

    ULP reads the truthful signals; SLP reads the realized (possibly manipulated) ones.
    The seed drives only the seller's own randomization.
    """
    arrivals.validate(graph)
    prep = _prepare(graph, kind, params)
    xhat = graph.truthful() if kind is MechanismKind.ULP else graph.observed()
    unif = np.random.default_rng(seed).random(arrivals.order.size)
    prices = np.full(graph.n_nodes, np.nan)
    revenue = _serve_prepared(prep, np.ascontiguousarray(xhat), arrivals.order, unif, prices)
    value = np.where(graph.preference == HIGH, params.v_H, params.v_L)
    surplus = np.where(np.isnan(prices), 0.0, np.maximum(value - np.nan_to_num(prices), 0.0))
    return MechanismResult(revenue, _frozen(prices), _frozen(surplus + _social_payoffs(graph, params)))


@dataclass(frozen=True)
class BatchResult:
    """Per-mechanism revenue estimates over independent replications."""

    nlp: Estimate
    ulp: Estimate
    slp: Estimate


@njit(cache=True, nogil=True)
def _serve_rows(
    indptr, nbr, eid, ignore, xhat_rows, known_type, is_high, comp_size, orders, unifs,
    mode, s, cluster_low, single_low, tie_high, v_H, v_L, alpha, nlp_price, out,
):
    prices = np.empty(known_type.shape[0])
    for r in range(orders.shape[0]):
        out[r] = _serve(
            indptr, nbr, eid, ignore, xhat_rows[r], known_type, is_high, comp_size, orders[r], unifs[r],
            mode, s, cluster_low, single_low, tie_high, v_H, v_L, alpha, nlp_price, prices,
        )


def _block(prep_map, graph, params, rho, seq) -> dict[MechanismKind, np.ndarray]:
    """One block of replications drawn from its own seed stream."""
    rng = np.random.default_rng(seq)
    unk = graph.unknown_nodes
    orders = rng.permuted(np.tile(unk, (BLOCK, 1)), axis=1)
    unifs = rng.random((BLOCK, unk.size))
    draws = rng.random((BLOCK, graph.n_edges, 2)) < rho
    truth = graph.truthful()
    manip = (truth & ~_withheld(graph, params, draws).any(axis=2)).astype(np.int8)
    truth_rows = np.broadcast_to(truth, manip.shape)
    out = {}
    for kind, prep in prep_map.items():
        rows = manip if kind is MechanismKind.SLP else truth_rows
        res = np.empty(BLOCK)
        r = prep.rule
        _serve_rows(
            prep.indptr, prep.nbr, prep.eid, prep.ignore, rows, prep.known_type, prep.is_high, prep.comp_size,
            orders, unifs, r.mode, r.s, r.cluster_low_weight, r.single_low_weight, r.tie_high_weight,
            prep.v_H, prep.v_L, prep.alpha, prep.nlp_price, res,
        )
        out[kind] = res
    return out


def simulate_mechanisms(
    graph: SocialGraph,
    params: MarketParams,
    n_shuffles: int,
    seed: int | np.random.SeedSequence,
    threads: int | None = None,
) -> BatchResult:
    """Revenue of NLP, ULP and SLP over replications of arrival order, manipulation
    and seller randomization on fixed preferences.

    Replications come in fixed blocks with their own seed streams, so results are
    identical for any thread count.
    """
    if n_shuffles < 1:
        raise ValueError("need at least one replication")
    rho = solve_pbe(params).rho_star
    prep_map = {k: _prepare(graph, k, params) for k in MechanismKind}
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seqs = root.spawn(-(-n_shuffles // BLOCK))
    with ThreadPoolExecutor(max_workers=min(threads or default_threads(), len(seqs))) as pool:
        parts = list(pool.map(lambda q: _block(prep_map, graph, params, rho, q), seqs))
    est = {k: Estimate.of(np.concatenate([p[k] for p in parts])[:n_shuffles]) for k in MechanismKind}
    return BatchResult(est[MechanismKind.NLP], est[MechanismKind.ULP], est[MechanismKind.SLP])


@dataclass(frozen=True)
class SweepPoint:
    v_H: float
    nlp: Estimate
    ulp: Estimate
    slp: Estimate

    @property
    def ulp_gain(self) -> float:
        return self.ulp.mean / self.nlp.mean - 1

    @property
    def slp_gain(self) -> float:
        return self.slp.mean / self.nlp.mean - 1

    @property
    def slp_loss(self) -> float:
        return 1 - self.slp.mean / self.ulp.mean


@dataclass(frozen=True)
class Sweep:
    """Three-mechanism revenue curve over a grid of v_H at fixed v_L/v_H."""

    ratio: float
    l: float
    seed: int
    high_fraction: float
    points: tuple[SweepPoint, ...] = field(default_factory=tuple)

    def mean_ulp_gain(self) -> float:
        return float(np.mean([p.ulp_gain for p in self.points]))

    def mean_slp_gain(self) -> float:
        return float(np.mean([p.slp_gain for p in self.points]))

    def mean_slp_loss(self) -> float:
        return float(np.mean([p.slp_loss for p in self.points]))


def sweep_grid(vh_max: float, steps: int) -> np.ndarray:
    """v_H = vh_max * i / steps for i = 1..steps (v_H = 0 is degenerate)."""
    if steps < 1 or vh_max <= 0:
        raise ValueError("need steps >= 1 and vh_max > 0")
    return vh_max * np.arange(1, steps + 1) / steps


def revenue_sweep(
    graph: SocialGraph,
    vh_values: Iterable[float],
    ratio: float = 0.5,
    l: float = 0.5,
    n_shuffles: int = 10_000,
    seed: int = 0,
    alpha: float = 0.5,
    threads: int | None = None,
) -> Sweep:
    """Draw preferences once from the seed, then simulate every v_H point."""
    vh_values = list(vh_values)
    pref_seed, *point_seeds = np.random.SeedSequence(seed).spawn(1 + len(vh_values))
    populated = sample_preferences(graph, alpha, pref_seed) if not graph.populated else graph
    points = []
    for vh, ss in zip(vh_values, point_seeds):
        params = MarketParams(v_L=ratio * vh, v_H=vh, l=l)
        res = simulate_mechanisms(populated, params, n_shuffles, ss, threads)
        points.append(SweepPoint(float(vh), res.nlp, res.ulp, res.slp))
    frac = float(np.mean(populated.preference == HIGH))
    return Sweep(ratio, l, seed, frac, tuple(points))


@dataclass(frozen=True)
class ThreeBuyerCase:
    """One pure-strategy equilibrium with a known High buyer k and unknown buyers i, j.

    Frequencies are directed (x_ab is a's frequency toward b). Signal triples are
    ordered (x_ij, x_ik, x_jk); prices map each triple to the listed per-buyer prices.
    """

    case: str
    condition: str
    mixed_profile: tuple[tuple[str, int], ...]
    high_high_profile: tuple[tuple[str, int], ...]
    prices: tuple[tuple[tuple[int, int, int], tuple[tuple[str, float], ...]], ...]


def three_buyer_pbe_known_high(params: MarketParams) -> list[ThreeBuyerCase]:
    """Pure-strategy equilibria of the triangle with one known High buyer (v_i <= v_j)."""
    hi, lo, k = params.v_H, params.v_L, 1 - params.l
    d, ratio = hi - lo, params.ratio
    both_low = (("1", lo), ("2", lo))
    only_i = (("i", lo),)
    cases = []
    if d >= 2 * k and ratio >= 1 / 3:
        cases.append(ThreeBuyerCase(
            "I", "v_H - v_L >= 2(1-l) and v_L/v_H >= 1/3",
            (("x_jk", 1),), (("x_ij", 1), ("x_ik", 1), ("x_ji", 0), ("x_jk", 0)),
            (((1, 0, 0), both_low), ((0, 0, 1), only_i)),
        ))
    if d < 2 * k:
        cases.append(ThreeBuyerCase(
            "II", "v_H - v_L < 2(1-l)",
            (("x_jk", 1),), (("x_ij", 1), ("x_ik", 1), ("x_ji", 1), ("x_jk", 1)),
            (((1, 0, 0), both_low), ((0, 0, 1), only_i), ((1, 1, 1), (("1", hi), ("2", hi)))),
        ))
    if d > k and ratio > 2 / 3:
        cond = "v_H - v_L > 1-l and v_L/v_H > 2/3"
        cases.append(ThreeBuyerCase(
            "III", cond,
            (("x_jk", 1),), (("x_ij", 1), ("x_ji", 1), ("x_ik", 0), ("x_jk", 0)),
            (((1, 0, 0), both_low), ((0, 0, 1), only_i)),
        ))
        cases.append(ThreeBuyerCase(
            "IV", cond,
            (("x_jk", 0),), (("x_ij", 1), ("x_ik", 1), ("x_ji", 1), ("x_jk", 1)),
            (((1, 0, 0), both_low), ((0, 0, 0), both_low)),
        ))
        cases.append(ThreeBuyerCase(
            "V", cond,
            (("x_jk", 0),), (("x_ij", 1), ("x_ji", 1), ("x_ik", 0), ("x_jk", 0)),
            (((1, 0, 0), both_low), ((0, 0, 0), both_low)),
        ))
    return cases
