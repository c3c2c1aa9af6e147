"""Command-line entry points: equilibrium queries, oracle checks and simulations."""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from socialpricing import __version__
from socialpricing.continuous import (
    ContinuousParams,
    case3_cubic,
    continuous_expected,
    continuous_monte_carlo,
    loss_from_awareness_continuous,
    oracle_rho,
    solve_continuous_pbe,
)
from socialpricing.model import MarketParams
from socialpricing.network import (
    THREADS_ENV,
    fixture_path,
    load_edge_file,
    revenue_sweep,
    sweep_grid,
)
from socialpricing.oracle import (
    GridSpec,
    brute_force_pbe,
    closest_profile,
    monte_carlo_play,
    verify_binary_pricing,
    verify_frequency_polarization,
)
from socialpricing.pbe import (
    MIXING_REGIONS,
    buyer_gap,
    classify_region,
    region_boundaries,
    seller_gap,
    solve_pbe,
    solve_pbe_nonuniform,
)
from socialpricing.welfare import strategic_payoff, strategic_revenue, welfare_report

COMMANDS = ("solve", "region", "welfare", "verify", "simulate", "continuous", "fig7")
FIG7_COLUMNS = ("v_H", "nlp_mean", "ulp_mean", "slp_mean", "slp_stderr")
SUITES = ("all", "equilibrium", "indifference", "pricing", "montecarlo", "polarization", "continuous")
WORKED_EXAMPLES = ((4.0, 3.0), (2.0, 1.2), (2.6, 1.4), (3.0, 1.5), (4.0, 1.0), (3.8, 1.9))

DEFAULTS: dict[str, Any] = {
    "vh": None,
    "vl": None,
    "l": 0.5,
    "alpha": 0.5,
    "vbar": None,
    "graph": None,
    "samples": None,
    "shuffles": 10_000,
    "seed": None,
    "output": None,
    "format": "json",
    "ratio": 0.5,
    "vh_max": 4.0,
    "steps": 20,
    "suite": "all",
    "threads": None,
}


class UsageError(Exception):
    """Invalid configuration detected after argument parsing."""


def fmt(x: float) -> str:
    """Nine significant digits, the serialization used in every output."""
    return f"{x:.9g}"


def _clean(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return float(fmt(float(value))) if math.isfinite(value) else None
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _header(cfg: dict[str, Any]) -> str:
    return f"# socialpricing {__version__} seed={cfg['seed']}\n"


def _render(record: dict[str, Any], cfg: dict[str, Any], stochastic: bool) -> str:
    record = _clean(record)
    if cfg["format"] == "json":
        if stochastic:
            record = {"version": __version__, "seed": cfg["seed"], **record}
        return json.dumps(record, indent=2, sort_keys=False) + "\n"
    flat = {k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in record.items()}
    buf = io.StringIO()
    if stochastic:
        buf.write(_header(cfg))
    buf.write(",".join(flat) + "\n")
    buf.write(",".join(fmt(v) if isinstance(v, float) else str(v) for v in flat.values()) + "\n")
    return buf.getvalue()


def _market(cfg: dict[str, Any]) -> MarketParams:
    if cfg["vh"] is None or cfg["vl"] is None:
        raise UsageError("--vh and --vl are required")
    return MarketParams(v_L=float(cfg["vl"]), v_H=float(cfg["vh"]), l=float(cfg["l"]), alpha=float(cfg["alpha"]))


def _need_seed(cfg: dict[str, Any], command: str) -> int:
    if cfg["seed"] is None:
        raise UsageError(f"'{command}' is stochastic and needs --seed")
    return int(cfg["seed"])


def cmd_solve(cfg: dict[str, Any]) -> tuple[dict[str, Any], bool]:
    params = _market(cfg)
    out = solve_pbe(params) if params.alpha == 0.5 else solve_pbe_nonuniform(params)
    return {
        "region": out.region.value,
        "rho_star": out.rho_star,
        "beta_star": out.beta_star,
        "belief_s": out.belief_s,
        "posterior_hh_given_1": out.posterior_hh_given_1,
        "posterior_hh_given_0": out.posterior_hh_given_0,
        "policy": out.policy.describe(),
    }, False


def cmd_region(cfg: dict[str, Any]) -> tuple[dict[str, Any], bool]:
    params = _market(cfg)
    region = solve_pbe_nonuniform(params).region if params.alpha != 0.5 else classify_region(params.v_H, params.v_L, params.l)
    return {"region": region.value, **region_boundaries(params.v_H, params.v_L, params.l, params.alpha)}, False


def cmd_welfare(cfg: dict[str, Any]) -> tuple[dict[str, Any], bool]:
    rep = welfare_report(_market(cfg))
    record = {k: getattr(rep, k) for k in rep.__dataclass_fields__}
    record["region"] = rep.region.value
    return record, False


@dataclass(frozen=True)
class Check:
    name: str
    epsilon: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.epsilon <= self.tolerance


def _equilibrium_checks(l: float) -> list[Check]:
    out = []
    grid = GridSpec()
    for vh, vl in WORKED_EXAMPLES:
        p = MarketParams(v_L=vl, v_H=vh, l=l)
        d_rho, d_beta = closest_profile(brute_force_pbe(p, grid), solve_pbe(p))
        out.append(Check(f"brute_force({vh},{vl})", max(d_rho, d_beta), grid.rho_step + 1e-12))
    return out


def _indifference_checks(l: float) -> list[Check]:
    out = []
    for vh, vl in WORKED_EXAMPLES:
        p = MarketParams(v_L=vl, v_H=vh, l=l)
        eq = solve_pbe(p)
        if eq.rho_star > 0:
            out.append(Check(f"buyer_gap({vh},{vl})", abs(buyer_gap(eq, p)), 1e-9))
        if eq.region in MIXING_REGIONS:
            out.append(Check(f"seller_gap({vh},{vl})", abs(seller_gap(eq, p)), 1e-9))
    return out


def _pricing_checks(l: float) -> list[Check]:
    out = []
    for vh, vl in WORKED_EXAMPLES:
        p = MarketParams(v_L=vl, v_H=vh, l=l)
        grid = tuple(np.linspace(0, vh * 1.01, 41))
        out.append(Check(f"binary_pricing({vh},{vl})", 0.0 if verify_binary_pricing(p, grid) else 1.0, 0.0))
    return out


def _montecarlo_checks(l: float, seed: int, n: int = 200_000) -> list[Check]:
    out = []
    for k, (vh, vl) in enumerate(WORKED_EXAMPLES):
        p = MarketParams(v_L=vl, v_H=vh, l=l)
        rep = monte_carlo_play(solve_pbe(p), p, n, seed + k)
        for label, est, exact in (
            ("revenue", rep.revenue, strategic_revenue(p)),
            ("payoff", rep.buyer_payoff, strategic_payoff(p)),
        ):
            se = est.stderr
            z = abs(est.mean - exact) / se if se > 0 else (0.0 if abs(est.mean - exact) < 1e-9 else math.inf)
            out.append(Check(f"mc_{label}_z({vh},{vl})", z, 4.0))
    return out


def _polarization_checks(l: float) -> list[Check]:
    p = MarketParams(v_L=1.5, v_H=3.0, l=l)
    grid = [i / 10 for i in range(11)]
    fns: dict[str, Callable[[float, float], float]] = {
        "linear": lambda x, y: (1 - l) * x + l * y,
        "sqrt": lambda x, y: (1 - l) * math.sqrt(x) + l * math.sqrt(y),
    }
    return [
        Check(f"polarization_{name}", 0.0 if verify_frequency_polarization(p, grid, fn) else 1.0, 0.0)
        for name, fn in fns.items()
    ]


def _continuous_checks(l: float) -> list[Check]:
    out = []
    for v in (5.0, 8.0, 40.0):
        cp = ContinuousParams(v_bar=v, l=l)
        rho = solve_continuous_pbe(cp).rho_star
        out.append(Check(f"continuous_rho({v})", abs(oracle_rho(cp) - rho), 1e-3))
    cp = ContinuousParams(v_bar=8.0, l=l)
    out.append(Check("case3_residual(8)", abs(case3_cubic(1 - solve_continuous_pbe(cp).rho_star, cp)), 1e-12))
    return out


def cmd_verify(cfg: dict[str, Any]) -> tuple[dict[str, Any], bool]:
    seed = _need_seed(cfg, "verify")
    suite, l = cfg["suite"], float(cfg["l"])
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    runners = {
        "equilibrium": lambda: _equilibrium_checks(l),
        "indifference": lambda: _indifference_checks(l),
        "pricing": lambda: _pricing_checks(l),
        "montecarlo": lambda: _montecarlo_checks(l, seed),
        "polarization": lambda: _polarization_checks(l),
        "continuous": lambda: _continuous_checks(l),
    }
    chosen = list(runners) if suite == "all" else [suite]
    checks = [c for name in chosen for c in runners[name]()]
    return {
        "suite": suite,
        "n_checks": len(checks),
        "max_epsilon": max(c.epsilon for c in checks),
        "all_passed": all(c.passed for c in checks),
        "checks": {c.name: {"epsilon": c.epsilon, "tolerance": c.tolerance, "passed": c.passed} for c in checks},
    }, True


def _graph(cfg: dict[str, Any]):
    return load_edge_file(cfg["graph"] or fixture_path())


def cmd_simulate(cfg: dict[str, Any]) -> tuple[dict[str, Any], bool]:
    seed = _need_seed(cfg, "simulate")
    params = _market(cfg)
    sweep = revenue_sweep(
        _graph(cfg), [params.v_H], ratio=params.ratio, l=params.l, n_shuffles=int(cfg["shuffles"]),
        seed=seed, threads=cfg["threads"],
    )
    pt = sweep.points[0]
    return {
        "v_H": pt.v_H, "v_L": params.v_L, "high_fraction": sweep.high_fraction,
        "nlp_mean": pt.nlp.mean, "nlp_stderr": pt.nlp.stderr,
        "ulp_mean": pt.ulp.mean, "ulp_stderr": pt.ulp.stderr,
        "slp_mean": pt.slp.mean, "slp_stderr": pt.slp.stderr,
    }, True


def cmd_continuous(cfg: dict[str, Any]) -> tuple[dict[str, Any], bool]:
    if cfg["vbar"] is None:
        raise UsageError("--vbar is required")
    cp = ContinuousParams(v_bar=float(cfg["vbar"]), l=float(cfg["l"]))
    out = solve_continuous_pbe(cp)
    exact = continuous_expected(out, cp)
    record: dict[str, Any] = {
        "case_id": out.case_id,
        "rho_star": out.rho_star,
        "signal_1": [out.on_signal_1.p1, out.on_signal_1.p2_buy, out.on_signal_1.p2_no_buy],
        "signal_0": [out.on_signal_0.p1, out.on_signal_0.p2_buy, out.on_signal_0.p2_no_buy],
        "revenue": exact.revenue,
        "buyer_payoff": exact.buyer_payoff,
        "loss_from_awareness": loss_from_awareness_continuous(cp),
    }
    if cfg["samples"] is None:
        return record, False
    seed = _need_seed(cfg, "continuous --samples")
    rep = continuous_monte_carlo(out, cp, int(cfg["samples"]), seed)
    record.update(mc_revenue=rep.revenue.mean, mc_revenue_stderr=rep.revenue.stderr)
    return record, True


def fig7_csv(cfg: dict[str, Any]) -> str:
    seed = _need_seed(cfg, "fig7")
    sweep = revenue_sweep(
        _graph(cfg), sweep_grid(float(cfg["vh_max"]), int(cfg["steps"])), ratio=float(cfg["ratio"]),
        l=float(cfg["l"]), n_shuffles=int(cfg["shuffles"]), seed=seed, threads=cfg["threads"],
    )
    buf = io.StringIO()
    buf.write(_header(cfg))
    buf.write(",".join(FIG7_COLUMNS) + "\n")
    for p in sweep.points:
        buf.write(",".join(fmt(x) for x in (p.v_H, p.nlp.mean, p.ulp.mean, p.slp.mean, p.slp.stderr)) + "\n")
    return buf.getvalue()


HANDLERS = {
    "solve": cmd_solve,
    "region": cmd_region,
    "welfare": cmd_welfare,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "continuous": cmd_continuous,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socialpricing", description=__doc__)
    parser.add_argument("--version", action="version", version=f"socialpricing {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="YAML or JSON file of option values; flags override it")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--l", type=float, help="social loss parameter")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or CPU count)")
    market = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    market.add_argument("--vh", type=float, help="high willingness to pay")
    market.add_argument("--vl", type=float, help="low willingness to pay")
    market.add_argument("--alpha", type=float, help="prior probability of the high preference")
    graph = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    graph.add_argument("--graph", help="edge-list file (default: bundled 100-node fixture)")
    graph.add_argument("--shuffles", type=int, help="replications per point")

    sub.add_parser("solve", parents=[common, market], help="equilibrium of the two-buyer game")
    sub.add_parser("region", parents=[common, market], help="region label and boundary distances")
    sub.add_parser("welfare", parents=[common, market], help="revenues, payoffs and comparisons")
    verify = sub.add_parser("verify", parents=[common], help="run the oracle suite")
    verify.add_argument("--suite", choices=SUITES, default=argparse.SUPPRESS)
    sub.add_parser("simulate", parents=[common, market, graph], help="NLP/ULP/SLP on a social graph")
    cont = sub.add_parser("continuous", parents=[common], help="continuous-preference equilibrium")
    cont.add_argument("--vbar", type=float, default=argparse.SUPPRESS)
    cont.add_argument("--samples", type=int, default=argparse.SUPPRESS, help="also run a Monte-Carlo check")
    fig7 = sub.add_parser("fig7", parents=[common, graph], help="revenue curve over v_H as CSV")
    fig7.add_argument("--ratio", type=float, default=argparse.SUPPRESS)
    fig7.add_argument("--vh-max", dest="vh_max", type=float, default=argparse.SUPPRESS)
    fig7.add_argument("--steps", type=int, default=argparse.SUPPRESS)
    return parser


def load_config(path: str) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a mapping of option names to values")
    data = {str(k).replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def resolve(ns: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, config file and flags (flags win)."""
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    cfg = dict(DEFAULTS)
    if getattr(ns, "config", None):
        cfg.update(load_config(ns.config))
    cfg.update(flags)
    if cfg["samples"] is not None and int(cfg["samples"]) < 1:
        raise UsageError("--samples must be at least 1")
    if int(cfg["shuffles"]) < 1:
        raise UsageError("--shuffles must be at least 1")
    if cfg["threads"] is not None and int(cfg["threads"]) < 1:
        raise UsageError("--threads must be at least 1")
    return cfg


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(ns)
        if ns.command == "fig7":
            text, ok = fig7_csv(cfg), True
        else:
            record, stochastic = HANDLERS[ns.command](cfg)
            text = _render(record, cfg, stochastic)
            ok = record.get("all_passed", True)
        if cfg["output"]:
            with open(cfg["output"], "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (UsageError, ValueError, OSError, yaml.YAMLError) as exc:
        print(f"socialpricing {ns.command}: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    return 0 if ok else 1


def main() -> None:
    sys.exit(run_cli())
