"""Command-line front end.

Subcommands: solve, benchmark, verify, oracle, simulate, sweep, fit-dist,
report.  Runs are driven by a JSON config file with flag overrides, and all
artifacts (CSV menus, JSON metadata, PNG figures) are byte-stable across
repeated runs with the same inputs.

Exit codes: 0 success, 1 config error, 2 infeasible or missing artifact,
3 internal numeric failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .benchmark import solve_full_info, information_cost
from .contracts import ContractMenu, ModelParams, verify as verify_menu
from .distributions import (DomainError, FitError, NumericError,
                            TypeDistribution, fit_exponential,
                            load_histogram_csv)
from .ironing import solve_general
from .marketsim import SimConfig, TieBreak, simulate as run_sim
from .oracle import (adversarial_probe, discretize, menu_profit_on_instance,
                     solve_discrete)
from .regular import InfeasibleError, solve_regular
from .report import write_report

EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERIC = 3


def _fail(code: int, message: str):
    click.echo(json.dumps({"error": message}), err=True)
    sys.exit(code)


def _load_config(config, a, sigma, qbar, dist, seed, out):
    cfg = {}
    if config:
        try:
            cfg = json.loads(Path(config).read_text())
        except FileNotFoundError:
            _fail(EXIT_CONFIG, f"config file not found: {config}")
        except json.JSONDecodeError as e:
            _fail(EXIT_CONFIG, f"config parse error: {e}")
    p = dict(cfg.get("params", {}))
    if a is not None:
        p["a"] = a
    if sigma is not None:
        p["sigma"] = sigma
    if qbar is not None:
        p["q_bar"] = qbar
    d = cfg.get("dist")
    if dist:
        try:
            d = json.loads(Path(dist).read_text())
        except FileNotFoundError:
            _fail(EXIT_CONFIG, f"distribution file not found: {dist}")
        except json.JSONDecodeError as e:
            _fail(EXIT_CONFIG, f"distribution parse error: {e}")
    if seed is not None:
        cfg["seed"] = seed
    if out:
        cfg["out"] = out
    cfg.setdefault("out", ".")
    if d is None:
        _fail(EXIT_CONFIG, "no distribution given (config 'dist' or --dist)")
    try:
        distribution = TypeDistribution.from_spec(d)
        p.setdefault("delta_lo", distribution.delta_lo)
        p.setdefault("delta_hi", distribution.delta_hi)
        params = ModelParams(**p)
    except (DomainError, TypeError, KeyError, ValueError) as e:
        _fail(EXIT_CONFIG, f"invalid parameters: {e}")
    return params, distribution, cfg


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


_shared = [
    click.option("--config", type=click.Path(), default=None),
    click.option("--a", type=float, default=None),
    click.option("--sigma", type=float, default=None),
    click.option("--qbar", type=float, default=None),
    click.option("--dist", type=click.Path(), default=None),
    click.option("--seed", type=int, default=None),
    click.option("--out", type=click.Path(), default=None),
]


def shared_options(fn):
    for opt in reversed(_shared):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Contract menus for QoS-differentiated sensing services."""


def _solve_routed(params, dist):
    reg = dist.regularity_check()
    if reg.regular and not reg.fully_pooling:
        sol = solve_regular(params, dist)
        return sol.menu, {"reputation_binding": sol.reputation_binding}
    sol = solve_general(params, dist)
    return sol.menu, {"reputation_binding": True,
                      "interval_certificates": [list(c) for c in
                                                sol.interval_certificates]}


@main.command()
@shared_options
def solve(config, a, sigma, qbar, dist, seed, out):
    """Solve the hidden-information contract design and verify it."""
    params, d, cfg = _load_config(config, a, sigma, qbar, dist, seed, out)
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        menu, extra = _solve_routed(params, d)
    except InfeasibleError as e:
        _fail(EXIT_INFEASIBLE, str(e))
    except (NumericError, FloatingPointError, OverflowError) as e:
        _fail(EXIT_NUMERIC, str(e))
    menu.to_csv(outdir / "menu.csv")
    meta = menu.meta()
    meta.update(extra)
    _write_json(outdir / "menu.meta.json", meta)
    rep = verify_menu(params, d, menu)
    _write_json(outdir / "verification.json", json.loads(rep.to_json()))
    sys.exit(0 if rep.passes() else EXIT_NUMERIC)


@main.command()
@shared_options
def benchmark(config, a, sigma, qbar, dist, seed, out):
    """Solve the observable-type benchmark and the information cost."""
    params, d, cfg = _load_config(config, a, sigma, qbar, dist, seed, out)
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        sol = solve_full_info(params, d)
        cost_gap = information_cost(params, d)
    except InfeasibleError as e:
        _fail(EXIT_INFEASIBLE, str(e))
    except (NumericError, FloatingPointError, OverflowError) as e:
        _fail(EXIT_NUMERIC, str(e))
    sol.menu.to_csv(outdir / "benchmark_menu.csv")
    _write_json(outdir / "benchmark.meta.json",
                {"beta": sol.beta, "information_cost": cost_gap})
    sys.exit(0)


@main.command()
@shared_options
@click.option("--menu", "menu_path", type=click.Path(), required=True)
def verify(config, a, sigma, qbar, dist, seed, out, menu_path):
    """Re-verify a saved menu CSV against the model constraints."""
    params, d, cfg = _load_config(config, a, sigma, qbar, dist, seed, out)
    try:
        menu = ContractMenu.from_csv(menu_path)
    except FileNotFoundError:
        _fail(EXIT_INFEASIBLE, f"menu file not found: {menu_path}")
    rep = verify_menu(params, d, menu)
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "verification.json", json.loads(rep.to_json()))
    click.echo(rep.to_json())
    sys.exit(0 if rep.passes() else EXIT_NUMERIC)


@main.command()
@shared_options
@click.option("--m", "m", type=int, default=128, show_default=True)
@click.option("--trials", type=int, default=10_000, show_default=True)
def oracle(config, a, sigma, qbar, dist, seed, out, m, trials):
    """Cross-check the analytic menu against the discrete brute-force solve."""
    params, d, cfg = _load_config(config, a, sigma, qbar, dist, seed, out)
    try:
        # The discrete instance renormalizes the type masses over the support,
        # so the analytic menu must be solved on the matching renormalized
        # distribution for the profit comparison to be apples to apples.
        spec = d.to_spec()
        spec["renormalize"] = True
        d_norm = TypeDistribution.from_spec(spec)
        menu, _ = _solve_routed(params, d_norm)
        inst = discretize(params, d, m)
        disc = solve_discrete(inst)
        analytic = menu_profit_on_instance(menu, inst)
        probe = adversarial_probe(menu, inst, trials,
                                  cfg.get("seed", 0) or 0)
    except InfeasibleError as e:
        _fail(EXIT_INFEASIBLE, str(e))
    except (NumericError, FloatingPointError, OverflowError) as e:
        _fail(EXIT_NUMERIC, str(e))
    report = {"analytic_profit": analytic,
              "oracle_profit": disc.profit,
              "relative_gap": (disc.profit - analytic)
              / max(abs(analytic), 1e-300),
              "probe_improvement": probe}
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    sys.exit(0)


@main.command()
@shared_options
@click.option("--users", type=int, default=100_000, show_default=True)
@click.option("--resolution", type=int, default=256, show_default=True)
@click.option("--per-user", "per_user", type=click.Path(), default=None)
def simulate(config, a, sigma, qbar, dist, seed, out, users, resolution,
             per_user):
    """Monte-Carlo deployment of the solved menu."""
    params, d, cfg = _load_config(config, a, sigma, qbar, dist, seed, out)
    try:
        menu, _ = _solve_routed(params, d)
    except InfeasibleError as e:
        _fail(EXIT_INFEASIBLE, str(e))
    sc = SimConfig(n_users=users, seed=cfg.get("seed", 0) or 0,
                   menu_resolution=resolution,
                   tie_break=TieBreak.LOWEST_PRICE)
    outcome = run_sim(menu, d, params, sc)
    click.echo(json.dumps(outcome.to_dict(), indent=2, sort_keys=True))
    if per_user:
        from .marketsim import post_menu
        deltas, qs, ps = post_menu(menu, resolution)
        uu = d.sample(sc.n_users, sc.seed)
        lines = ["delta,choice_index,q,p,payoff"]
        for u in uu:
            j = int(np.argmax(u * qs - ps))
            lines.append(f"{u!r},{j},{qs[j]!r},{ps[j]!r},{u * qs[j] - ps[j]!r}")
        Path(per_user).write_text("\n".join(lines) + "\n")
    sys.exit(0)


@main.command()
@shared_options
@click.option("--parameter", type=click.Choice(["a", "sigma", "q_bar",
                                                "rate"]), required=True)
@click.option("--values", required=True,
              help="comma-separated list, e.g. 0.47,0.49,0.51")
def sweep(config, a, sigma, qbar, dist, seed, out, parameter, values):
    """Solve a family of instances varying one parameter."""
    params, d, cfg = _load_config(config, a, sigma, qbar, dist, seed, out)
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError as e:
        _fail(EXIT_CONFIG, f"bad --values: {e}")
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    rows = ["param_value,delta,q,p,U"]
    for v in vals:
        pv, dv = params, d
        if parameter == "rate":
            spec = d.to_spec()
            spec["rate"] = v
            dv = TypeDistribution.from_spec(spec)
        else:
            pv = params.replace(**{parameter: v})
        sub = outdir / f"{parameter}={v:g}"
        sub.mkdir(parents=True, exist_ok=True)
        try:
            menu, extra = _solve_routed(pv, dv)
        except InfeasibleError as e:
            _fail(EXIT_INFEASIBLE, f"{parameter}={v:g}: {e}")
        menu.to_csv(sub / "menu.csv")
        meta = menu.meta()
        meta.update(extra)
        _write_json(sub / "menu.meta.json", meta)
        for i in range(len(menu.grid)):
            u = menu.grid[i] * menu.q[i] - menu.p[i]
            rows.append(f"{v:g},{menu.grid[i]!r},{menu.q[i]!r},"
                        f"{menu.p[i]!r},{u!r}")
    (outdir / "sweep.csv").write_text("\n".join(rows) + "\n")
    sys.exit(0)


@main.command("fit-dist")
@click.option("--histogram", type=click.Path(), required=True)
@click.option("--out", type=click.Path(), default=None)
def fit_dist(histogram, out):
    """Fit an exponential type distribution to a spending histogram."""
    try:
        hist = load_histogram_csv(histogram)
        d = fit_exponential(hist)
    except FileNotFoundError:
        _fail(EXIT_INFEASIBLE, f"histogram not found: {histogram}")
    except FitError as e:
        _fail(EXIT_NUMERIC, str(e))
    spec = d.to_spec()
    text = json.dumps(spec, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    click.echo(text.rstrip("\n"))
    sys.exit(0)


@main.command()
@shared_options
@click.option("--menu", "menu_path", type=click.Path(), default=None,
              help="existing menu CSV; solved fresh when omitted")
@click.option("--no-figures", is_flag=True, default=False)
def report(config, a, sigma, qbar, dist, seed, out, menu_path, no_figures):
    """Translate a menu into VR service metrics, with figures."""
    params, d, cfg = _load_config(config, a, sigma, qbar, dist, seed, out)
    if menu_path:
        try:
            menu = ContractMenu.from_csv(menu_path)
        except FileNotFoundError:
            _fail(EXIT_INFEASIBLE, f"menu file not found: {menu_path}")
    else:
        try:
            menu, _ = _solve_routed(params, d)
        except InfeasibleError as e:
            _fail(EXIT_INFEASIBLE, str(e))
    write_report(menu, cfg["out"], figures=not no_figures)
    sys.exit(0)


if __name__ == "__main__":
    main()
