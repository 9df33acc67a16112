"""Monte-Carlo deployment of a contract menu.

A finite menu is posted (the continuum curve sampled at a chosen
resolution), user types are drawn from the distribution, each user picks
the contract maximizing delta * q - p, and realized provider profit,
truthfulness, and payoffs are aggregated.  Deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .contracts import ContractMenu, ModelParams, Provenance, make_grid
from .distributions import TypeDistribution


class TieBreak(Enum):
    LOWEST_PRICE = "lowest_price"
    TRUTHFUL = "truthful"


@dataclass(frozen=True)
class SimConfig:
    n_users: int = 100_000
    seed: int = 0
    menu_resolution: int = 256
    tie_break: TieBreak = TieBreak.LOWEST_PRICE

    def __post_init__(self):
        if self.n_users < 1 or self.menu_resolution < 2:
            raise ValueError("need n_users >= 1 and menu_resolution >= 2")


@dataclass(frozen=True)
class SimOutcome:
    realized_profit: float
    truthfulness_rate: float
    mean_user_payoff: float
    per_type_histogram: np.ndarray = field(repr=False)
    profit_std_error: float = 0.0

    def to_dict(self):
        return {"realized_profit": self.realized_profit,
                "truthfulness_rate": self.truthfulness_rate,
                "mean_user_payoff": self.mean_user_payoff,
                "profit_std_error": self.profit_std_error,
                "per_type_histogram": [int(c) for c in
                                       self.per_type_histogram]}


def post_menu(menu: ContractMenu, resolution: int):
    """Sample the continuum curve onto a finite posting.

    Points are packed toward the bottom of the support the same way the
    solver grids are, since that is where the curve bends and where a
    uniform posting loses truthfulness.
    """
    deltas = make_grid(menu.grid[0], menu.grid[-1], resolution)
    return deltas, menu.q_at(deltas), menu.p_at(deltas)


def _nearest_index(deltas: np.ndarray, users: np.ndarray) -> np.ndarray:
    cuts = 0.5 * (deltas[:-1] + deltas[1:])
    return np.searchsorted(cuts, users)


def simulate(menu: ContractMenu, dist: TypeDistribution, params: ModelParams,
             cfg: SimConfig) -> SimOutcome:
    deltas, qs, ps = post_menu(menu, cfg.menu_resolution)
    users = dist.sample(cfg.n_users, cfg.seed)
    designated = _nearest_index(deltas, users)

    if menu.provenance == Provenance.FULL_INFO_BENCHMARK:
        # observable types: the provider assigns each user its designated
        # contract instead of letting users self-select (the benchmark menu
        # extracts all surplus and is not selection-proof)
        choice = designated
        best = users * qs[choice] - ps[choice]
    else:
        choice = np.empty(cfg.n_users, dtype=int)
        best = np.empty(cfg.n_users)
        idx = np.arange(len(deltas))
        for s in range(0, cfg.n_users, 8192):
            u = users[s:s + 8192]
            payoff = u[:, None] * qs[None, :] - ps[None, :]
            b = payoff.max(axis=1)
            is_best = payoff >= b[:, None] - 1e-12
            if cfg.tie_break == TieBreak.LOWEST_PRICE:
                # smallest price among maximizers; prices rise along the
                # posting
                c = is_best.argmax(axis=1)
            else:
                des = designated[s:s + 8192]
                masked = np.where(is_best, 0.0, np.inf) \
                    + np.abs(idx[None, :] - des[:, None])
                c = masked.argmin(axis=1)
            choice[s:s + 8192] = c
            best[s:s + 8192] = b

    truthful = np.mean(choice == designated)

    a, sig = params.a, params.sigma
    per_user = ps[choice] - sig * np.expm1(a * qs[choice])
    hist = np.bincount(choice, minlength=cfg.menu_resolution)
    return SimOutcome(
        realized_profit=float(per_user.mean()),
        truthfulness_rate=float(truthful),
        mean_user_payoff=float(best.mean()),
        per_type_histogram=hist,
        profit_std_error=float(per_user.std(ddof=1)
                               / np.sqrt(cfg.n_users)))


def compare_scenarios(params: ModelParams, dist: TypeDistribution,
                      cfg: SimConfig) -> float:
    """Simulated profit gap, observable types minus hidden types, shared draws."""
    from .benchmark import solve_full_info
    from .ironing import solve_general

    bench = solve_full_info(params, dist).menu
    hidden = solve_general(params, dist).menu
    full = simulate(bench, dist, params, cfg).realized_profit
    hid = simulate(hidden, dist, params, cfg).realized_profit
    return full - hid
