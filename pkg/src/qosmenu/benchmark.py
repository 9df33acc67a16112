"""Full-information benchmark and the value of hidden type information.

When the provider observes each user's type directly, no rent is conceded:
every price equals the user's gross value delta * q, and the QoS curve only
balances marginal value against marginal cost under the mean-QoS equality.
The profit gap between this benchmark and the screening optimum prices the
provider's ignorance of types.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .contracts import ContractMenu, ModelParams, Provenance, make_grid, verify
from .distributions import TypeDistribution
from .ironing import solve_general
from .regular import (InfeasibleError, _BRACKET_SPAN, _simpson_grid,
                      _simpson_sum, polish_beta)


@dataclass(frozen=True)
class BenchmarkSolution:
    menu: ContractMenu
    beta: float


def solve_full_info(params: ModelParams, dist: TypeDistribution,
                    n: int = 512) -> BenchmarkSolution:
    """Observable-type optimum: q from delta + beta, price extracting all surplus."""
    a, sig, qb = params.a, params.sigma, params.q_bar
    lo = params.delta_lo
    if dist.kind.value in ("gamma", "weibull"):
        lo = lo + 1e-9
    hi = params.delta_hi

    x = _simpson_grid(lo, hi, 4096)
    h = (hi - lo) / 4096
    fv = dist.pdf(x)

    def resid(beta):
        vals = np.log((x + beta) / (a * sig))
        return _simpson_sum(vals * fv, h) - a * qb

    bmin = -lo + 1e-12
    if resid(bmin + 1e-9) > 0:
        raise InfeasibleError("mean-QoS target below the attainable minimum "
                              "under observable types")
    bhi = bmin + 1.0
    while resid(bhi) < 0:
        bhi = bmin + 2.0 * (bhi - bmin)
        if bhi - bmin > _BRACKET_SPAN:
            raise InfeasibleError("no multiplier bracket under observable types")
    beta = float(brentq(resid, bmin + 1e-12, bhi, xtol=1e-13, rtol=8.9e-16))

    grid = make_grid(params.delta_lo, params.delta_hi, n)
    beta = polish_beta(params, dist,
                       lambda x, b: (1.0 / a) * np.log(
                           np.maximum(x + b, 1e-300) / (a * sig)),
                       beta, grid)
    qv = (1.0 / a) * np.log(np.maximum(grid + beta, 1e-300) / (a * sig))
    pv = grid * qv
    menu = ContractMenu(grid, qv, pv, beta, (), Provenance.FULL_INFO_BENCHMARK)
    return BenchmarkSolution(menu, beta)


def information_cost(params: ModelParams, dist: TypeDistribution) -> float:
    """Benchmark profit minus screening profit, on matched grids and quadrature."""
    bench = solve_full_info(params, dist)
    hidden = solve_general(params, dist)
    full = verify(params, dist, bench.menu).expected_profit
    hid = verify(params, dist, hidden.menu).expected_profit
    return full - hid
