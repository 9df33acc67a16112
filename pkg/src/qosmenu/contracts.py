"""Economic primitives, contract-menu representation, and constraint checks.

A menu is stored as sampled (q, p) curves on a strictly increasing type grid
with linear interpolation between nodes, plus any constant-QoS pooling
intervals and the mean-QoS multiplier used to build it.  The same
representation serves the closed-form solvers, the ironing solver, the
full-information benchmark, the brute-force oracle, and the CLI.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .distributions import DomainError, TypeDistribution


class Provenance(Enum):
    REGULAR_CLOSED_FORM = "RegularClosedForm"
    IRONED = "Ironed"
    FULL_INFO_BENCHMARK = "FullInfoBenchmark"
    FULL_POOLING = "FullPooling"
    DISCRETIZED = "Discretized"


@dataclass(frozen=True)
class ModelParams:
    """Cost and reputation parameters of the service provider."""

    a: float            # cost sensitivity (exponent rate)
    sigma: float        # cost scale, currency units
    q_bar: float        # mean-QoS target
    delta_lo: float
    delta_hi: float

    def __post_init__(self):
        if self.a <= 0 or self.sigma <= 0 or self.q_bar <= 0:
            raise ValueError("a, sigma and q_bar must be positive")
        if not (self.delta_hi > self.delta_lo >= 0):
            raise ValueError("need delta_hi > delta_lo >= 0")

    def replace(self, **kw) -> "ModelParams":
        d = dict(a=self.a, sigma=self.sigma, q_bar=self.q_bar,
                 delta_lo=self.delta_lo, delta_hi=self.delta_hi)
        d.update(kw)
        return ModelParams(**d)


def phi(delta: float, q: float) -> float:
    """User gross payoff from quality q at type delta."""
    return delta * q


def cost(params: ModelParams, q):
    """Provider cost sigma (e^{a q} - 1); convex, zero at q = 0."""
    aq = params.a * np.asarray(q, dtype=float)
    if np.any(aq > 700):
        raise OverflowError("cost exponent a*q too large")
    out = params.sigma * np.expm1(aq)
    return float(out) if np.isscalar(q) else out


def make_grid(lo: float, hi: float, n: int = 512, refine: float = 3.0) -> np.ndarray:
    """Type grid of n points, denser near the lower edge.

    The QoS curve bends fastest where the log argument is small, i.e. near
    the bottom of the support, so nodes are packed there.
    """
    t = np.linspace(0.0, 1.0, n)
    x = np.expm1(refine * t) / np.expm1(refine)
    return lo + (hi - lo) * x


@dataclass(frozen=True)
class ContractMenu:
    """Sampled menu {q(delta), p(delta)} with linear interpolation."""

    grid: np.ndarray
    q: np.ndarray
    p: np.ndarray
    beta: float
    pooling_intervals: tuple[tuple[float, float, float], ...] = ()
    provenance: Provenance = Provenance.REGULAR_CLOSED_FORM

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.size < 2 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing with >= 2 points")
        if len(self.q) != g.size or len(self.p) != g.size:
            raise ValueError("q and p must match the grid length")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))

    @property
    def delta_lo(self) -> float:
        return float(self.grid[0])

    @property
    def delta_hi(self) -> float:
        return float(self.grid[-1])

    def _check(self, d):
        arr = np.asarray(d, dtype=float)
        if np.any(arr < self.delta_lo - 1e-9) or np.any(arr > self.delta_hi + 1e-9):
            raise DomainError(f"type {d} outside menu grid")

    def q_at(self, d):
        self._check(d)
        out = np.interp(d, self.grid, self.q)
        return float(out) if np.isscalar(d) else out

    def p_at(self, d):
        self._check(d)
        out = np.interp(d, self.grid, self.p)
        return float(out) if np.isscalar(d) else out

    # -------------------------------------------------------------- serialize

    def to_csv(self, path) -> None:
        pooled_flag = np.zeros(self.grid.size, dtype=int)
        for (d1, d2, _) in self.pooling_intervals:
            pooled_flag |= (self.grid >= d1 - 1e-12) & (self.grid <= d2 + 1e-12)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["delta", "q", "p", "pooled"])
            for d, q, p, fl in zip(self.grid, self.q, self.p, pooled_flag):
                w.writerow([repr(float(d)), repr(float(q)), repr(float(p)), int(fl)])

    def meta(self) -> dict:
        return {
            "beta": self.beta,
            "pooling_intervals": [list(iv) for iv in self.pooling_intervals],
            "provenance": self.provenance.value,
        }

    def write_meta(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.meta(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def from_csv(csv_path, meta_path=None) -> "ContractMenu":
        grid, q, p = [], [], []
        with open(csv_path, newline="") as fh:
            for row in csv.DictReader(fh):
                grid.append(float(row["delta"]))
                q.append(float(row["q"]))
                p.append(float(row["p"]))
        beta = 0.0
        pooling: tuple = ()
        prov = Provenance.DISCRETIZED
        if meta_path is not None:
            with open(meta_path) as fh:
                meta = json.load(fh)
            beta = float(meta["beta"])
            pooling = tuple(tuple(iv) for iv in meta["pooling_intervals"])
            prov = Provenance(meta["provenance"])
        return ContractMenu(np.array(grid), np.array(q), np.array(p),
                            beta, pooling, prov)


def user_payoff(menu: ContractMenu, true_type: float, claimed_type: float) -> float:
    """V(delta, delta') = delta * q(delta') - p(delta')."""
    menu._check(true_type)
    return true_type * menu.q_at(claimed_type) - menu.p_at(claimed_type)


def sp_utility(params: ModelParams, menu: ContractMenu, d) -> float:
    """Provider profit p(delta) - C(q(delta)) from serving type delta."""
    return menu.p_at(d) - cost(params, menu.q_at(d))


@dataclass(frozen=True)
class VerificationReport:
    max_ic_regret: float
    min_ir_slack: float
    reputation_residual: float
    monotone: bool
    expected_profit: float

    def to_json(self, path=None) -> str:
        payload = {
            "max_ic_regret": self.max_ic_regret,
            "min_ir_slack": self.min_ir_slack,
            "reputation_residual": self.reputation_residual,
            "monotone": self.monotone,
            "expected_profit": self.expected_profit,
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def passes(self, ic_tol=1e-6, ir_tol=1e-9, rep_tol=1e-6) -> bool:
        return (self.max_ic_regret <= ic_tol
                and self.min_ir_slack >= -ir_tol
                and abs(self.reputation_residual) <= rep_tol
                and self.monotone)


def verify(params: ModelParams, dist: TypeDistribution,
           menu: ContractMenu) -> VerificationReport:
    """Exhaustive pairwise IC check plus IR, mean-QoS and profit quadrature.

    The IC regret scans the full grid-by-grid claim matrix, not just adjacent
    types.  Quadratures run per-cell Simpson on the union of the menu nodes
    and the density's kink points, which integrates linearly interpolated
    curves against a piecewise-linear density exactly.
    """
    grid = menu.grid
    n = grid.size
    if n > 1024:
        step = int(math.ceil(n / 1024))
        grid = grid[::step]
    q = menu.q_at(grid)
    p = menu.p_at(grid)

    # regret[i, j] = payoff of claiming j minus truthful payoff, for type i
    truthful = grid * q - p
    claim = grid[:, None] * q[None, :] - p[None, :]
    max_regret = float(np.max(claim - truthful[:, None]))

    min_ir = float(np.min(truthful))
    monotone = bool(np.all(np.diff(menu.q) >= -1e-12))

    # integration cells: menu nodes joined with any density kinks, halved
    # once so the cost term is also resolved well
    base = np.asarray(menu.grid, dtype=float)
    kinks = np.asarray(dist.kink_points(), dtype=float)
    if kinks.size:
        kinks = kinks[(kinks > base[0]) & (kinks < base[-1])]
        base = np.union1d(base, kinks)
    base = np.union1d(base, 0.5 * (base[:-1] + base[1:]))
    mid = 0.5 * (base[:-1] + base[1:])
    hcell = np.diff(base)

    def integral(values_at):
        ends = values_at(base)
        mids = values_at(mid)
        return float(np.sum(hcell / 6.0 * (ends[:-1] + 4.0 * mids
                                           + ends[1:])))

    rep = integral(lambda x: menu.q_at(x) * np.atleast_1d(dist.pdf(x))) \
        - params.q_bar
    profit = integral(lambda x: (menu.p_at(x) - cost(params, menu.q_at(x)))
                      * np.atleast_1d(dist.pdf(x)))

    return VerificationReport(max_ic_regret=max_regret,
                              min_ir_slack=min_ir,
                              reputation_residual=float(rep),
                              monotone=monotone,
                              expected_profit=float(profit))


def envelope_prices(grid: np.ndarray, q: np.ndarray,
                    rent_lo: float = 0.0) -> np.ndarray:
    """Prices from binding local IC with zero rent at the bottom type.

    Integrates dp = delta dq along the sampled curve (trapezoid in q), which
    is exact for piecewise-linear q.
    """
    dq = np.diff(q)
    mid = 0.5 * (grid[:-1] + grid[1:])
    p = np.concatenate([[grid[0] * q[0] - rent_lo], mid * dq])
    return np.cumsum(p)
