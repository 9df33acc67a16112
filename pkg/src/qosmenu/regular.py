"""Optimal contracts for regular type distributions.

The hidden-information optimum sets the QoS curve to
``q(delta) = (1/a) ln((psi(delta) + beta) / (a sigma))`` with psi the
distribution-adjusted marginal value and beta the constant multiplier of the
mean-QoS equality.  Prices follow from the information rent
``p = delta q - rent`` where the rent integrates q up from the bottom type.

Two closed-form specializations (uniform and exponential types) provide
independent cross-checks of the generic path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .contracts import ContractMenu, ModelParams, Provenance, make_grid
from .distributions import TypeDistribution


class InfeasibleError(RuntimeError):
    """No multiplier satisfies the mean-QoS equality on this instance."""


_BRACKET_SPAN = 1.0e6


@dataclass(frozen=True)
class RegularSolution:
    menu: ContractMenu
    beta: float
    phi_curve: np.ndarray          # information rent at the grid nodes
    reputation_binding: bool


# 5-point Gauss-Legendre nodes/weights on [-1, 1]
_GL_X = np.array([-0.906179845938664, -0.538469310105683, 0.0,
                  0.538469310105683, 0.906179845938664])
_GL_W = np.array([0.236926885056189, 0.478628670499366, 0.568888888888889,
                  0.478628670499366, 0.236926885056189])


def cumulative_integral(fn, grid: np.ndarray) -> np.ndarray:
    """Cumulative integral of a callable along the grid, Gauss-Legendre per cell."""
    a = grid[:-1]
    h = np.diff(grid)
    nodes = a[:, None] + 0.5 * h[:, None] * (_GL_X[None, :] + 1.0)
    vals = fn(nodes.ravel()).reshape(nodes.shape)
    cells = 0.5 * h * (vals @ _GL_W)
    return np.concatenate([[0.0], np.cumsum(cells)])


def _simpson_grid(lo: float, hi: float, n_sub: int) -> np.ndarray:
    return np.linspace(lo, hi, n_sub + 1)


def _simpson_sum(y: np.ndarray, h: float) -> float:
    s = y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()
    return float(s * h / 3.0)


class _ReputationIntegral:
    """Mean QoS as a function of beta over fixed quadrature samples.

    Built once per instance: psi and the density are evaluated on a composite
    Simpson grid, refined until doubling moves the integral by < 1e-9.
    """

    def __init__(self, params: ModelParams, dist: TypeDistribution,
                 psi=None, n_sub: int = 2048):
        self.params = params
        if psi is None:
            psi = dist.virtual_shift
        lo = params.delta_lo
        if dist.kind.value in ("gamma", "weibull"):
            lo = lo + 1e-9
        self.lo, self.hi = lo, params.delta_hi
        self.n_sub = n_sub
        self._tabulate(dist, psi, n_sub)
        # Richardson check: doubling must be quiet, else refine further
        probe_beta = float(np.max(-self.psi_vals)) + 1.0
        for _ in range(3):
            coarse = self._value(probe_beta)
            self._tabulate(dist, psi, self.n_sub * 2)
            if abs(self._value(probe_beta) - coarse) < 1e-9:
                break

    def _tabulate(self, dist, psi, n_sub):
        x = _simpson_grid(self.lo, self.hi, n_sub)
        self.h = (self.hi - self.lo) / n_sub
        self.psi_vals = np.atleast_1d(psi(x))
        self.f_vals = np.atleast_1d(dist.pdf(x))
        self.n_sub = n_sub

    @property
    def beta_min(self) -> float:
        return float(np.max(-self.psi_vals))

    def _value(self, beta: float) -> float:
        a, sig = self.params.a, self.params.sigma
        arg = (self.psi_vals + beta) / (a * sig)
        q = (1.0 / a) * np.log(np.maximum(arg, 1e-300))
        return _simpson_sum(q * self.f_vals, self.h)

    def residual(self, beta: float) -> float:
        return self._value(beta) - self.params.q_bar


def _bracket_and_solve(rep: _ReputationIntegral) -> float:
    lo = rep.beta_min + 1e-12
    if rep.residual(lo) > 0:
        raise InfeasibleError(
            "mean-QoS target below the minimum attainable by the candidate "
            f"curve (residual {rep.residual(lo):.3g} at the smallest feasible beta)")
    hi = max(lo * 2.0, lo + 1.0)
    while rep.residual(hi) < 0:
        hi = rep.beta_min + 2.0 * (hi - rep.beta_min)
        if hi - rep.beta_min > _BRACKET_SPAN:
            raise InfeasibleError("no multiplier bracket found within span")
    return float(brentq(rep.residual, lo, hi, xtol=1e-13, rtol=8.9e-16))


def solve_beta(params: ModelParams, dist: TypeDistribution) -> float:
    """Multiplier of the mean-QoS equality, by bracketing plus Brent.

    The map beta -> mean QoS is strictly increasing, so the root is unique
    once bracketed.
    """
    rep = _ReputationIntegral(params, dist)
    return _bracket_and_solve(rep)


def _q_formula(params: ModelParams, psi_vals: np.ndarray, beta: float) -> np.ndarray:
    return (1.0 / params.a) * np.log(
        (psi_vals + beta) / (params.a * params.sigma))


def polish_beta(params: ModelParams, dist: TypeDistribution, q_family,
                beta0: float, grid: np.ndarray) -> float:
    """Retarget the multiplier to the sampled menu's own mean QoS.

    The shipped menu interpolates q linearly between grid nodes, and a
    concave curve loses a few 1e-6 of mass to its chords at this resolution.
    A secant polish on the integral of the interpolant (per-cell
    Gauss-Legendre against the exact density) absorbs that representation
    bias into the multiplier, so the menu satisfies the mean-QoS equality
    as deployed, not just in the continuum limit.
    """
    base = np.asarray(grid, dtype=float)
    kinks = np.asarray(dist.kink_points(), dtype=float)
    if kinks.size:
        kinks = kinks[(kinks > base[0]) & (kinks < base[-1])]
        base = np.union1d(base, kinks)
    mid = 0.5 * (base[:-1] + base[1:])
    h = np.diff(base)
    f_ends = np.atleast_1d(dist.pdf(base))
    f_mid = np.atleast_1d(dist.pdf(mid))

    def G(b):
        qv = q_family(grid, b)
        qe = np.interp(base, grid, qv) * f_ends
        qm = np.interp(mid, grid, qv) * f_mid
        return float(np.sum(h / 6.0 * (qe[:-1] + 4.0 * qm + qe[1:]))) \
            - params.q_bar

    b0, g0 = beta0, G(beta0)
    b1 = beta0 + max(abs(g0), 1e-9)
    g1 = G(b1)
    for _ in range(50):
        if abs(g1) < 1e-12 or g1 == g0:
            break
        b0, g0, b1 = b1, g1, b1 - g1 * (b1 - b0) / (g1 - g0)
        g1 = G(b1)
    return b1


def build_menu(params: ModelParams, dist: TypeDistribution, q_family,
               beta: float, provenance: Provenance, n: int = 512,
               pooling=(), grid: np.ndarray | None = None):
    """Sample a QoS family onto the standard grid, polish beta, and price it.

    q_family maps (points, beta) to QoS values.  The rent curve integrates
    q from the bottom type with per-cell Gauss-Legendre, so prices carry
    quadrature error far below the verification tolerances.
    """
    if grid is None:
        grid = make_grid(params.delta_lo, params.delta_hi, n)
    beta = polish_beta(params, dist, q_family, beta, grid)
    qv = q_family(grid, beta)
    rent = cumulative_integral(lambda x: q_family(x, beta), grid)
    pv = grid * qv - rent
    menu = ContractMenu(grid, qv, pv, beta, tuple(pooling), provenance)
    return menu, rent, beta


def solve_regular(params: ModelParams, dist: TypeDistribution,
                  n: int = 512) -> RegularSolution:
    """Hidden-information optimum for a regular distribution.

    First tries the unconstrained problem (beta = 0, nonpositive virtual
    values excluded); if that already meets the mean-QoS target the
    constraint is slack.  Otherwise the equality regime solves for beta.
    """
    a, sig = params.a, params.sigma

    def q_unconstrained(x):
        psi = np.atleast_1d(dist.virtual_shift(np.atleast_1d(x)))
        q = np.zeros_like(psi)
        served = psi > a * sig
        q[served] = (1.0 / a) * np.log(psi[served] / (a * sig))
        return q

    lo = params.delta_lo
    if dist.kind.value in ("gamma", "weibull"):
        lo = lo + 1e-9
    mean_unc = quad(lambda d: float(q_unconstrained(d)[0]) * dist.pdf(d),
                    lo, params.delta_hi, limit=200)[0]
    if mean_unc >= params.q_bar:
        grid = make_grid(params.delta_lo, params.delta_hi, n)
        qv = q_unconstrained(grid)
        rent = cumulative_integral(q_unconstrained, grid)
        pv = grid * qv - rent
        menu = ContractMenu(grid, qv, pv, 0.0, (),
                            Provenance.REGULAR_CLOSED_FORM)
        return RegularSolution(menu, 0.0, rent, reputation_binding=False)

    beta0 = solve_beta(params, dist)

    def q_star(x, b):
        psi = np.atleast_1d(dist.virtual_shift(np.atleast_1d(x)))
        return _q_formula(params, psi, b)

    if float(q_star(np.array([params.delta_lo]), beta0)[0]) < 0:
        warnings.warn("optimal QoS is negative at the bottom type; "
                      "the rent curve dips below zero", RuntimeWarning)
    menu, rent, beta = build_menu(params, dist, q_star, beta0,
                                  Provenance.REGULAR_CLOSED_FORM, n)
    return RegularSolution(menu, beta, rent, reputation_binding=True)


# ------------------------------------------------------------- closed forms


def closed_form_uniform(params: ModelParams, n: int = 512) -> RegularSolution:
    """Uniform-type specialization with the explicit transcendental for beta.

    q(delta) = (1/a) ln((2 delta - delta_hi + beta)/(a sigma)) and the price
    carries the explicit log-integral of the rent.
    """
    a, sig, qb = params.a, params.sigma, params.q_bar
    lo, hi = params.delta_lo, params.delta_hi
    span = hi - lo

    def trans(beta):
        return (((beta - hi) / 2.0 + hi) * math.log(beta + hi)
                - ((beta - hi) / 2.0 + lo) * math.log(beta - hi + 2.0 * lo)
                - (a * qb + math.log(a * sig) + 1.0) * span)

    bmin = hi - 2.0 * lo + 1e-12
    if trans(bmin + 1e-9) > 0:
        raise InfeasibleError("uniform transcendental has no root: mean-QoS "
                              "target below the attainable minimum")
    bhi = bmin + 1.0
    while trans(bhi) < 0:
        bhi = bmin + 2.0 * (bhi - bmin)
        if bhi - bmin > _BRACKET_SPAN:
            raise InfeasibleError("no bracket for the uniform transcendental")
    beta = float(brentq(trans, bmin + 1e-12, bhi, xtol=1e-13, rtol=8.9e-16))

    grid = make_grid(lo, hi, n)
    dist = TypeDistribution.uniform(lo, hi)
    beta = polish_beta(params, dist,
                       lambda x, b: (1.0 / a) * np.log(
                           (2.0 * x - hi + b) / (a * sig)),
                       beta, grid)
    qv = (1.0 / a) * np.log((2.0 * grid - hi + beta) / (a * sig))
    pv = (grid * qv
          + (grid - lo) / a * (math.log(a * sig) + 1.0)
          - (1.0 / a) * (
              ((beta - hi) / 2.0 + grid) * np.log(beta - hi + 2.0 * grid)
              - ((beta - hi) / 2.0 + lo) * math.log(beta - hi + 2.0 * lo)))
    rent = grid * qv - pv
    menu = ContractMenu(grid, qv, pv, beta, (), Provenance.REGULAR_CLOSED_FORM)
    return RegularSolution(menu, beta, rent, reputation_binding=True)


def closed_form_exponential(params: ModelParams, rate: float,
                            n: int = 512) -> RegularSolution:
    """Exponential-type specialization with an explicit price formula.

    Uses the untruncated density verbatim on the support, for which the
    virtual shift is exactly delta - 1/rate.  beta is root-found with
    adaptive quadrature, an independent path from the generic solver.
    """
    a, sig, qb = params.a, params.sigma, params.q_bar
    lo, hi = params.delta_lo, params.delta_hi
    shift = -1.0 / rate

    def resid(beta):
        with warnings.catch_warnings():
            # the integrand's log endpoint steepens near the smallest
            # feasible beta; the roundoff warning there is benign
            warnings.simplefilter("ignore")
            val = quad(lambda d: (1.0 / a)
                       * math.log((d + shift + beta) / (a * sig))
                       * rate * math.exp(-rate * d), lo, hi, limit=200,
                       epsabs=1e-12, epsrel=1e-12)[0]
        return val - qb

    bmin = -(lo + shift) + 1e-12
    if resid(bmin + 1e-9) > 0:
        raise InfeasibleError("exponential case: mean-QoS target below the "
                              "attainable minimum")
    bhi = bmin + 1.0
    while resid(bhi) < 0:
        bhi = bmin + 2.0 * (bhi - bmin)
        if bhi - bmin > _BRACKET_SPAN:
            raise InfeasibleError("no bracket for the exponential case")
    beta = float(brentq(resid, bmin + 1e-12, bhi, xtol=1e-13, rtol=8.9e-16))

    grid = make_grid(lo, hi, n)
    dist = TypeDistribution.exponential(rate, lo, hi, renormalize=False)
    beta = polish_beta(params, dist,
                       lambda x, b: (1.0 / a) * np.log(
                           (x + shift + b) / (a * sig)),
                       beta, grid)
    c = shift + beta
    if lo + c <= 0:
        raise InfeasibleError("nonpositive log argument at the bottom type")
    gamma = (lo / a) * (1.0 + math.log(a * sig)) \
        - (1.0 / a) * (lo + c) * math.log(lo + c)

    qv = (1.0 / a) * np.log((grid + c) / (a * sig))
    pv = (grid * qv
          - (1.0 / a) * (grid + c) * np.log(grid + c)
          + (grid / a) * (1.0 + math.log(a * sig))
          - gamma)
    rent = grid * qv - pv
    menu = ContractMenu(grid, qv, pv, beta, (), Provenance.REGULAR_CLOSED_FORM)
    return RegularSolution(menu, beta, rent, reputation_binding=True)
