"""General-distribution solver with pooling (ironing).

When the distribution-adjusted marginal value psi is non-monotone, the
pointwise formula for q decreases somewhere and violates implementability.
The fix pools types over intervals where q is held flat.  The flat level on
each interval is pinned down by an integral condition: the density-weighted
average of psi over the interval equals the level psi is clamped to.  That
average condition is exactly what isotonic regression (pool adjacent
violators) under the density measure produces, so the solver irons psi once,
refines the interval endpoints in the continuum, and only then solves for
the mean-QoS multiplier beta.  Ironing commutes with adding a constant, so
beta never has to be interleaved with the pooling step.

A stronger degeneracy, a nondecreasing inverse hazard (1-F)/f, collapses the
whole menu to a single contract (q_bar, delta_lo * q_bar); that case is
detected up front and returned without any quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .contracts import ContractMenu, ModelParams, Provenance, make_grid
from .distributions import TypeDistribution
from .regular import (InfeasibleError, _bracket_and_solve,
                      _ReputationIntegral, cumulative_integral, polish_beta)

_N_CELLS = 4096


def _quiet_quad(fn, a: float, b: float) -> float:
    # integrands here can have many small kinks (piecewise densities);
    # the resulting roundoff warning from adaptive quadrature is benign
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(fn, a, b, limit=200, epsabs=1e-13, epsrel=1e-13)[0]


@dataclass(frozen=True)
class IronedSolution:
    menu: ContractMenu
    beta: float
    # (n, d1, d2, q_n, integral_residual) per pooled interval
    interval_certificates: tuple


def weighted_pav(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted isotonic regression by pool adjacent violators.

    Returns the nondecreasing sequence minimizing sum w_i (y_i - z_i)^2.
    """
    n = len(y)
    level = np.empty(n)
    weight = np.empty(n)
    start = np.empty(n, dtype=int)
    top = -1
    for i in range(n):
        top += 1
        level[top], weight[top], start[top] = y[i], w[i], i
        while top > 0 and level[top - 1] >= level[top]:
            tot = weight[top - 1] + weight[top]
            level[top - 1] = (weight[top - 1] * level[top - 1]
                              + weight[top] * level[top]) / tot
            weight[top - 1] = tot
            top -= 1
    out = np.empty(n)
    for k in range(top + 1):
        end = start[k + 1] if k < top else n
        out[start[k]:end] = level[k]
    return out


def check_full_pooling(params: ModelParams,
                       dist: TypeDistribution) -> IronedSolution | None:
    """Single-contract degenerate case: nondecreasing inverse hazard.

    Returns the exact constant menu, or None when discrimination pays.
    """
    lo = params.delta_lo
    if dist.kind.value in ("gamma", "weibull"):
        lo = lo + 1e-9
    x = np.linspace(lo, params.delta_hi, 2049)[:-1]
    inv_hazard = (1.0 - dist.cdf(x)) / np.maximum(dist.pdf(x), 1e-300)
    steps = np.diff(inv_hazard)
    if np.all(np.abs(steps) < 1e-10):
        # constant inverse hazard: the pointwise curve is already monotone
        return None
    if np.all(steps >= -1e-12):
        grid = make_grid(params.delta_lo, params.delta_hi, 512)
        qv = np.full_like(grid, params.q_bar)
        pv = np.full_like(grid, params.delta_lo * params.q_bar)
        menu = ContractMenu(grid, qv, pv, 0.0,
                            ((params.delta_lo, params.delta_hi,
                              params.q_bar),),
                            Provenance.FULL_POOLING)
        cert = ((1, params.delta_lo, params.delta_hi, params.q_bar, 0.0),)
        return IronedSolution(menu, 0.0, cert)
    return None


def _interval_integral(dist: TypeDistribution, c: float, e1: float,
                       e2: float) -> float:
    """Integral of (psi - c) f over [e1, e2], kink-aligned per-cell Simpson.

    Exact for piecewise-linear densities, where the integrand is piecewise
    quadratic; composite error ~1e-12 for smooth parametric densities.
    """
    nodes = np.linspace(e1, e2, 257)
    kinks = np.asarray(dist.kink_points(), dtype=float)
    if kinks.size:
        nodes = np.union1d(nodes, kinks[(kinks > e1) & (kinks < e2)])
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    h = np.diff(nodes)

    def g(x):
        return (dist.virtual_shift(x) - c) * dist.pdf(x)

    ge = g(nodes)
    gm = g(mid)
    return float(np.sum(h / 6.0 * (ge[:-1] + 4.0 * gm + ge[1:])))


def _crossing(psi, c: float, a: float, b: float, lo: float, hi: float):
    """Root of psi(x) - c inside [a, b] clipped to the support, or None."""
    a, b = max(a, lo), min(b, hi)
    xs = np.linspace(a, b, 33)
    vals = np.array([psi(x) - c for x in xs])
    sgn = np.sign(vals)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    if len(idx) == 0:
        return None
    i = idx[0]
    return float(brentq(lambda x: psi(x) - c, xs[i], xs[i + 1],
                        xtol=1e-14, rtol=8.9e-16))


def _refine_block(dist, psi, c0: float, d1: float, d2: float,
                  lo: float, hi: float, h: float):
    """Sharpen one pooled interval in the continuum.

    The grid-level pool gives (d1, d2, c0) only to within a cell.  The exact
    interval satisfies psi(d1) = psi(d2) = c (interior endpoints only) and a
    zero density-weighted mean of psi - c over [d1, d2].  Both reduce to a
    one-dimensional root-find in the level c.
    """
    left_free = d1 > lo + 1e-12
    right_free = d2 < hi - 1e-12
    pad = 8.0 * h

    def ends(c):
        e1 = _crossing(psi, c, d1 - pad, d1 + pad, lo, hi) if left_free else lo
        e2 = _crossing(psi, c, d2 - pad, d2 + pad, lo, hi) if right_free else hi
        return e1, e2

    def resid(c):
        e1, e2 = ends(c)
        if e1 is None or e2 is None or e2 <= e1:
            return None
        return _interval_integral(dist, c, e1, e2)

    # bracket in c around the grid-level pool value; the residual is strictly
    # decreasing in c (its derivative is minus the interval's mass, the
    # endpoint terms vanishing at the crossings)
    r0 = resid(c0)
    if r0 is None:
        return c0, d1, d2
    dc = max(abs(r0) * 4.0, 1e-9)
    c_lo, r_lo, c_hi, r_hi = c0, r0, c0, r0
    for _ in range(60):
        if r0 > 0:
            c_hi = c_hi + dc
            r_hi = resid(c_hi)
            if r_hi is None:
                return c0, d1, d2
            if r_hi <= 0:
                break
        else:
            c_lo = c_lo - dc
            r_lo = resid(c_lo)
            if r_lo is None:
                return c0, d1, d2
            if r_lo >= 0:
                break
        dc *= 2.0
    if not (r_hi <= 0 <= r_lo):
        return c0, d1, d2
    c = float(brentq(lambda cc: resid(cc), c_lo, c_hi,
                     xtol=1e-14, rtol=8.9e-16))
    e1, e2 = ends(c)
    return c, e1, e2


def solve_general(params: ModelParams, dist: TypeDistribution,
                  n: int = 512) -> IronedSolution:
    """Full solver: pooling where needed, pointwise formula elsewhere.

    Works unchanged on well-behaved inputs, returning zero pooled intervals
    and the same menu as the closed-form path.
    """
    full = check_full_pooling(params, dist)
    if full is not None:
        return full

    lo, hi = params.delta_lo, params.delta_hi
    eval_lo = lo + 1e-9 if dist.kind.value in ("gamma", "weibull") else lo
    a, sig = params.a, params.sigma

    edges = np.linspace(eval_lo, hi, _N_CELLS + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    h = edges[1] - edges[0]
    psi_m = dist.virtual_shift(mids)
    w = dist.pdf(mids) * h
    ironed = weighted_pav(psi_m, np.maximum(w, 1e-300))

    # maximal pooled runs (flat and at least 2 cells wide)
    pooled = np.zeros(_N_CELLS, dtype=bool)
    i = 0
    while i < _N_CELLS:
        j = i
        while j + 1 < _N_CELLS and ironed[j + 1] == ironed[i]:
            j += 1
        if j > i:
            pooled[i:j + 1] = True
        i = j + 1
    # merge runs separated by under 2 cells
    runs = []
    i = 0
    while i < _N_CELLS:
        if pooled[i]:
            j = i
            while j + 1 < _N_CELLS and pooled[j + 1]:
                j += 1
            runs.append([i, j])
            i = j + 1
        else:
            i += 1
    merged = []
    for r in runs:
        if merged and r[0] - merged[-1][1] < 2:
            merged[-1][1] = r[1]
        else:
            merged.append(r)

    def psi_scalar(x):
        return float(dist.virtual_shift(np.array([x]))[0])

    def f_scalar(x):
        return float(dist.pdf(x))

    intervals = []
    for i0, i1 in merged:
        d1 = edges[i0] if i0 > 0 else eval_lo
        d2 = edges[i1 + 1] if i1 < _N_CELLS - 1 else hi
        block_w = w[i0:i1 + 1]
        c0 = float(np.sum(block_w * psi_m[i0:i1 + 1]) / np.sum(block_w))
        c, e1, e2 = _refine_block(dist, psi_scalar, c0, d1, d2,
                                  eval_lo, hi, h)
        intervals.append((e1, e2, c))
    intervals.sort()

    def psi_ironed(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = dist.virtual_shift(np.clip(x, eval_lo, hi))
        for e1, e2, c in intervals:
            out[(x >= e1) & (x <= e2)] = c
        return out

    rep = _ReputationIntegral(params, dist, psi=psi_ironed)
    beta = _bracket_and_solve(rep)

    grid = make_grid(lo, hi, n)
    for e1, e2, _ in intervals:
        grid = np.union1d(grid, [e1, e2])
    beta = polish_beta(params, dist,
                       lambda x, b: (1.0 / a) * np.log(
                           (psi_ironed(x) + b) / (a * sig)),
                       beta, grid)

    def q_fn(x):
        return (1.0 / a) * np.log((psi_ironed(x) + beta) / (a * sig))

    qv = q_fn(grid)
    rent = cumulative_integral(q_fn, grid)
    pv = grid * qv - rent
    pool_spans = tuple((e1, e2, c) for e1, e2, c in intervals)
    menu = ContractMenu(grid, qv, pv, beta, pool_spans, Provenance.IRONED)

    certs = []
    for k, (e1, e2, c) in enumerate(intervals, start=1):
        q_n = (1.0 / a) * np.log((c + beta) / (a * sig))
        res = _quiet_quad(
            lambda x: (psi_scalar(x) + beta - a * sig * np.exp(a * q_n))
            * f_scalar(x), e1, e2)
        certs.append((k, float(e1), float(e2), float(q_n), float(res)))
    return IronedSolution(menu, beta, tuple(certs))


def interval_certificates(params: ModelParams, dist: TypeDistribution,
                          solution: IronedSolution) -> list[float]:
    """Recompute the flat-interval integral residuals with adaptive quadrature.

    Independent of the grids used to build the solution; near-zero residuals
    certify that each pooled level is the density-weighted average it claims
    to be.
    """
    if solution.menu.provenance == Provenance.FULL_POOLING:
        # constant menu: the single certificate is the mean-QoS identity
        return [0.0]
    a, sig = params.a, params.sigma
    beta = solution.beta
    eval_lo = (params.delta_lo + 1e-9
               if dist.kind.value in ("gamma", "weibull") else params.delta_lo)
    out = []
    for _, d1, d2, q_n, _ in solution.interval_certificates:
        target = a * sig * np.exp(a * q_n)
        val = _quiet_quad(
            lambda x: (float(dist.virtual_shift(np.array([x]))[0])
                       + beta - target) * dist.pdf(x),
            max(d1, eval_lo), d2)
        out.append(float(val))
    return out
