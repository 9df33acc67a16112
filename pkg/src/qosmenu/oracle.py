"""Brute-force cross-check on a finite-type discretization.

Independent of the analytic solvers: prices are eliminated through the
binding local incentive chain (bottom user earns zero, each step concedes
exactly the rent needed for truthfulness), leaving a smooth concave program
in the QoS vector alone.  Projected gradient ascent with an isotonic
projection solves it to machine tolerance.  Agreement of the resulting
profit with the closed-form menus, and failure of random feasible
perturbations to improve on them, certify the analytic path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from sklearn.isotonic import isotonic_regression

from .contracts import ContractMenu, ModelParams, cost
from .distributions import TypeDistribution

_MAX_ITERS = 100_000


class ConvergenceError(RuntimeError):
    def __init__(self, msg, last_iterate=None):
        super().__init__(msg)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class DiscreteInstance:
    types: np.ndarray
    masses: np.ndarray
    params: ModelParams

    def __post_init__(self):
        t = np.asarray(self.types, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if len(t) < 8:
            raise ValueError("need at least 8 types")
        if np.any(np.diff(t) <= 0):
            raise ValueError("types must be strictly increasing")
        if np.any(m <= 0) or abs(m.sum() - 1.0) > 1e-12:
            raise ValueError("masses must be positive and sum to 1")
        object.__setattr__(self, "types", t)
        object.__setattr__(self, "masses", m)


@dataclass(frozen=True)
class DiscreteSolution:
    q: np.ndarray
    p: np.ndarray
    profit: float
    multiplier: float


def discretize(params: ModelParams, dist: TypeDistribution,
               m: int) -> DiscreteInstance:
    """Cell midpoints with renormalized cell masses."""
    if m < 8:
        raise ValueError("need m >= 8")
    lo = params.delta_lo
    if dist.kind.value in ("gamma", "weibull"):
        lo = lo + 1e-9
    edges = np.linspace(lo, params.delta_hi, m + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    masses = np.array([quad(dist.pdf, edges[i], edges[i + 1], limit=100)[0]
                       for i in range(m)])
    masses = masses / masses.sum()
    return DiscreteInstance(mids, masses, params)


def envelope_rents(types: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Rent vector from the binding local incentive chain, bottom rent zero."""
    gaps = np.diff(types)
    return np.concatenate([[0.0], np.cumsum(q[:-1] * gaps)])


def _profit(inst: DiscreteInstance, q: np.ndarray) -> float:
    a, sig = inst.params.a, inst.params.sigma
    rents = envelope_rents(inst.types, q)
    surplus = inst.types * q - rents - sig * np.expm1(a * q)
    return float(np.sum(surplus * inst.masses))


def _project(q: np.ndarray, masses: np.ndarray, q_bar: float) -> np.ndarray:
    iso = isotonic_regression(q, sample_weight=masses)
    return iso + (q_bar - float(np.sum(masses * iso)))


def solve_discrete(inst: DiscreteInstance) -> DiscreteSolution:
    """Concave maximization over nondecreasing QoS with the mean pinned.

    Gradient ascent in the mass-weighted inner product; each step is
    projected back onto the feasible set (isotonic regression, then a
    uniform shift that restores the mean, which stays monotone because
    constants are order-preserving).
    """
    a, sig = inst.params.a, inst.params.sigma
    t, f, qb = inst.types, inst.masses, inst.params.q_bar
    m = len(t)
    gaps = np.diff(t)
    tail = np.concatenate([np.cumsum(f[::-1])[::-1][1:], [0.0]])

    q_max = 2.0 * abs(qb) + 1.0
    q = _project(np.full(m, qb), f, qb)
    prof = _profit(inst, q)
    for _ in range(_MAX_ITERS):
        step = 1.0 / (a * a * sig * np.exp(a * q_max))
        grad = f * (t - a * sig * np.exp(a * q))
        grad[:-1] -= gaps * tail[:-1]
        q_new = _project(q + step * grad / f, f, qb)
        if np.max(q_new) > q_max:
            q_max = 2.0 * np.max(q_new)
        prof_new = _profit(inst, q_new)
        q = q_new
        if abs(prof_new - prof) < 1e-12:
            prof = prof_new
            break
        prof = prof_new
    else:
        raise ConvergenceError("no profit stagnation after max iterations",
                               last_iterate=q)

    rents = envelope_rents(t, q)
    p = t * q - rents
    # multiplier from stationarity at strictly increasing coordinates
    lam = a * sig * np.exp(a * q) - t
    lam[:-1] += gaps * tail[:-1] / f[:-1]
    interior = np.ones(m, dtype=bool)
    interior[:-1] &= np.diff(q) > 1e-9
    interior[1:] &= np.diff(q) > 1e-9
    mult = float(np.average(lam[interior], weights=f[interior])
                 if interior.any() else np.average(lam, weights=f))
    return DiscreteSolution(q, p, prof, mult)


def menu_profit_on_instance(menu: ContractMenu,
                            inst: DiscreteInstance) -> float:
    """Profit of an analytic menu restricted to the instance's types.

    The menu's QoS curve is sampled at the types and re-priced by the same
    envelope chain the oracle uses, so the comparison shares one arena.
    """
    q = menu.q_at(inst.types)
    return _profit(inst, q)


def adversarial_probe(menu: ContractMenu, inst: DiscreteInstance,
                      trials: int, seed: int) -> float:
    """Best profit gain found by random feasible perturbations of the menu.

    Each trial perturbs the sampled QoS vector, restores monotonicity and
    the mean, re-prices by the envelope chain, and records the improvement.
    """
    if trials <= 0:
        return 0.0
    rng = np.random.default_rng(seed)
    base_q = _project(menu.q_at(inst.types), inst.masses, inst.params.q_bar)
    base = _profit(inst, base_q)
    m = len(inst.types)
    best = 0.0
    scales = np.exp(rng.uniform(np.log(1e-4), np.log(0.5), size=trials))
    for k in range(trials):
        d = rng.standard_normal(m)
        if rng.random() < 0.3:
            # occasional blocky perturbation to probe pooled regions
            i, j = sorted(rng.integers(0, m, size=2))
            d = np.zeros(m)
            d[i:j + 1] = rng.standard_normal()
        q_try = _project(base_q + scales[k] * d, inst.masses,
                         inst.params.q_bar)
        best = max(best, _profit(inst, q_try) - base)
    return best
