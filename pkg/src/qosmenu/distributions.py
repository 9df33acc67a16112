"""User-type distributions on a bounded support.

A :class:`TypeDistribution` wraps a density f and distribution function F on
[delta_lo, delta_hi], together with the quantities the contract solvers need:
the virtual shift (F - 1)/f + delta, a regularity diagnostic, inverse-transform
sampling, and a maximum-likelihood fit from histogram data.

By default the parametric densities are used verbatim on the support without
rescaling the truncated mass (``renormalize=False``); pass ``renormalize=True``
to turn them into proper probability distributions on the support.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.integrate import quad
from scipy.interpolate import interp1d


class DistKind(Enum):
    UNIFORM = "uniform"
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"
    WEIBULL = "weibull"
    TRUNCATED_NORMAL = "truncated_normal"
    EMPIRICAL = "empirical"


class DomainError(ValueError):
    """Evaluation point outside [delta_lo, delta_hi]."""


class NumericError(ArithmeticError):
    """A numerically unusable quantity (e.g. pdf underflow)."""


class FitError(ValueError):
    """Histogram fitting failed."""


# density floor for the empirical piecewise kind; keeps f > 0 everywhere
_EMPIRICAL_FLOOR = 1e-12
# evaluations of near-singular pdfs are pushed this far off the lower edge
_EDGE_CLAMP = 1e-9


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of probing 2 f^2 + (1 - F) f' on a grid.

    ``regular`` means the strict inequality holds everywhere probed, in which
    case the unironed candidate QoS curve is monotone.  ``fully_pooling``
    means (1 - F)/f is nondecreasing across the whole support, the regime in
    which a single constant contract is optimal.
    """

    regular: bool
    violating_intervals: tuple[tuple[float, float], ...]
    fully_pooling: bool


@dataclass(frozen=True)
class TypeDistribution:
    """Distribution of the hidden user type on [delta_lo, delta_hi].

    Parameters live in ``params`` keyed per kind:
      exponential: rate; gamma: shape, rate; weibull: shape, rate;
      truncated_normal: mean, stddev; empirical: breakpoints, densities.
    """

    kind: DistKind
    delta_lo: float
    delta_hi: float
    renormalize: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.delta_lo >= 0:
            raise ValueError("delta_lo must be >= 0")
        if not self.delta_hi > self.delta_lo:
            raise ValueError("delta_hi must exceed delta_lo")
        if self.kind is DistKind.EMPIRICAL:
            bp = np.asarray(self.params["breakpoints"], dtype=float)
            de = np.asarray(self.params["densities"], dtype=float)
            if bp.ndim != 1 or bp.size < 2 or bp.size != de.size:
                raise ValueError("empirical kind needs matching breakpoints/densities")
            if np.any(np.diff(bp) <= 0):
                raise ValueError("breakpoints must be strictly increasing")
        # touch the raw pdf once so invalid parameters fail at construction
        self._pdf_raw(np.array([self._clamped(self.delta_lo)]))

    # ---------------------------------------------------------------- helpers

    @staticmethod
    def uniform(lo: float, hi: float) -> "TypeDistribution":
        return TypeDistribution(DistKind.UNIFORM, lo, hi)

    @staticmethod
    def exponential(rate: float, lo: float, hi: float,
                    renormalize: bool = False) -> "TypeDistribution":
        if rate <= 0:
            raise ValueError("rate must be positive")
        return TypeDistribution(DistKind.EXPONENTIAL, lo, hi, renormalize,
                                {"rate": rate})

    @staticmethod
    def gamma(shape: float, rate: float, lo: float, hi: float,
              renormalize: bool = False) -> "TypeDistribution":
        return TypeDistribution(DistKind.GAMMA, lo, hi, renormalize,
                                {"shape": shape, "rate": rate})

    @staticmethod
    def weibull(shape: float, rate: float, lo: float, hi: float,
                renormalize: bool = False) -> "TypeDistribution":
        return TypeDistribution(DistKind.WEIBULL, lo, hi, renormalize,
                                {"shape": shape, "rate": rate})

    @staticmethod
    def truncated_normal(mean: float, stddev: float, lo: float,
                         hi: float) -> "TypeDistribution":
        # always renormalized: an untruncated normal is not supported on [lo, hi]
        return TypeDistribution(DistKind.TRUNCATED_NORMAL, lo, hi, True,
                                {"mean": mean, "stddev": stddev})

    @staticmethod
    def empirical(breakpoints: Sequence[float], densities: Sequence[float],
                  renormalize: bool = True) -> "TypeDistribution":
        bp = [float(b) for b in breakpoints]
        de = [max(float(d), _EMPIRICAL_FLOOR) for d in densities]
        return TypeDistribution(DistKind.EMPIRICAL, bp[0], bp[-1], renormalize,
                                {"breakpoints": bp, "densities": de})

    @staticmethod
    def from_spec(spec: dict) -> "TypeDistribution":
        """Build from a JSON-style dict: {"kind", "support", "renormalize", ...}."""
        kind = DistKind(spec["kind"])
        lo, hi = spec["support"]
        ren = bool(spec.get("renormalize", False))
        if kind is DistKind.UNIFORM:
            return TypeDistribution.uniform(lo, hi)
        if kind is DistKind.EXPONENTIAL:
            return TypeDistribution.exponential(spec["rate"], lo, hi, ren)
        if kind is DistKind.GAMMA:
            return TypeDistribution.gamma(spec["shape"], spec["rate"], lo, hi, ren)
        if kind is DistKind.WEIBULL:
            return TypeDistribution.weibull(spec["shape"], spec["rate"], lo, hi, ren)
        if kind is DistKind.TRUNCATED_NORMAL:
            return TypeDistribution.truncated_normal(spec["mean"], spec["stddev"], lo, hi)
        return TypeDistribution.empirical(spec["breakpoints"], spec["densities"], ren)

    def to_spec(self) -> dict:
        spec = {"kind": self.kind.value,
                "support": [self.delta_lo, self.delta_hi],
                "renormalize": self.renormalize}
        spec.update(self.params)
        return spec

    # ------------------------------------------------------------ evaluation

    def _clamped(self, d: float) -> float:
        # gamma/weibull shapes < 1 blow up at 0; probe just inside the edge
        if self.kind in (DistKind.GAMMA, DistKind.WEIBULL) and d <= self.delta_lo:
            return self.delta_lo + _EDGE_CLAMP
        return d

    def _check_domain(self, d):
        arr = np.asarray(d, dtype=float)
        if np.any(arr < self.delta_lo - 1e-12) or np.any(arr > self.delta_hi + 1e-12):
            raise DomainError(
                f"type {d} outside support [{self.delta_lo}, {self.delta_hi}]")

    def _pdf_raw(self, d: np.ndarray) -> np.ndarray:
        p = self.params
        if self.kind is DistKind.UNIFORM:
            return np.full_like(d, 1.0 / (self.delta_hi - self.delta_lo))
        if self.kind is DistKind.EXPONENTIAL:
            r = p["rate"]
            return r * np.exp(-r * d)
        if self.kind is DistKind.GAMMA:
            a, r = p["shape"], p["rate"]
            return stats.gamma.pdf(d, a, scale=1.0 / r)
        if self.kind is DistKind.WEIBULL:
            a, r = p["shape"], p["rate"]
            # f = r a d^{a-1} exp(-r d^a)
            with np.errstate(divide="ignore"):
                return r * a * np.power(d, a - 1.0) * np.exp(-r * np.power(d, a))
        if self.kind is DistKind.TRUNCATED_NORMAL:
            return stats.norm.pdf(d, loc=p["mean"], scale=p["stddev"])
        bp = np.asarray(p["breakpoints"])
        de = np.asarray(p["densities"])
        return np.maximum(np.interp(d, bp, de), _EMPIRICAL_FLOOR)

    def _cdf_raw(self, d: np.ndarray) -> np.ndarray:
        p = self.params
        if self.kind is DistKind.UNIFORM:
            return (d - self.delta_lo) / (self.delta_hi - self.delta_lo)
        if self.kind is DistKind.EXPONENTIAL:
            r = p["rate"]
            return 1.0 - np.exp(-r * d)
        if self.kind is DistKind.GAMMA:
            a, r = p["shape"], p["rate"]
            return stats.gamma.cdf(d, a, scale=1.0 / r)
        if self.kind is DistKind.WEIBULL:
            a, r = p["shape"], p["rate"]
            return 1.0 - np.exp(-r * np.power(np.maximum(d, 0.0), a))
        if self.kind is DistKind.TRUNCATED_NORMAL:
            return stats.norm.cdf(d, loc=p["mean"], scale=p["stddev"])
        bp = np.asarray(p["breakpoints"])
        de = np.asarray(np.maximum(p["densities"], _EMPIRICAL_FLOOR))
        # trapezoid cumulative of the piecewise-linear density
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (de[1:] + de[:-1]) * np.diff(bp))])
        d = np.asarray(d, dtype=float)
        idx = np.clip(np.searchsorted(bp, d, side="right") - 1, 0, bp.size - 2)
        x0 = bp[idx]
        f0 = de[idx]
        slope = (de[idx + 1] - de[idx]) / (bp[idx + 1] - bp[idx])
        dx = d - x0
        return cum[idx] + f0 * dx + 0.5 * slope * dx * dx

    def _pdf_prime_raw(self, d: np.ndarray) -> np.ndarray:
        p = self.params
        if self.kind is DistKind.UNIFORM:
            return np.zeros_like(d)
        if self.kind is DistKind.EXPONENTIAL:
            r = p["rate"]
            return -r * r * np.exp(-r * d)
        if self.kind is DistKind.GAMMA:
            a, r = p["shape"], p["rate"]
            f = stats.gamma.pdf(d, a, scale=1.0 / r)
            return f * ((a - 1.0) / d - r)
        if self.kind is DistKind.WEIBULL:
            a, r = p["shape"], p["rate"]
            f = self._pdf_raw(d)
            return f * ((a - 1.0) / d - r * a * np.power(d, a - 1.0))
        if self.kind is DistKind.TRUNCATED_NORMAL:
            m, s = p["mean"], p["stddev"]
            f = stats.norm.pdf(d, loc=m, scale=s)
            return -f * (d - m) / (s * s)
        # empirical: central differences, step scaled to the support
        h = (self.delta_hi - self.delta_lo) / 1.0e4
        hi = np.minimum(d + h, self.delta_hi)
        lo = np.maximum(d - h, self.delta_lo)
        return (self._pdf_raw(hi) - self._pdf_raw(lo)) / (hi - lo)

    @property
    def _mass(self) -> float:
        return float(self._cdf_raw(np.array([self.delta_hi]))[0]
                     - self._cdf_raw(np.array([self.delta_lo]))[0])

    def pdf(self, d):
        """Density f(delta); strictly positive on the support."""
        self._check_domain(d)
        scalar = np.isscalar(d)
        x = np.atleast_1d(np.asarray(d, dtype=float))
        x = np.array([self._clamped(v) for v in x])
        out = self._pdf_raw(x)
        if self.renormalize:
            out = out / self._mass
        return float(out[0]) if scalar else out

    def cdf(self, d):
        """Distribution function F(delta) on the support."""
        self._check_domain(d)
        scalar = np.isscalar(d)
        x = np.atleast_1d(np.asarray(d, dtype=float))
        out = self._cdf_raw(x) - self._cdf_raw(np.array([self.delta_lo]))
        if self.renormalize:
            out = out / self._mass
        return float(out[0]) if scalar else out

    def pdf_prime(self, d):
        """df/d delta, analytic for parametric kinds."""
        self._check_domain(d)
        scalar = np.isscalar(d)
        x = np.atleast_1d(np.asarray(d, dtype=float))
        x = np.array([self._clamped(v) for v in x])
        out = self._pdf_prime_raw(x)
        if self.renormalize:
            out = out / self._mass
        return float(out[0]) if scalar else out

    def virtual_shift(self, d):
        """(F(delta) - 1)/f(delta) + delta, the distribution-adjusted marginal value."""
        self._check_domain(d)
        scalar = np.isscalar(d)
        x = np.atleast_1d(np.asarray(d, dtype=float))
        f = np.atleast_1d(self.pdf(x))
        if np.any(f < 1e-300):
            raise NumericError("pdf underflow in virtual shift")
        F = np.atleast_1d(self.cdf(x))
        out = (F - 1.0) / f + x
        return float(out[0]) if scalar else out

    def kink_points(self) -> np.ndarray:
        """Interior points where the density is not smooth (empirical kind)."""
        if self.kind is DistKind.EMPIRICAL:
            return np.asarray(self.params["breakpoints"], dtype=float)[1:-1]
        return np.empty(0)

    # ------------------------------------------------------------ diagnostics

    def regularity_check(self, grid_n: int = 512) -> RegularityReport:
        """Probe 2 f^2 + (1-F) f' and the monotonicity of (1-F)/f on a grid."""
        if grid_n < 16:
            raise ValueError("grid_n must be >= 16")
        lo = self._clamped(self.delta_lo)
        grid = np.linspace(lo, self.delta_hi, grid_n)
        f = np.atleast_1d(self.pdf(grid))
        F = np.atleast_1d(self.cdf(grid))
        fp = np.atleast_1d(self.pdf_prime(grid))
        cond = 2.0 * f * f + (1.0 - F) * fp
        bad = cond <= 0
        intervals = []
        i = 0
        while i < grid_n:
            if bad[i]:
                j = i
                while j + 1 < grid_n and bad[j + 1]:
                    j += 1
                intervals.append((float(grid[i]), float(grid[j])))
                i = j + 1
            else:
                i += 1
        hazard_inv = (1.0 - F) / f
        fully = bool(np.all(np.diff(hazard_inv) >= -1e-12))
        if fully and np.all(np.abs(np.diff(hazard_inv)) < 1e-10):
            # constant hazard (untruncated exponential): regular by the strict
            # inequality, not pooling
            fully = False
        return RegularityReport(regular=not bool(bad.any()),
                                violating_intervals=tuple(intervals),
                                fully_pooling=fully)

    # --------------------------------------------------------------- sampling

    def sample(self, n: int, seed: int) -> np.ndarray:
        """n i.i.d. draws from the distribution renormalized to the support."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        u = rng.random(n)
        Flo = float(self._cdf_raw(np.array([self.delta_lo]))[0])
        Fhi = float(self._cdf_raw(np.array([self.delta_hi]))[0])
        target = Flo + u * (Fhi - Flo)
        p = self.params
        if self.kind is DistKind.UNIFORM:
            out = self.delta_lo + u * (self.delta_hi - self.delta_lo)
        elif self.kind is DistKind.EXPONENTIAL:
            out = -np.log1p(-target) / p["rate"]
        elif self.kind is DistKind.GAMMA:
            out = stats.gamma.ppf(target, p["shape"], scale=1.0 / p["rate"])
        elif self.kind is DistKind.WEIBULL:
            out = np.power(-np.log1p(-target) / p["rate"], 1.0 / p["shape"])
        elif self.kind is DistKind.TRUNCATED_NORMAL:
            out = stats.norm.ppf(target, loc=p["mean"], scale=p["stddev"])
        else:
            grid = np.linspace(self.delta_lo, self.delta_hi, 4097)
            F = self._cdf_raw(grid)
            inv = interp1d(F, grid, bounds_error=False,
                           fill_value=(self.delta_lo, self.delta_hi))
            out = inv(target)
        return np.clip(out, self.delta_lo, self.delta_hi)

    # ---------------------------------------------------------------- fitting


def fit_exponential(histogram: Sequence[tuple[float, float]]) -> TypeDistribution:
    """MLE exponential rate from a (bin_center, count) histogram.

    The exponential MLE is 1 over the sample mean, here the count-weighted
    mean of the bin centers.  The returned distribution spans
    [0, max bin center]; adjust the support afterward if needed.
    """
    if len(histogram) < 2:
        raise FitError("need at least 2 histogram bins")
    centers = np.array([b for b, _ in histogram], dtype=float)
    counts = np.array([c for _, c in histogram], dtype=float)
    if np.any(counts < 0):
        raise FitError("negative bin count")
    total = counts.sum()
    if total <= 0:
        raise FitError("all bin counts are zero")
    mean = float(np.dot(centers, counts) / total)
    if mean <= 0:
        raise FitError("nonpositive weighted mean")
    rate = 1.0 / mean
    return TypeDistribution.exponential(rate, 0.0, float(centers.max()))


def load_histogram_csv(path) -> list[tuple[float, float]]:
    """Read a `bin_center,count` CSV."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append((float(row["bin_center"]), float(row["count"])))
    return out


def load_distribution(path) -> TypeDistribution:
    """Read a distribution spec from a JSON file."""
    with open(path) as fh:
        return TypeDistribution.from_spec(json.load(fh))
