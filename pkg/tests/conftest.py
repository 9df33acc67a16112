"""Shared fixtures: case-study instances and their solved menus.

Everything heavy is session scoped so the acceptance gate and the unit
tests reuse the same solves.
"""

import numpy as np
import pytest

from qosmenu.contracts import ModelParams
from qosmenu.distributions import TypeDistribution
from qosmenu.ironing import solve_general
from qosmenu.regular import solve_regular

SUPPORT = (0.0, 4.0)
EXP_RATE = 0.952


@pytest.fixture(scope="session")
def exp_params():
    return ModelParams(a=0.47, sigma=0.16, q_bar=5.0,
                       delta_lo=SUPPORT[0], delta_hi=SUPPORT[1])


@pytest.fixture(scope="session")
def exp_dist():
    """Untruncated exponential density used verbatim on the support."""
    return TypeDistribution.exponential(EXP_RATE, *SUPPORT, renormalize=False)


@pytest.fixture(scope="session")
def exp_dist_norm():
    return TypeDistribution.exponential(EXP_RATE, *SUPPORT, renormalize=True)


@pytest.fixture(scope="session")
def exp_solution(exp_params, exp_dist):
    return solve_regular(exp_params, exp_dist)


@pytest.fixture(scope="session")
def uni_params():
    # q_bar = 5 is below the feasible floor for uniform types on [0, 4]
    # at these cost parameters, so the uniform case runs at q_bar = 9.
    return ModelParams(a=0.47, sigma=0.16, q_bar=9.0,
                       delta_lo=SUPPORT[0], delta_hi=SUPPORT[1])


@pytest.fixture(scope="session")
def uni_dist():
    return TypeDistribution.uniform(*SUPPORT)


@pytest.fixture(scope="session")
def uni_solution(uni_params, uni_dist):
    return solve_regular(uni_params, uni_dist)


def build_bimodal_dist(n_points: int = 401) -> TypeDistribution:
    """Two normal humps plus a uniform floor; irregular in the valley."""
    lo, hi = SUPPORT
    x = np.linspace(lo, hi, n_points)
    s = 0.45
    hump = (np.exp(-0.5 * ((x - 1.0) / s) ** 2)
            + np.exp(-0.5 * ((x - 3.0) / s) ** 2)) / (2 * s * np.sqrt(2 * np.pi))
    dens = 0.85 * hump + 0.15 / (hi - lo)
    return TypeDistribution.empirical(x, dens, renormalize=True)


@pytest.fixture(scope="session")
def bimodal_dist():
    return build_bimodal_dist()


@pytest.fixture(scope="session")
def bimodal_params():
    return ModelParams(a=0.47, sigma=0.16, q_bar=12.0,
                       delta_lo=SUPPORT[0], delta_hi=SUPPORT[1])


@pytest.fixture(scope="session")
def bimodal_solution(bimodal_params, bimodal_dist):
    return solve_general(bimodal_params, bimodal_dist)


def build_left_edge_dist(n_points: int = 401) -> TypeDistribution:
    """Sharp spike at the bottom of the support; pools from delta_lo."""
    lo, hi = SUPPORT
    x = np.linspace(lo, hi, n_points)
    dens = 0.3 * 8.0 * np.exp(-8.0 * x) + 0.7 / (hi - lo)
    return TypeDistribution.empirical(x, dens, renormalize=True)


@pytest.fixture(scope="session")
def left_edge_dist():
    return build_left_edge_dist()


@pytest.fixture(scope="session")
def left_edge_solution(exp_params, left_edge_dist):
    return solve_general(exp_params, left_edge_dist)
