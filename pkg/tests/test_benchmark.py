import numpy as np
import pytest

from qosmenu.benchmark import information_cost, solve_full_info
from qosmenu.contracts import Provenance, verify

from conftest import build_bimodal_dist


def test_benchmark_menu_structure(exp_params, exp_dist):
    sol = solve_full_info(exp_params, exp_dist)
    m = sol.menu
    assert m.provenance == Provenance.FULL_INFO_BENCHMARK
    # first-best pricing extracts the whole surplus: p = delta q
    np.testing.assert_allclose(m.p, m.grid * m.q, atol=1e-12)
    assert np.all(np.diff(m.q) > 0)


def test_benchmark_meets_mean_qos(exp_params, exp_dist):
    sol = solve_full_info(exp_params, exp_dist)
    rep = verify(exp_params, exp_dist, sol.menu)
    assert abs(rep.reputation_residual) <= 1e-9


def test_benchmark_profit_exceeds_hidden(exp_params, exp_dist, exp_solution):
    bench = solve_full_info(exp_params, exp_dist)
    rep_b = verify(exp_params, exp_dist, bench.menu)
    rep_h = verify(exp_params, exp_dist, exp_solution.menu)
    assert rep_b.expected_profit > rep_h.expected_profit


def test_information_cost_nonnegative_everywhere(exp_params, exp_dist,
                                                 uni_params, uni_dist,
                                                 bimodal_params):
    assert information_cost(exp_params, exp_dist) >= 0.0
    assert information_cost(uni_params, uni_dist) >= 0.0
    assert information_cost(bimodal_params, build_bimodal_dist()) >= 0.0


def test_benchmark_beta_differs_from_screening_beta(exp_params, exp_dist,
                                                    exp_solution):
    bench = solve_full_info(exp_params, exp_dist)
    # the first-best multiplier has no virtual-shift correction in it
    assert bench.beta != pytest.approx(exp_solution.beta, abs=1e-3)
