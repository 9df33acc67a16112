import numpy as np
import pytest

from qosmenu.contracts import ModelParams, Provenance, verify
from qosmenu.distributions import TypeDistribution
from qosmenu.regular import (InfeasibleError, closed_form_exponential,
                             closed_form_uniform, cumulative_integral,
                             solve_beta, solve_regular)

from conftest import EXP_RATE, SUPPORT


def test_exponential_case_study_beta(exp_params, exp_dist):
    # pinned regression value for the untruncated exponential case study
    assert solve_beta(exp_params, exp_dist) == pytest.approx(1.2095544027,
                                                             abs=1e-6)


def test_beta_grows_with_cost_sensitivity(exp_params, exp_dist):
    betas = [solve_beta(exp_params.replace(a=a), exp_dist)
             for a in (0.47, 0.49, 0.51)]
    assert betas[0] < betas[1] < betas[2]
    np.testing.assert_allclose(betas, [1.2096, 1.3079, 1.4279], atol=2e-4)


def test_renormalized_betas_pinned(exp_params, exp_dist_norm):
    betas = [solve_beta(exp_params.replace(a=a), exp_dist_norm)
             for a in (0.47, 0.49, 0.51)]
    np.testing.assert_allclose(betas, [1.1358, 1.2211, 1.3268], atol=2e-4)


def test_solution_verifies(exp_params, exp_dist, exp_solution):
    rep = verify(exp_params, exp_dist, exp_solution.menu)
    assert rep.passes()
    assert exp_solution.reputation_binding
    assert exp_solution.menu.provenance == Provenance.REGULAR_CLOSED_FORM


def test_menu_shape(exp_solution):
    m = exp_solution.menu
    assert m.grid.size == 512
    assert np.all(np.diff(m.q) > 0)
    assert np.all(np.diff(m.p) > 0)
    assert m.pooling_intervals == ()


def test_q_matches_pointwise_formula(exp_params, exp_dist, exp_solution):
    a, sig = exp_params.a, exp_params.sigma
    g = exp_solution.menu.grid
    expected = np.log((g - 1.0 / EXP_RATE + exp_solution.beta)
                      / (a * sig)) / a
    np.testing.assert_allclose(exp_solution.menu.q, expected, atol=1e-9)


def test_closed_form_exponential_agrees(exp_params, exp_solution):
    cf = closed_form_exponential(exp_params, EXP_RATE)
    np.testing.assert_allclose(cf.menu.q, exp_solution.menu.q, atol=1e-7)
    np.testing.assert_allclose(cf.menu.p, exp_solution.menu.p, atol=1e-7)
    assert cf.beta == pytest.approx(exp_solution.beta, abs=1e-9)


def test_closed_form_uniform_agrees(uni_params, uni_dist, uni_solution):
    cf = closed_form_uniform(uni_params)
    np.testing.assert_allclose(cf.menu.q, uni_solution.menu.q, atol=1e-7)
    np.testing.assert_allclose(cf.menu.p, uni_solution.menu.p, atol=1e-7)


def test_closed_form_uniform_verifies(uni_params, uni_dist):
    cf = closed_form_uniform(uni_params)
    assert verify(uni_params, uni_dist, cf.menu).passes()


def test_infeasible_target_raises(uni_params, uni_dist):
    # mean QoS of 5 is unreachable for uniform types at these parameters
    with pytest.raises(InfeasibleError):
        solve_regular(uni_params.replace(q_bar=5.0), uni_dist)


def test_slack_constraint_when_target_low(exp_params, exp_dist):
    # the unconstrained optimum already clears a modest mean-QoS floor
    sol = solve_regular(exp_params.replace(q_bar=0.5), exp_dist)
    assert not sol.reputation_binding
    assert sol.beta == 0.0
    rep = verify(exp_params.replace(q_bar=0.5), exp_dist, sol.menu)
    assert rep.max_ic_regret <= 1e-6
    assert rep.min_ir_slack >= -1e-9


def test_rent_is_cumulative_qos(exp_solution):
    m = exp_solution.menu
    rent = m.grid * m.q - m.p
    assert rent[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(rent) > 0)


def test_cumulative_integral_exact_for_polynomial():
    g = np.linspace(0.0, 2.0, 11)
    out = cumulative_integral(lambda x: 3.0 * x ** 2, g)
    np.testing.assert_allclose(out, g ** 3, atol=1e-12)


def test_reputation_residual_tiny(exp_params, exp_dist, exp_solution):
    rep = verify(exp_params, exp_dist, exp_solution.menu)
    assert abs(rep.reputation_residual) <= 1e-9
