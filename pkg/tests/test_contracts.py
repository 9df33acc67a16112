import numpy as np
import pytest

from qosmenu.contracts import (ContractMenu, ModelParams, Provenance, cost,
                               envelope_prices, make_grid, phi, user_payoff,
                               verify)


def _toy_menu():
    grid = np.linspace(0.0, 4.0, 9)
    q = np.linspace(1.0, 3.0, 9)
    p = envelope_prices(grid, q)
    return ContractMenu(grid=grid, q=q, p=p, beta=0.5,
                        pooling_intervals=(), provenance=Provenance.REGULAR_CLOSED_FORM)


def test_phi_and_cost():
    assert phi(2.0, 3.0) == pytest.approx(6.0)
    par = ModelParams(a=0.5, sigma=0.2, q_bar=5.0, delta_lo=0.0, delta_hi=4.0)
    assert cost(par, 2.0) == pytest.approx(0.2 * np.expm1(1.0))
    assert cost(par, 0.0) == 0.0


def test_make_grid_shape_and_refinement():
    g = make_grid(0.0, 4.0, n=128)
    assert g[0] == 0.0 and g[-1] == 4.0
    assert np.all(np.diff(g) > 0)
    # refinement concentrates nodes near the lower end
    assert g[1] - g[0] < g[-1] - g[-2]


def test_menu_interpolation_and_domain():
    m = _toy_menu()
    assert m.q_at(0.0) == pytest.approx(1.0)
    assert m.q_at(4.0) == pytest.approx(3.0)
    assert m.q_at(2.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        m.q_at(4.001)


def test_envelope_prices_zero_rent_at_bottom():
    m = _toy_menu()
    # bottom type pays its full surplus, so its payoff is exactly zero
    assert user_payoff(m, 0.0, 0.0) == pytest.approx(0.0, abs=1e-12)
    # payoffs increase with the true type under truthful reporting
    u = [user_payoff(m, d, d) for d in np.linspace(0.0, 4.0, 9)]
    assert np.all(np.diff(u) > 0)


def test_envelope_menu_is_incentive_compatible():
    from qosmenu.distributions import TypeDistribution
    m = _toy_menu()
    par = ModelParams(a=0.47, sigma=0.16, q_bar=2.0, delta_lo=0.0,
                      delta_hi=4.0)
    rep = verify(par, TypeDistribution.uniform(0.0, 4.0), m)
    assert rep.max_ic_regret <= 1e-9
    assert rep.min_ir_slack >= -1e-12
    assert rep.reputation_residual == pytest.approx(0.0, abs=1e-12)


def test_verify_detects_broken_ic():
    m = _toy_menu()
    p_bad = m.p.copy()
    p_bad[4] -= 0.5    # one contract becomes a bargain for everyone
    bad = ContractMenu(grid=m.grid, q=m.q, p=p_bad, beta=m.beta,
                       pooling_intervals=(), provenance=Provenance.REGULAR_CLOSED_FORM)
    from qosmenu.distributions import TypeDistribution
    par = ModelParams(a=0.47, sigma=0.16, q_bar=2.0, delta_lo=0.0,
                      delta_hi=4.0)
    rep = verify(par, TypeDistribution.uniform(0.0, 4.0), bad)
    assert rep.max_ic_regret > 0.1
    assert not rep.passes()


def test_csv_round_trip(tmp_path):
    m = _toy_menu()
    csv = tmp_path / "menu.csv"
    meta = tmp_path / "menu.meta.json"
    m.to_csv(csv)
    m.write_meta(meta)
    back = ContractMenu.from_csv(csv, meta)
    np.testing.assert_array_equal(back.grid, m.grid)
    np.testing.assert_array_equal(back.q, m.q)
    np.testing.assert_array_equal(back.p, m.p)
    assert back.beta == m.beta
    assert back.provenance == m.provenance


def test_grid_validation():
    bad = np.array([0.0, 1.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        ContractMenu(grid=bad, q=np.zeros(4), p=np.zeros(4), beta=0.0,
                     pooling_intervals=(), provenance=Provenance.REGULAR_CLOSED_FORM)
    with pytest.raises(ValueError):
        ContractMenu(grid=np.linspace(0, 4, 5), q=np.zeros(4),
                     p=np.zeros(5), beta=0.0, pooling_intervals=(),
                     provenance=Provenance.REGULAR_CLOSED_FORM)
