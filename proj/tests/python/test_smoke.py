"""End-to-end smoke tests for the python bindings."""

import numpy as np
import pytest

import fsar


def test_grid_and_quadrature():
    g = fsar.Grid.uniform(199)
    assert g.size == 199
    assert g.step == pytest.approx(1.0 / 200.0, rel=0, abs=0)
    assert g.point(0) == pytest.approx(0.005)
    # integral of t^2 dt ~ 1/3 by Riemann sum
    vals = np.asarray(g.points) ** 2
    assert fsar.quadrature(vals, g) == pytest.approx(1.0 / 3.0, abs=5e-3)


def test_basis_partition_of_unity():
    basis = fsar.BSplineBasis.cubic(2)
    assert basis.size == 6
    for t in np.linspace(0.0, 1.0, 101):
        assert float(np.sum(basis.eval(t))) == pytest.approx(1.0, abs=1e-12)


def test_simulate_estimate_and_test():
    g = fsar.Grid.uniform(99)
    coefs = fsar.CoefSpec([lambda s: 1.0 + s, lambda s: 2.0 - 0.5 * s])
    data = fsar.simulate(40, 2, 2, 20, fsar.KernelSpec.linear(), coefs,
                         fsar.ErrorSpec(), g, 1234, 1e-8)
    assert data.neumann_converged
    assert data.q.values.shape == (40, 99)
    assert data.x.shape == (40, 2)

    basis = fsar.BSplineBasis.cubic(2)
    design = fsar.DesignSet(data.q, data.w, data.x, basis,
                            max_iv_order=2, add_intercept=False)
    beta = design.fit_beta(0.5)
    assert beta.shape == (2,)
    assert np.all(np.isfinite(beta))

    pen = fsar.PenaltySpec.ridge(fsar.PenaltySpec.lambda_rule(1.0, 40), basis.size)
    theta = design.fit_theta(0.5, pen)
    assert theta.shape == (basis.size,)

    res = fsar.wald_test(design, 0.5, 0.1, 0.9, pen)
    assert 0.0 <= res.p_value <= 1.0
    assert res.reject_at[0.01] <= res.reject_at[0.05] <= res.reject_at[0.10]

    with pytest.raises(ValueError):
        design.fit_beta(1.5)


def test_montecarlo_determinism():
    cfg = fsar.RunConfig()
    cfg.n = 40
    cfg.lattice_rows = 2
    cfg.lattice_cols = 20
    cfg.grid_size = 99
    cfg.t_points = 5
    cfg.lambda_c = [1.0]
    cfg.replications = 2
    cfg.seed = 99
    cfg.threads = 1
    a = fsar.run_montecarlo(cfg)
    b = fsar.run_montecarlo(cfg)
    assert a.completed == 2 and a.failed == 0
    assert a.beta_bias == b.beta_bias
    assert a.beta_rmse == b.beta_rmse
    assert a.cells[0].alpha_rmse == b.cells[0].alpha_rmse


def test_config_validation():
    cfg = fsar.RunConfig()
    cfg.dgp = 9
    with pytest.raises(ValueError):
        cfg.validate()
