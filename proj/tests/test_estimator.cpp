#include <doctest.h>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fsar/estimator.hpp"
#include "fsar/rng.hpp"

using namespace fsar;

namespace {

SimulatedDataset small_dataset(int n, int rows, int cols, std::uint64_t seed) {
  const Grid g = Grid::uniform(99);
  CoefSpec coefs({[](double s) { return 1.0 + s; },
                  [](double s) { return 2.0 - 0.5 * s; }});
  return simulate(n, 2, rows, cols, KernelSpec::linear(), coefs, ErrorSpec{}, g,
                  seed, 1e-10);
}

}  // namespace

TEST_CASE("PenaltySpec validates shape, symmetry, and definiteness") {
  CHECK_THROWS_AS(PenaltySpec::ridge(-1.0, 4), DomainError);
  const PenaltySpec ok = PenaltySpec::ridge(0.5, 4);
  ok.validate(4);
  CHECK_THROWS_AS(ok.validate(5), DimensionError);

  PenaltySpec asym{Eigen::MatrixXd::Identity(3, 3), 1.0};
  asym.d(0, 2) = 0.4;
  CHECK_THROWS_AS(asym.validate(3), DataError);

  PenaltySpec indef{-Eigen::MatrixXd::Identity(3, 3), 1.0};
  CHECK_THROWS_AS(indef.validate(3), DataError);

  // the tuning rate lambda_c * n^(-3/5)
  CHECK(PenaltySpec::lambda_rule(2.0, 400) ==
        doctest::Approx(2.0 * std::pow(400.0, -0.6)).epsilon(1e-15));
  CHECK(PenaltySpec::lambda_rule(1.0, 1024) ==
        doctest::Approx(0.015625).epsilon(1e-14));
  CHECK(PenaltySpec::lambda_rule(1.0, 1600) < PenaltySpec::lambda_rule(1.0, 400));
  CHECK_THROWS_AS(PenaltySpec::lambda_rule(-0.1, 100), DomainError);
  CHECK_THROWS_AS(PenaltySpec::lambda_rule(1.0, 0), DomainError);
}

TEST_CASE("DesignSet rejects malformed input") {
  const SimulatedDataset data = small_dataset(24, 4, 6, 31);
  const BSplineBasis basis = BSplineBasis::cubic(2);

  // covariate rows mismatch
  CHECK_THROWS_AS(DesignSet(data.q, data.w, Eigen::MatrixXd::Zero(10, 2), basis),
                  DimensionError);
  // NaN covariate
  Eigen::MatrixXd bad = data.x;
  bad(3, 1) = std::nan("");
  CHECK_THROWS_AS(DesignSet(data.q, data.w, bad, basis), DataError);
  // name count mismatch
  CHECK_THROWS_AS(DesignSet(data.q, data.w, data.x, basis, 2, true,
                            Eigen::MatrixXd(), {"only_one"}),
                  DimensionError);
  // more instruments than units: n = 24, 7 covariates would need
  // 2*8 + 8 = 24 columns with an intercept -- push over with extras
  CHECK_THROWS_AS(DesignSet(data.q, data.w, data.x, basis, 2, true,
                            Eigen::MatrixXd::Identity(24, 20)),
                  DataError);

  // rank-deficient X: duplicate column, error names the culprit
  Eigen::MatrixXd dup(24, 3);
  dup.leftCols(2) = data.x;
  dup.col(2) = data.x.col(0);
  try {
    DesignSet ds(data.q, data.w, dup, basis);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("rank deficient") != std::string::npos);
  }
}

TEST_CASE("duplicate instrument columns only warn") {
  const SimulatedDataset data = small_dataset(24, 4, 6, 32);
  const BSplineBasis basis = BSplineBasis::cubic(2);
  // a constant extra instrument duplicates the intercept column of Z
  const DesignSet ds(data.q, data.w, data.x, basis, 2, true,
                     Eigen::MatrixXd::Ones(24, 1));
  bool saw_rank_warning = false;
  for (const auto& w : ds.warnings())
    if (w.find("rank") != std::string::npos) saw_rank_warning = true;
  CHECK(saw_rank_warning);
}

TEST_CASE("order-condition shortfall warns") {
  const SimulatedDataset data = small_dataset(24, 4, 6, 33);
  // one lag order of [1 | x1 x2] plus X itself: 5 instruments for 2 + 6 unknowns
  const DesignSet ds(data.q, data.w, data.x, BSplineBasis::cubic(2), 1, false);
  bool saw = false;
  for (const auto& w : ds.warnings())
    if (w.find("order condition") != std::string::npos) saw = true;
  CHECK(saw);
}

TEST_CASE("internal blocks match a dense-projector oracle") {
  const SimulatedDataset data = small_dataset(25, 5, 5, 7);
  const Grid& g = data.q.grid();
  // a K = 3 basis keeps the concentration matrix comfortably full rank at
  // n = 25, so quantities that pass through a generalized inverse are pinned
  // down and can be compared against an independent reconstruction
  const BSplineBasis basis(2, {});
  const DesignSet ds(data.q, data.w, data.x, basis, 2, true);
  const int n = 25;

  // reconstruct every block with explicit n x n projectors
  Eigen::MatrixXd x(n, 3);
  x.col(0).setOnes();
  x.rightCols(2) = data.x;
  const Eigen::MatrixXd phi = basis.eval_on(g);
  const Eigen::MatrixXd rbar =
      data.w.lag(g.step() * (data.q.values() * phi));
  CHECK((ds.rbar() - rbar).cwiseAbs().maxCoeff() <= 1e-10);

  Eigen::MatrixXd z(n, 6 + 3);
  z.leftCols(6) = build_instruments(data.w, data.x, 2);
  z.rightCols(3) = x;
  CHECK((ds.z() - z).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd pz_proj = z * sym_pinv(z.transpose() * z) * z.transpose();
  const Eigen::MatrixXd mx =
      Eigen::MatrixXd::Identity(n, n) -
      x * (x.transpose() * x).ldlt().solve(x.transpose());
  const Eigen::MatrixXd rx = mx * rbar;
  const Eigen::MatrixXd arx = rx.transpose() * pz_proj * rx;
  CHECK((ds.arx() - arx).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((ds.umz() - pz_proj * rx).cwiseAbs().maxCoeff() <= 1e-8);

  // projecting umz onto span(Z) again changes nothing (idempotence)
  CHECK((pz_proj * ds.umz() - ds.umz()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((ds.zt_rx() - z.transpose() * rx).cwiseAbs().maxCoeff() <= 1e-8);
  // X sits in the last three instrument columns, so the bottom rows of Z'Rx
  // are X'Rx: residualization makes them vanish
  CHECK(ds.zt_rx().bottomRows(3).cwiseAbs().maxCoeff() <= 1e-9);

  const Eigen::MatrixXd gr = rbar.transpose() * pz_proj * rbar;
  const Eigen::MatrixXd s_mat =
      pz_proj * rbar * sym_pinv(gr) * rbar.transpose() * pz_proj;
  const Eigen::MatrixXd is = Eigen::MatrixXd::Identity(n, n) - s_mat;
  const Eigen::MatrixXd bread = x.transpose() * is * x;

  const double s_eval = 0.5;
  const Eigen::VectorXd qs = data.q.values_at(s_eval);

  const Eigen::VectorXd beta_oracle = bread.ldlt().solve(x.transpose() * is * qs);
  const Eigen::VectorXd beta = ds.fit_beta(s_eval);
  CHECK((beta - beta_oracle).cwiseAbs().maxCoeff() <= 1e-8);

  const PenaltySpec pen = PenaltySpec::ridge(0.37, basis.size());
  const Eigen::VectorXd rhs = rx.transpose() * pz_proj * qs;
  const Eigen::VectorXd theta_oracle =
      (arx + pen.lambda * n * pen.d).ldlt().solve(rhs);
  CHECK((ds.fit_theta(s_eval, pen) - theta_oracle).cwiseAbs().maxCoeff() <= 1e-8);

  const Eigen::VectorXd theta_chk_oracle = sym_pinv(arx) * rhs;
  const Eigen::VectorXd theta_chk = ds.theta_check(s_eval);
  CHECK((theta_chk - theta_chk_oracle).cwiseAbs().maxCoeff() <= 1e-8);

  const Eigen::VectorXd resid = ds.residuals(s_eval, beta, theta_chk);
  const Eigen::VectorXd resid_oracle = qs - rbar * theta_chk - x * beta;
  CHECK((resid - resid_oracle).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((ds.residuals(s_eval) - resid).cwiseAbs().maxCoeff() <= 1e-10);

  // sandwich for beta: n^2 * bread^-1 (X'(I-S) V (I-S)X / n) bread^-1
  const Eigen::MatrixXd v = resid.array().square().matrix().asDiagonal();
  const Eigen::MatrixXd meat = x.transpose() * is * v * is * x / n;
  const Eigen::MatrixXd bcov_oracle =
      static_cast<double>(n) * n *
      bread.ldlt().solve(Eigen::MatrixXd(bread.ldlt().solve(meat).transpose()));
  const Eigen::MatrixXd bcov = ds.beta_cov(resid);
  CHECK((bcov - bcov_oracle).cwiseAbs().maxCoeff() <=
        1e-8 * std::max(1.0, bcov_oracle.cwiseAbs().maxCoeff()));

  // sandwich for alpha
  const Eigen::MatrixXd umz = pz_proj * rx;
  const Eigen::MatrixXd inner = umz.transpose() * v * umz / n;
  const Eigen::MatrixXd sig = arx / n + pen.lambda * pen.d;
  const Eigen::MatrixXd acov_oracle =
      sig.ldlt().solve(Eigen::MatrixXd(sig.ldlt().solve(inner).transpose()));
  const Eigen::MatrixXd acov = ds.alpha_cov_matrix(pen, resid);
  CHECK((acov - acov_oracle).cwiseAbs().maxCoeff() <=
        1e-8 * std::max(1.0, acov_oracle.cwiseAbs().maxCoeff()));

  const double t_eval = 0.35;
  const Eigen::VectorXd phi_t = basis.eval(t_eval);
  const double se_oracle = std::sqrt(phi_t.dot(acov_oracle * phi_t) / n);
  CHECK(ds.alpha_se(t_eval, pen, resid) ==
        doctest::Approx(se_oracle).epsilon(1e-8));
  CHECK(ds.eval_alpha(theta_chk, t_eval) ==
        doctest::Approx(phi_t.dot(theta_chk)).epsilon(1e-12));

  CHECK_THROWS_AS(ds.fit_beta(0.0), DomainError);
  CHECK_THROWS_AS(ds.fit_beta(1.0), DomainError);
  CHECK_THROWS_AS(ds.fit_theta(-0.2, pen), DomainError);
}

TEST_CASE("in-span responses at error-free points are recovered exactly") {
  // alpha(t, s) = phi(t)' c, constant in the evaluation point s, and
  // functional errors that vanish at the three evaluation points.  At each
  // chosen s the response is then exactly rbar c + X beta(s), so the
  // two-stage estimator must return c and beta(s) to solver precision.
  //
  // Identification needs care: the instruments predict only the part of the
  // lagged scores driven by the covariate curves, so with d < K the
  // concentration matrix is near-singular and the unpenalized solution is
  // noise-dominated.  Using K covariates whose coefficient curves are the
  // basis functions themselves makes that signal block the basis Gram
  // matrix -- symmetric positive definite -- and recovery is exact.
  const Grid g = Grid::uniform(99);
  const BSplineBasis basis = BSplineBasis::cubic(2);
  const Eigen::MatrixXd phi = basis.eval_on(g);
  const int d = basis.size();
  Eigen::VectorXd c(6);
  c << 0.25, -0.1, 0.3, 0.15, -0.2, 0.1;
  const Eigen::MatrixXd a = (phi * c) * Eigen::RowVectorXd::Ones(g.size());

  const int n = 60, rows = 6, cols = 10;
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r < rows; ++r)
    for (int col = 0; col < cols; ++col) cells.emplace_back(r, col);
  const SpatialWeights w = SpatialWeights::rook_lattice(rows, cols, cells);

  Rng rng(4711);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();

  Eigen::MatrixXd u(n, g.size());
  for (int i = 0; i < n; ++i) {
    double pc[6];
    for (double& v : pc) v = rng.normal();
    for (int k = 0; k < g.size(); ++k) {
      const double s = g.point(k);
      double eta = 0.0, sp = 1.0;
      for (const double v : pc) {
        eta += v * sp;
        sp *= s;
      }
      const double vanish = (s - 0.25) * (s - 0.5) * (s - 0.75);
      u(i, k) = x.row(i).dot(phi.row(k)) + eta * vanish;
    }
  }
  const NeumannResult nr = neumann_solve(w, a, u, g, 1e-13);
  REQUIRE(nr.converged);

  const DesignSet ds(FunctionalSample(g, nr.q), w, x, basis, 2,
                     /*add_intercept=*/false);
  const PenaltySpec none = PenaltySpec::ridge(0.0, 6);
  for (double s : {0.25, 0.5, 0.75}) {
    int k0 = -1;
    for (int k = 0; k < g.size(); ++k)
      if (std::abs(g.point(k) - s) < 1e-12) k0 = k;
    REQUIRE(k0 >= 0);
    const Eigen::VectorXd theta = ds.fit_theta(s, none);
    CHECK((theta - c).cwiseAbs().maxCoeff() <= 1e-8);
    const Eigen::VectorXd beta = ds.fit_beta(s);
    CHECK((beta - phi.row(k0).transpose()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(ds.residuals(s).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("estimates respond to outcome scaling the way the model says") {
  const SimulatedDataset data = small_dataset(40, 5, 8, 13);
  const Grid& g = data.q.grid();
  // K = 3 keeps the unpenalized concentration matrix full rank, so the
  // generalized-inverse quantities are stable enough to compare across scales
  const BSplineBasis basis(2, {});
  const DesignSet ds(data.q, data.w, data.x, basis, 2, false);
  const FunctionalSample scaled(g, 5.0 * data.q.values());
  const DesignSet ds5(scaled, data.w, data.x, basis, 2, false);

  const double s = 0.5;
  const PenaltySpec none = PenaltySpec::ridge(0.0, 3);

  // q and the lagged scores scale together, so theta is scale free...
  const Eigen::VectorXd th1 = ds.fit_theta(s, none);
  const Eigen::VectorXd th5 = ds5.fit_theta(s, none);
  CHECK((th5 - th1).cwiseAbs().maxCoeff() <=
        1e-8 * std::max(1.0, th1.cwiseAbs().maxCoeff()));

  // ...and scaling the outcomes by k while scaling lambda by k^2 leaves the
  // penalized theta unchanged as well
  const PenaltySpec pen = PenaltySpec::ridge(0.02, 3);
  const PenaltySpec pen25 = PenaltySpec::ridge(25.0 * 0.02, 3);
  const Eigen::VectorXd tp1 = ds.fit_theta(s, pen);
  CHECK((ds5.fit_theta(s, pen25) - tp1).cwiseAbs().maxCoeff() <=
        1e-9 * std::max(1.0, tp1.cwiseAbs().maxCoeff()));

  // ...while beta and its standard error scale linearly
  const Eigen::VectorXd b1 = ds.fit_beta(s);
  const Eigen::VectorXd b5 = ds5.fit_beta(s);
  CHECK((b5 - 5.0 * b1).cwiseAbs().maxCoeff() <=
        1e-8 * std::max(1.0, b1.cwiseAbs().maxCoeff()));

  const Eigen::VectorXd r1 = ds.residuals(s);
  const Eigen::VectorXd r5 = ds5.residuals(s);
  CHECK((r5 - 5.0 * r1).cwiseAbs().maxCoeff() <=
        1e-8 * std::max(1.0, 5.0 * r1.cwiseAbs().maxCoeff()));

  const Eigen::VectorXd se1 =
      (ds.beta_cov(r1).diagonal() / 40.0).cwiseSqrt();
  const Eigen::VectorXd se5 =
      (ds5.beta_cov(r5).diagonal() / 40.0).cwiseSqrt();
  CHECK((se5 - 5.0 * se1).cwiseAbs().maxCoeff() <=
        1e-8 * std::max(1.0, 5.0 * se1.cwiseAbs().maxCoeff()));

  // the kernel estimate is invariant, so its standard error is too
  CHECK(ds5.alpha_se(0.5, none, r5) ==
        doctest::Approx(ds.alpha_se(0.5, none, r1)).epsilon(1e-8));
}

TEST_CASE("estimate_curve sweeps s and reports per-point fits") {
  const SimulatedDataset data = small_dataset(25, 5, 5, 21);
  const DesignSet ds(data.q, data.w, data.x, BSplineBasis::cubic(2), 2, false);
  const PenaltySpec pen = PenaltySpec::ridge(0.1, 6);
  const std::vector<double> s_values = {0.3, 0.5, 0.7};
  const std::vector<double> t_values = {0.25, 0.5, 0.75};
  const CurveFit fit = estimate_curve(ds, s_values, t_values, pen);
  REQUIRE(fit.points.size() == 3);
  CHECK(fit.covariate_names == std::vector<std::string>{"x1", "x2"});
  for (const auto& pf : fit.points) {
    REQUIRE(pf.ok());
    CHECK(pf.beta.size() == 2);
    CHECK(pf.beta_se.minCoeff() >= 0.0);
    CHECK(pf.alpha.size() == 3);
    CHECK(pf.alpha_se.size() == 3);
    // alpha values are the basis expansion of theta at each t
    for (int j = 0; j < 3; ++j)
      CHECK(pf.alpha(j) ==
            doctest::Approx(ds.eval_alpha(pf.theta, t_values[j])).epsilon(1e-12));
  }
  CHECK_THROWS_AS(estimate_curve(ds, {0.0}, t_values, pen), DomainError);
  CHECK_THROWS_AS(estimate_curve(ds, {0.5, 1.0}, t_values, pen), DomainError);
}

TEST_CASE("fit_feasible on losslessly discretized data matches the direct fit") {
  const SimulatedDataset data = small_dataset(25, 5, 5, 17);
  const Grid& g = data.q.grid();
  const BSplineBasis basis = BSplineBasis::cubic(2);
  const PenaltySpec pen = PenaltySpec::ridge(0.2, 6);
  const std::vector<double> s_values = {0.5};
  const std::vector<double> t_values = {0.3, 0.6};

  const DesignSet ds(data.q, data.w, data.x, basis, 2, false);
  const CurveFit direct = estimate_curve(ds, s_values, t_values, pen);

  const auto obs = sample_discrete(data.q, 0, 1, /*grid_abscissae=*/true);
  const CurveFit feas = fit_feasible(obs, data.w, data.x, basis, g, s_values,
                                     t_values, pen, 2, false);
  REQUIRE(feas.points.size() == 1);
  REQUIRE(feas.points[0].ok());
  CHECK((feas.points[0].beta - direct.points[0].beta).cwiseAbs().maxCoeff() <=
        1e-10);
  CHECK((feas.points[0].theta - direct.points[0].theta).cwiseAbs().maxCoeff() <=
        1e-10);

  // genuinely sparse observation: still produces finite estimates
  const auto sparse = sample_discrete(data.q, 15, 3);
  const CurveFit rough = fit_feasible(sparse, data.w, data.x, basis, g,
                                      s_values, t_values, pen, 2, false);
  REQUIRE(rough.points[0].ok());
  CHECK(rough.points[0].beta.allFinite());
  CHECK(rough.points[0].alpha.allFinite());
}
