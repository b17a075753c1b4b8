#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fsar/dgp.hpp"
#include "fsar/rng.hpp"

using namespace fsar;

TEST_CASE("kernel families evaluate their formulas") {
  const KernelSpec lin = KernelSpec::linear();
  CHECK(lin(0.2, 0.6) == doctest::Approx(0.4).epsilon(1e-14));

  const KernelSpec gau = KernelSpec::gaussian();
  const double t = 0.9, s = 0.2;
  const double sd = 0.7;
  const double expect =
      std::exp(-0.5 * (t - s) * (t - s) / (sd * sd)) /
      (sd * std::sqrt(2.0 * std::numbers::pi));
  CHECK(gau(t, s) == doctest::Approx(expect).epsilon(1e-12));

  const KernelSpec sin_k = KernelSpec::sine();
  CHECK(sin_k(0.25, 0.25) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(sin_k(0.5, 0.25) ==
        doctest::Approx(0.3 + 0.7 * 0.5 * std::sin(2.0 * std::numbers::pi * 0.25))
            .epsilon(1e-12));

  const KernelSpec half = KernelSpec::scaled_gaussian(0.5);
  CHECK(half(t, s) == doctest::Approx(0.5 * expect).epsilon(1e-12));

  const Grid g = Grid::uniform(9);
  const Eigen::MatrixXd a = lin.evaluate(g);
  REQUIRE(a.rows() == 9);
  REQUIRE(a.cols() == 9);
  CHECK(a(1, 7) == doctest::Approx(0.5 * (g.point(1) + g.point(7))).epsilon(1e-14));

  Eigen::MatrixXd vals = Eigen::MatrixXd::Constant(9, 9, 0.25);
  const KernelSpec cust = KernelSpec::custom(vals);
  CHECK(cust.is_custom());
  CHECK_THROWS_AS(cust(0.5, 0.5), DomainError);
  CHECK((cust.evaluate(g).array() == 0.25).all());
  CHECK_THROWS_AS(cust.evaluate(Grid::uniform(4)), DimensionError);
}

TEST_CASE("coefficient curves evaluate their formulas") {
  const CoefSpec defaults = CoefSpec::simulation_defaults();
  REQUIRE(defaults.count() == 7);
  for (int j = 0; j < 3; ++j)
    CHECK(defaults(j, 0.5) ==
          doctest::Approx(1.0 + 1.2 * std::log(1.5)).epsilon(1e-14));
  for (int j = 3; j < 7; ++j)
    CHECK(defaults(j, 0.5) ==
          doctest::Approx(std::exp(0.5) - 0.4).epsilon(1e-14));

  const Grid g = Grid::uniform(5);
  const Eigen::MatrixXd b = defaults.evaluate(g);
  REQUIRE(b.rows() == 7);
  REQUIRE(b.cols() == 5);
  CHECK(b(0, 2) == doctest::Approx(1.0 + 1.2 * std::log(1.0 + g.point(2))).epsilon(1e-14));
}

TEST_CASE("neumann_solve matches the two-unit constant-kernel closed form") {
  // W = [[0, c], [c, 0]] (not normalized on purpose), alpha(t, s) = 1,
  // u_i(s) = u_i constant.  Then q_i(s) is constant and satisfies
  //   q_1 = u_1 + c * gamma * q_2,  q_2 = u_2 + c * gamma * q_1,
  // where gamma = G * h is the quadrature mass of the constant 1.
  const double c = 0.5, u1 = 1.0, u2 = 2.0;
  const SpatialWeights w =
      SpatialWeights::from_entries(2, {{0, 1, c}, {1, 0, c}});
  const Grid g = Grid::uniform(199);
  const double gamma = 199.0 / 200.0;
  const Eigen::MatrixXd alpha = Eigen::MatrixXd::Ones(199, 199);
  Eigen::MatrixXd u(2, 199);
  u.row(0).setConstant(u1);
  u.row(1).setConstant(u2);

  const NeumannResult res = neumann_solve(w, alpha, u, g, 1e-12);
  REQUIRE(res.converged);
  const double cg = c * gamma;
  const double q1 = (u1 + cg * u2) / (1.0 - cg * cg);
  const double q2 = (u2 + cg * u1) / (1.0 - cg * cg);
  CHECK((res.q.row(0).array() - q1).abs().maxCoeff() <= 1e-9);
  CHECK((res.q.row(1).array() - q2).abs().maxCoeff() <= 1e-9);

  // fixed-point residual: q - (u + W (q alpha h)) should vanish
  const Eigen::MatrixXd tq = w.lag(res.q * alpha * g.step());
  CHECK((res.q - u - tq).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("zero kernel returns u in one iteration") {
  const SpatialWeights w =
      SpatialWeights::from_entries(2, {{0, 1, 1.0}, {1, 0, 1.0}}, true);
  const Grid g = Grid::uniform(9);
  Eigen::MatrixXd u(2, 9);
  u.setRandom();
  const Eigen::MatrixXd alpha = KernelSpec::zero().evaluate(g);
  const NeumannResult res = neumann_solve(w, alpha, u, g, 1e-10);
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK((res.q - u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("divergent operator raises NumericalError") {
  // ||W||_inf * sup|alpha| * 1 = 3 > 1 and the iteration genuinely blows up.
  const SpatialWeights w =
      SpatialWeights::from_entries(2, {{0, 1, 3.0}, {1, 0, 3.0}});
  const Grid g = Grid::uniform(49);
  const Eigen::MatrixXd alpha = Eigen::MatrixXd::Ones(49, 49);
  const Eigen::MatrixXd u = Eigen::MatrixXd::Ones(2, 49);
  CHECK_THROWS_AS(neumann_solve(w, alpha, u, g, 1e-8), NumericalError);
}

TEST_CASE("neumann agrees with the dense direct solver on random instances") {
  Rng rng(2024);
  const Grid g = Grid::uniform(23);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 4 + static_cast<int>(rng.below(9));  // 4..12
    // random sparse weights, row-normalized, then damped so the operator
    // norm stays safely below one for every kernel family used here
    std::vector<Eigen::Triplet<double>> entries;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && rng.uniform01() < 0.4)
          entries.emplace_back(i, j, rng.uniform01() + 0.1);
    SpatialWeights w = SpatialWeights::from_entries(n, entries).row_normalized();

    const KernelSpec kernels[3] = {KernelSpec::linear(), KernelSpec::gaussian(),
                                   KernelSpec::sine()};
    const KernelSpec& kernel = kernels[rep % 3];
    const Eigen::MatrixXd alpha = 0.6 * kernel.evaluate(g);

    Eigen::MatrixXd u(n, g.size());
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < g.size(); ++k) u(i, k) = rng.normal();

    const NeumannResult it = neumann_solve(w, alpha, u, g, 1e-12);
    REQUIRE(it.converged);
    const Eigen::MatrixXd direct = direct_solve_oracle(w, alpha, u, g);
    CHECK((it.q - direct).cwiseAbs().maxCoeff() <= 1e-5);
  }

  // the oracle refuses problems beyond its dense budget (n * G too large)
  const SpatialWeights wide =
      SpatialWeights::from_entries(2000, {{0, 1, 0.5}, {1, 0, 0.5}});
  CHECK_THROWS_AS(
      direct_solve_oracle(wide, Eigen::MatrixXd::Zero(23, 23),
                          Eigen::MatrixXd::Zero(2000, 23), g),
      DomainError);
}

TEST_CASE("simulate is deterministic and satisfies the model equation") {
  const Grid g = Grid::uniform(99);
  const CoefSpec coefs = CoefSpec::simulation_defaults();
  const ErrorSpec err;
  const SimulatedDataset a =
      simulate(40, 7, 2, 40, KernelSpec::linear(), coefs, err, g, 777);
  const SimulatedDataset b =
      simulate(40, 7, 2, 40, KernelSpec::linear(), coefs, err, g, 777);
  CHECK((a.q.values() - b.q.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.errors - b.errors).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.cells == b.cells);

  const SimulatedDataset c =
      simulate(40, 7, 2, 40, KernelSpec::linear(), coefs, err, g, 778);
  CHECK((a.q.values() - c.q.values()).cwiseAbs().maxCoeff() > 1e-6);

  REQUIRE(a.x.rows() == 40);
  REQUIRE(a.x.cols() == 7);
  CHECK(a.neumann_converged);
  CHECK(a.completeness.product_ok);

  // model equation residual: q = x beta + eps + W (q alpha h)
  const Eigen::MatrixXd alpha = KernelSpec::linear().evaluate(g);
  const Eigen::MatrixXd beta = coefs.evaluate(g);
  const Eigen::MatrixXd u = a.x * beta + a.errors;
  const Eigen::MatrixXd tq = a.w.lag(a.q.values() * alpha * g.step());
  CHECK((a.q.values() - u - tq).cwiseAbs().maxCoeff() <= 1e-3 * 10);

  CHECK_THROWS_AS(
      simulate(41, 7, 2, 20, KernelSpec::linear(), coefs, err, g, 1),
      DomainError);
}

TEST_CASE("marginal_effect matches the direct solver applied to an impulse") {
  const Grid g = Grid::uniform(23);
  const CoefSpec coefs = CoefSpec::simulation_defaults();
  const SimulatedDataset data =
      simulate(8, 7, 2, 4, KernelSpec::gaussian(), coefs, ErrorSpec{}, g, 5);

  const int unit = 3, cov = 1;
  const Eigen::MatrixXd eff =
      marginal_effect(data, KernelSpec::gaussian(), coefs, cov, unit, 1e-12);
  REQUIRE(eff.rows() == 8);
  REQUIRE(eff.cols() == g.size());

  Eigen::MatrixXd impulse = Eigen::MatrixXd::Zero(8, g.size());
  for (int k = 0; k < g.size(); ++k) impulse(unit, k) = coefs(cov, g.point(k));
  const Eigen::MatrixXd direct = direct_solve_oracle(
      data.w, KernelSpec::gaussian().evaluate(g), impulse, g);
  CHECK((eff - direct).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("sample_discrete draws reproducible per-unit abscissae") {
  const Grid g = Grid::uniform(99);
  Eigen::MatrixXd v(3, 99);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 99; ++k) v(i, k) = std::sin(6.28 * g.point(k)) + i;
  const FunctionalSample sample(g, v);

  const auto obs1 = sample_discrete(sample, 15, 11);
  const auto obs2 = sample_discrete(sample, 15, 11);
  REQUIRE(obs1.units() == 3);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(obs1.unit(i).size() == 15);
    for (std::size_t l = 0; l < 15; ++l) {
      CHECK(obs1.unit(i)[l].s == obs2.unit(i)[l].s);
      CHECK(obs1.unit(i)[l].y == obs2.unit(i)[l].y);
      if (l > 0) CHECK(obs1.unit(i)[l].s > obs1.unit(i)[l - 1].s);
      // ordinate really is the interpolated curve value
      const double yi = interp_on_grid(v.row(i).transpose(), g, obs1.unit(i)[l].s);
      CHECK(obs1.unit(i)[l].y == yi);
    }
  }

  // different unit streams: abscissae differ across units
  CHECK(obs1.unit(0)[0].s != obs1.unit(1)[0].s);

  // grid_abscissae mode reproduces the curve exactly on its own grid
  const auto lossless = sample_discrete(sample, 0, 1, /*grid_abscissae=*/true);
  const FunctionalSample back = interpolate_sample(lossless, g);
  CHECK((back.values() - v).cwiseAbs().maxCoeff() == 0.0);
}
