#include "fsar/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fsar/rng.hpp"

namespace fsar {

KernelSpec KernelSpec::zero() { return KernelSpec(Kind::Zero, 1.0); }
KernelSpec KernelSpec::linear() { return KernelSpec(Kind::Linear, 1.0); }
KernelSpec KernelSpec::gaussian() { return KernelSpec(Kind::Gaussian, 1.0); }
KernelSpec KernelSpec::sine() { return KernelSpec(Kind::Sine, 1.0); }
KernelSpec KernelSpec::scaled_gaussian(double rho) {
  if (rho < 0.0) throw DomainError("scaled_gaussian: rho must be non-negative");
  return KernelSpec(Kind::Gaussian, rho);
}
KernelSpec KernelSpec::custom(Eigen::MatrixXd grid_values) {
  if (grid_values.rows() != grid_values.cols())
    throw DimensionError("KernelSpec::custom: grid values must be square");
  return KernelSpec(std::move(grid_values));
}

double KernelSpec::operator()(double t, double s) const {
  if (custom_)
    throw DomainError("KernelSpec: custom kernels have no pointwise form");
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Linear:
      return 0.5 * (t + s);
    case Kind::Gaussian: {
      constexpr double sd = 0.7;
      const double z = (t - s) / sd;
      return scale_ * std::exp(-0.5 * z * z) /
             (sd * std::sqrt(2.0 * std::numbers::pi));
    }
    case Kind::Sine:
      return 0.3 + 0.7 * t * std::sin(2.0 * std::numbers::pi * (t - s));
  }
  return 0.0;  // unreachable
}

Eigen::MatrixXd KernelSpec::evaluate(const Grid& grid) const {
  const int g = grid.size();
  if (custom_) {
    if (custom_->rows() != g)
      throw DimensionError("KernelSpec::custom: stored values are " +
                           std::to_string(custom_->rows()) +
                           "^2 but the grid has " + std::to_string(g) +
                           " points");
    return *custom_;
  }
  Eigen::MatrixXd a(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) a(i, j) = (*this)(grid.point(i), grid.point(j));
  return a;
}

CoefSpec::CoefSpec(std::vector<std::function<double(double)>> funcs)
    : funcs_(std::move(funcs)) {
  if (funcs_.empty()) throw DomainError("CoefSpec: need at least one curve");
}

CoefSpec CoefSpec::simulation_defaults() {
  std::vector<std::function<double(double)>> f;
  for (int j = 0; j < 3; ++j)
    f.emplace_back([](double s) { return 1.0 + 1.2 * std::log(s + 1.0); });
  for (int j = 0; j < 4; ++j)
    f.emplace_back([](double s) { return std::exp(s) - 0.4; });
  return CoefSpec(std::move(f));
}

Eigen::MatrixXd CoefSpec::evaluate(const Grid& grid) const {
  Eigen::MatrixXd b(count(), grid.size());
  for (int j = 0; j < count(); ++j)
    for (int g = 0; g < grid.size(); ++g) b(j, g) = funcs_[j](grid.point(g));
  return b;
}

NeumannResult neumann_solve(const SpatialWeights& w,
                            const Eigen::MatrixXd& alpha_grid,
                            const Eigen::MatrixXd& u, const Grid& grid,
                            double tol, int max_iter) {
  const int g = grid.size();
  if (alpha_grid.rows() != g || alpha_grid.cols() != g)
    throw DimensionError("neumann_solve: kernel values must be G x G");
  if (u.rows() != w.size() || u.cols() != g)
    throw DimensionError("neumann_solve: exogenous part must be n x G");
  if (tol <= 0.0) throw DomainError("neumann_solve: tol must be positive");

  const Eigen::MatrixXd a_h = alpha_grid * grid.step();
  NeumannResult res;
  res.q = u;
  Eigen::MatrixXd qa(u.rows(), g);
  Eigen::MatrixXd next(u.rows(), g);
  for (int iter = 1; iter <= max_iter; ++iter) {
    qa.noalias() = res.q * a_h;
    next = u + w.lag(qa);
    const double diff = (next - res.q).cwiseAbs().maxCoeff();
    if (!std::isfinite(diff))
      throw NumericalError(
          "neumann_solve: iteration diverged; the model operator is not a "
          "contraction (check the completeness condition)");
    res.q.swap(next);
    res.iterations = iter;
    if (diff < tol) {
      res.converged = true;
      return res;
    }
  }
  return res;  // converged stays false
}

Eigen::MatrixXd direct_solve_oracle(const SpatialWeights& w,
                                    const Eigen::MatrixXd& alpha_grid,
                                    const Eigen::MatrixXd& u, const Grid& grid) {
  const int n = w.size();
  const int g = grid.size();
  if (alpha_grid.rows() != g || alpha_grid.cols() != g)
    throw DimensionError("direct_solve_oracle: kernel values must be G x G");
  if (u.rows() != n || u.cols() != g)
    throw DimensionError("direct_solve_oracle: exogenous part must be n x G");
  const long ng = static_cast<long>(n) * g;
  if (ng > 20000)
    throw DomainError("direct_solve_oracle: n*G > 20000; use neumann_solve");

  // vec(W Q A h) = (A h)^T (x) W applied to vec(Q) in column-major stacking.
  const Eigen::MatrixXd a_h = alpha_grid * grid.step();
  const Eigen::MatrixXd wd = w.dense();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(ng, ng);
  for (int gc = 0; gc < g; ++gc)        // output block row (column of Q)
    for (int gr = 0; gr < g; ++gr)      // input block column
      m.block(static_cast<long>(gc) * n, static_cast<long>(gr) * n, n, n) -=
          a_h(gr, gc) * wd;

  Eigen::VectorXd uvec(ng);
  for (int gc = 0; gc < g; ++gc) uvec.segment(static_cast<long>(gc) * n, n) = u.col(gc);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::VectorXd qvec = lu.solve(uvec);
  const double resid = (m * qvec - uvec).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, uvec.cwiseAbs().maxCoeff());
  if (!std::isfinite(resid) || resid > 1e-8 * scale)
    throw NumericalError(
        "direct_solve_oracle: linear system is singular or ill-conditioned; "
        "the model operator is likely not invertible");

  Eigen::MatrixXd q(n, g);
  for (int gc = 0; gc < g; ++gc) q.col(gc) = qvec.segment(static_cast<long>(gc) * n, n);
  return q;
}

SimulatedDataset simulate(int n, int d, int rows, int cols,
                          const KernelSpec& kernel, const CoefSpec& coefs,
                          const ErrorSpec& errors, const Grid& grid,
                          std::uint64_t seed, double tol, int max_iter) {
  if (n < 1 || d < 1) throw DomainError("simulate: need n >= 1 units, d >= 1 covariates");
  const long cells_total = static_cast<long>(rows) * cols;
  if (n > cells_total)
    throw DomainError("simulate: lattice has fewer cells than units");
  if (coefs.count() != d)
    throw DimensionError("simulate: coefficient count does not match d");
  if (errors.sigma1 < 0.0 || errors.sigma2 < 0.0 || errors.terms < 0)
    throw DomainError("simulate: invalid error specification");
  const int g = grid.size();

  // Phase 0: lattice occupancy, a uniform sample of n cells without
  // replacement; unit i sits at the i-th drawn cell.
  Rng occ_rng(derive_seed(seed, 0));
  std::vector<int> cell_ids(cells_total);
  std::iota(cell_ids.begin(), cell_ids.end(), 0);
  occ_rng.partial_shuffle(cell_ids, n);
  std::vector<std::pair<int, int>> cells(n);
  for (int i = 0; i < n; ++i) cells[i] = {cell_ids[i] / cols, cell_ids[i] % cols};
  SpatialWeights w = SpatialWeights::rook_lattice(rows, cols, cells);

  // Phase 1: covariates, row major.
  Rng x_rng(derive_seed(seed, 1));
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = x_rng.normal();

  // Phase 2: functional errors; per unit, the level shock then the power
  // series shocks in order.
  Rng e_rng(derive_seed(seed, 2));
  Eigen::MatrixXd powers(errors.terms, g);
  for (int j = 0; j < errors.terms; ++j)
    for (int k = 0; k < g; ++k)
      powers(j, k) = std::pow(grid.point(k), 0.5 * (j + 1));
  Eigen::MatrixXd e(n, g);
  for (int i = 0; i < n; ++i) {
    const double level = errors.sigma1 * e_rng.normal();
    e.row(i).setConstant(level);
    for (int j = 0; j < errors.terms; ++j)
      e.row(i) += errors.sigma2 * e_rng.normal() * powers.row(j);
  }

  const Eigen::MatrixXd beta_grid = coefs.evaluate(grid);  // d x G
  Eigen::MatrixXd u = x * beta_grid + e;

  const Eigen::MatrixXd alpha_grid = kernel.evaluate(grid);
  NeumannResult nr = neumann_solve(w, alpha_grid, u, grid, tol, max_iter);
  if (!nr.converged)
    throw NumericalError("simulate: Neumann iteration did not converge within " +
                         std::to_string(max_iter) + " steps");

  SimulatedDataset out{FunctionalSample(grid, std::move(nr.q)),
                       std::move(x),
                       std::move(e),
                       w,
                       std::move(cells),
                       nr.iterations,
                       nr.converged,
                       w.isolated_count(),
                       completeness_check(w, alpha_grid, grid)};
  return out;
}

Eigen::MatrixXd marginal_effect(const SimulatedDataset& data,
                                const KernelSpec& kernel, const CoefSpec& coefs,
                                int covariate, int unit, double trunc_tol) {
  const Grid& grid = data.q.grid();
  const int n = data.q.units();
  const int g = grid.size();
  if (unit < 0 || unit >= n) throw DomainError("marginal_effect: unit out of range");
  if (covariate < 0 || covariate >= coefs.count())
    throw DomainError("marginal_effect: covariate out of range");
  if (trunc_tol <= 0.0) throw DomainError("marginal_effect: trunc_tol must be positive");

  const Eigen::MatrixXd a_h = kernel.evaluate(grid) * grid.step();
  Eigen::MatrixXd term = Eigen::MatrixXd::Zero(n, g);
  for (int k = 0; k < g; ++k) term(unit, k) = coefs(covariate, grid.point(k));
  Eigen::MatrixXd total = term;
  for (int iter = 0; iter < 10000; ++iter) {
    term = data.w.lag(term * a_h);
    total += term;
    const double inc = term.cwiseAbs().maxCoeff();
    if (!std::isfinite(inc))
      throw NumericalError("marginal_effect: series diverged");
    if (inc < trunc_tol) return total;
  }
  throw NumericalError("marginal_effect: series did not converge in 10000 terms");
}

DiscreteFunctionObservations sample_discrete(const FunctionalSample& q, int m,
                                             std::uint64_t seed,
                                             bool grid_abscissae) {
  const Grid& grid = q.grid();
  if (!grid_abscissae && m < 1)
    throw DomainError("sample_discrete: need at least one point per unit");
  const int n = q.units();
  std::vector<std::vector<ObsPoint>> pts(n);
  for (int i = 0; i < n; ++i) {
    if (grid_abscissae) {
      pts[i].resize(grid.size());
      for (int k = 0; k < grid.size(); ++k)
        pts[i][k] = {grid.point(k), q.values()(i, k)};
      continue;
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::vector<double> s(m);
    for (int l = 0; l < m; ++l) s[l] = rng.uniform01();
    std::sort(s.begin(), s.end());
    pts[i].resize(m);
    for (int l = 0; l < m; ++l)
      pts[i][l] = {s[l], interp_on_grid(q.values().row(i).transpose(), grid, s[l])};
  }
  return DiscreteFunctionObservations::from_points(std::move(pts));
}

}  // namespace fsar
