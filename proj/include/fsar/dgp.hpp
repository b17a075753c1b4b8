#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fsar/funcspace.hpp"
#include "fsar/grid.hpp"
#include "fsar/spatial.hpp"

namespace fsar {

// Interaction kernel alpha(t, s).  The three analytic families from the
// simulation design, a scaled variant used for power studies, and a custom
// kernel given by its values on a grid (tests use the last to place the truth
// exactly inside a basis span).
class KernelSpec {
 public:
  static KernelSpec zero();
  static KernelSpec linear();       // (t + s) / 2
  static KernelSpec gaussian();     // N(t - s; 0, 0.7^2) density
  static KernelSpec sine();         // 0.3 + 0.7 t sin(2 pi (t - s))
  static KernelSpec scaled_gaussian(double rho);  // rho * gaussian
  static KernelSpec custom(Eigen::MatrixXd grid_values);

  bool is_custom() const { return custom_.has_value(); }

  // Pointwise evaluation; not available for custom kernels.
  double operator()(double t, double s) const;

  // G x G matrix A with A(g, g') = alpha(t_g, s_{g'}).
  Eigen::MatrixXd evaluate(const Grid& grid) const;

 private:
  enum class Kind { Zero, Linear, Gaussian, Sine };
  KernelSpec(Kind kind, double scale) : kind_(kind), scale_(scale) {}
  explicit KernelSpec(Eigen::MatrixXd values)
      : kind_(Kind::Zero), scale_(0.0), custom_(std::move(values)) {}

  Kind kind_;
  double scale_;
  std::optional<Eigen::MatrixXd> custom_;
};

// Coefficient curves beta_j(s), j = 0..d-1.
class CoefSpec {
 public:
  explicit CoefSpec(std::vector<std::function<double(double)>> funcs);

  // The seven curves of the simulation design: three copies of
  // 1 + 1.2 log(s + 1) followed by four copies of exp(s) - 0.4.
  static CoefSpec simulation_defaults();

  int count() const { return static_cast<int>(funcs_.size()); }
  double operator()(int j, double s) const { return funcs_.at(j)(s); }

  // d x G matrix of curve values.
  Eigen::MatrixXd evaluate(const Grid& grid) const;

 private:
  std::vector<std::function<double(double)>> funcs_;
};

// Functional error eps_i(s) = e_{1,i} + sum_{j=1}^terms s^{j/2} e_{2,i,j}
// with independent centred normals of sd sigma1 and sigma2.
struct ErrorSpec {
  double sigma1 = 0.3;
  double sigma2 = 0.6;
  int terms = 4;
};

struct NeumannResult {
  Eigen::MatrixXd q;
  int iterations = 0;
  bool converged = false;
};

// Solve Q = T(Q) + U by Neumann iteration Q_{l+1} = U + W (Q_l A h), stopping
// when the largest elementwise update falls below tol.  Throws NumericalError
// if the iteration produces non-finite values (operator norm >= 1).
NeumannResult neumann_solve(const SpatialWeights& w,
                            const Eigen::MatrixXd& alpha_grid,
                            const Eigen::MatrixXd& u, const Grid& grid,
                            double tol = 1e-3, int max_iter = 10000);

// Dense reference solver: vectorizes the fixed-point equation into an
// (nG) x (nG) linear system and solves it directly.  Guarded to n*G <= 20000.
Eigen::MatrixXd direct_solve_oracle(const SpatialWeights& w,
                                    const Eigen::MatrixXd& alpha_grid,
                                    const Eigen::MatrixXd& u, const Grid& grid);

struct SimulatedDataset {
  FunctionalSample q;          // outcomes
  Eigen::MatrixXd x;           // n x d covariates (no intercept column)
  Eigen::MatrixXd errors;      // n x G realized functional errors
  SpatialWeights w;
  std::vector<std::pair<int, int>> cells;  // lattice position of each unit
  int neumann_iterations = 0;
  bool neumann_converged = false;
  int isolated_units = 0;
  CompletenessReport completeness;
};

// Simulate n units scattered uniformly (without replacement) over a
// rows x cols lattice with rook-contiguity weights.  Draw order is fixed:
// occupancy first, then covariates row by row, then errors unit by unit, each
// from its own derived stream of `seed`, so any prefix of the data is stable
// under changes further down the list.
SimulatedDataset simulate(int n, int d, int rows, int cols,
                          const KernelSpec& kernel, const CoefSpec& coefs,
                          const ErrorSpec& errors, const Grid& grid,
                          std::uint64_t seed, double tol = 1e-3,
                          int max_iter = 10000);

// Marginal effect of covariate j of unit i on the whole outcome profile:
// the Neumann expansion of (Id - T)^{-1} applied to the unit impulse
// e_i beta_j(s), truncated when the largest increment drops below trunc_tol.
Eigen::MatrixXd marginal_effect(const SimulatedDataset& data,
                                const KernelSpec& kernel, const CoefSpec& coefs,
                                int covariate, int unit,
                                double trunc_tol = 1e-8);

// Observe each curve at m random abscissae (sorted uniforms on [0, 1]),
// reading ordinates off the grid by linear interpolation.  Unit i uses stream
// derive_seed(seed, i), so the draw is reproducible under parallel generation.
// grid_abscissae = true replaces the uniforms with the grid points themselves
// (m is ignored), a hook tests use to make discretization lossless.
DiscreteFunctionObservations sample_discrete(const FunctionalSample& q, int m,
                                             std::uint64_t seed,
                                             bool grid_abscissae = false);

}  // namespace fsar
