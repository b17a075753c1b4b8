#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsar/estimator.hpp"
#include "fsar/inference.hpp"

namespace fsar {

// One configuration of a simulation / estimation run.  Defaults mirror the
// main simulation design; the CLI overrides fields per subcommand.
struct RunConfig {
  // data generating process
  int dgp = 1;                  // 1 linear, 2 gaussian, 3 sine kernel
  std::optional<double> rho;    // scaled-gaussian test kernel (dgp 2 only)
  int n = 400;
  int d = 7;
  int lattice_rows = 0;         // 0 = n / 20
  int lattice_cols = 40;
  int grid_size = 199;
  int m = 0;                    // discrete observations per unit, 0 = full curves
  double neumann_tol = 1e-3;
  int neumann_max_iter = 10000;

  // estimator
  int degree = 3;
  int interior_knots = 2;
  int max_iv_order = 2;
  bool add_intercept = true;
  std::vector<double> lambda_c = {0.5, 1.0, 2.0, 3.0};

  // evaluation
  double s_eval = 0.5;
  int t_points = 19;            // alpha evaluated at j / (t_points + 1)
  double interval_lo = 0.1;
  double interval_hi = 0.9;

  // monte carlo
  int replications = 1000;
  std::uint64_t seed = 42;
  int threads = 0;              // 0 = hardware concurrency
  bool lenient = false;         // record per-replication failures instead of aborting

  void validate() const;
  int resolved_rows() const;
  std::vector<double> t_values() const;
  KernelSpec kernel() const;

  // key = value file, # comments; keys match the field names above.
  static RunConfig from_file(const std::string& path);
  void apply(const std::string& key, const std::string& value);
};

// One row per (lambda_c); beta columns repeat since they do not involve the
// penalty.
struct MonteCarloCell {
  double lambda_c = 0.0;
  double alpha_bias = 0.0;   // mean over t of mean estimation error
  double alpha_rmse = 0.0;   // mean over t of root mean squared error
  double alpha_cover = 0.0;  // 95% CI coverage of alpha at t nearest 0.5
  double reject_10 = 0.0;
  double reject_05 = 0.0;
  double reject_01 = 0.0;
};

struct MonteCarloReport {
  RunConfig config;
  int completed = 0;
  int failed = 0;
  std::vector<std::string> failure_messages;  // first few, lenient mode
  double beta_bias = 0.0;   // mean over the d covariates
  double beta_rmse = 0.0;
  double beta_cover = 0.0;  // 95% CI coverage of the first covariate
  std::vector<MonteCarloCell> cells;
  std::vector<double> t_values;
  double wall_seconds = 0.0;
};

// Run config.replications independent draws of the model, estimate at
// config.s_eval, test alpha = 0 on [interval_lo, interval_hi], and aggregate.
// Replication r derives its seed from (config.seed, r), and results are
// identical for any thread count.  `progress` (optional) is called from the
// main thread with (done, total) at a coarse cadence.
MonteCarloReport run_montecarlo(
    const RunConfig& config,
    const std::function<void(int, int)>& progress = nullptr);

// Estimation on supplied data (the CLI loads CSVs into these arguments).
struct EstimateResult {
  CurveFit fit;
  std::vector<WaldResult> tests;     // one per s value
  double w_inf_norm = 0.0;
  double min_eig_concentration = 0.0;
  std::vector<std::string> warnings;
  // completeness diagnostic computed from the estimated kernel on the grid
  // of t values and the requested s values
  double est_kernel_sup = 0.0;
  bool est_product_ok = false;
};

EstimateResult run_estimate(const RunConfig& config,
                            const FunctionalSample& outcomes,
                            const SpatialWeights& weights,
                            const Eigen::MatrixXd& covariates,
                            const std::vector<std::string>& covariate_names,
                            const std::vector<double>& s_values);

}  // namespace fsar
