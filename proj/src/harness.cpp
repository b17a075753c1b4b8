#include "fsar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "fsar/rng.hpp"

namespace fsar {

void RunConfig::validate() const {
  if (dgp < 1 || dgp > 3) throw ConfigError("dgp must be 1, 2 or 3");
  if (rho && dgp != 2)
    throw ConfigError("rho scales the gaussian kernel; it requires dgp = 2");
  if (rho && *rho < 0.0) throw ConfigError("rho must be non-negative");
  if (n < 2) throw ConfigError("n must be at least 2");
  if (d < 1) throw ConfigError("d must be at least 1");
  if (lattice_rows == 0 && n % 20 != 0)
    throw ConfigError("default lattice needs n divisible by 20; set lattice_rows");
  if (lattice_rows < 0 || lattice_cols < 1)
    throw ConfigError("lattice dimensions must be positive");
  if (static_cast<long>(resolved_rows()) * lattice_cols < n)
    throw ConfigError("lattice has fewer cells than units");
  if (grid_size < 2) throw ConfigError("grid_size must be at least 2");
  if (m < 0) throw ConfigError("m must be non-negative");
  if (neumann_tol <= 0.0) throw ConfigError("neumann_tol must be positive");
  if (neumann_max_iter < 1) throw ConfigError("neumann_max_iter must be positive");
  if (degree < 1) throw ConfigError("degree must be at least 1");
  if (interior_knots < 0) throw ConfigError("interior_knots must be non-negative");
  if (max_iv_order < 1) throw ConfigError("max_iv_order must be at least 1");
  if (lambda_c.empty()) throw ConfigError("need at least one lambda_c");
  for (double lc : lambda_c)
    if (lc < 0.0) throw ConfigError("lambda_c must be non-negative");
  if (!(s_eval > 0.0 && s_eval < 1.0))
    throw ConfigError("s_eval must lie strictly inside (0, 1)");
  if (t_points < 1) throw ConfigError("t_points must be positive");
  if (!(interval_lo >= 0.0 && interval_hi <= 1.0 && interval_lo < interval_hi))
    throw ConfigError("test interval must satisfy 0 <= lo < hi <= 1");
  if (replications < 1) throw ConfigError("replications must be positive");
  if (threads < 0) throw ConfigError("threads must be non-negative");
}

int RunConfig::resolved_rows() const {
  return lattice_rows > 0 ? lattice_rows : n / 20;
}

std::vector<double> RunConfig::t_values() const {
  std::vector<double> t(t_points);
  for (int j = 0; j < t_points; ++j)
    t[j] = static_cast<double>(j + 1) / (t_points + 1);
  return t;
}

KernelSpec RunConfig::kernel() const {
  if (rho) return KernelSpec::scaled_gaussian(*rho);
  switch (dgp) {
    case 1: return KernelSpec::linear();
    case 2: return KernelSpec::gaussian();
    case 3: return KernelSpec::sine();
  }
  throw ConfigError("dgp must be 1, 2 or 3");
}

namespace {

std::vector<double> parse_double_list(const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("cannot parse boolean value '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  try {
    if (key == "dgp") dgp = std::stoi(value);
    else if (key == "rho") rho = std::stod(value);
    else if (key == "n") n = std::stoi(value);
    else if (key == "d") d = std::stoi(value);
    else if (key == "lattice_rows") lattice_rows = std::stoi(value);
    else if (key == "lattice_cols") lattice_cols = std::stoi(value);
    else if (key == "grid_size") grid_size = std::stoi(value);
    else if (key == "m") m = std::stoi(value);
    else if (key == "neumann_tol") neumann_tol = std::stod(value);
    else if (key == "neumann_max_iter") neumann_max_iter = std::stoi(value);
    else if (key == "degree") degree = std::stoi(value);
    else if (key == "interior_knots") interior_knots = std::stoi(value);
    else if (key == "max_iv_order") max_iv_order = std::stoi(value);
    else if (key == "add_intercept") add_intercept = parse_bool(value);
    else if (key == "lambda_c") lambda_c = parse_double_list(value);
    else if (key == "s_eval") s_eval = std::stod(value);
    else if (key == "t_points") t_points = std::stoi(value);
    else if (key == "interval_lo") interval_lo = std::stod(value);
    else if (key == "interval_hi") interval_hi = std::stod(value);
    else if (key == "replications") replications = std::stoi(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "threads") threads = std::stoi(value);
    else if (key == "lenient") lenient = parse_bool(value);
    else throw ConfigError("unknown configuration key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse value '" + value + "' for key '" + key + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("value '" + value + "' out of range for key '" + key + "'");
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

namespace {

// Everything one replication contributes to the aggregates.
struct RepRecord {
  bool ok = false;
  std::string error;
  Eigen::VectorXd beta, beta_se;
  Eigen::MatrixXd alpha, alpha_se;  // n_lambda x n_t
  Eigen::VectorXd z;                // n_lambda
};

RepRecord run_replication(const RunConfig& cfg, const KernelSpec& kernel,
                          const CoefSpec& coefs, const Grid& grid,
                          const BSplineBasis& basis,
                          const std::vector<double>& tvals, std::uint64_t seed) {
  RepRecord rec;
  SimulatedDataset data = simulate(cfg.n, cfg.d, cfg.resolved_rows(),
                                   cfg.lattice_cols, kernel, coefs, ErrorSpec{},
                                   grid, seed, cfg.neumann_tol,
                                   cfg.neumann_max_iter);

  FunctionalSample q = data.q;
  if (cfg.m > 0) {
    // feasible setting: observe each curve at m points, interpolate back
    DiscreteFunctionObservations obs =
        sample_discrete(data.q, cfg.m, derive_seed(seed, 3));
    q = interpolate_sample(obs, grid);
  }

  DesignSet design(std::move(q), data.w, data.x, basis, cfg.max_iv_order,
                   cfg.add_intercept);

  const int nl = static_cast<int>(cfg.lambda_c.size());
  const int nt = static_cast<int>(tvals.size());
  rec.beta = design.fit_beta(cfg.s_eval);
  const Eigen::VectorXd theta_chk = design.theta_check(cfg.s_eval);
  const Eigen::VectorXd resid = design.residuals(cfg.s_eval, rec.beta, theta_chk);
  const Eigen::MatrixXd bcov = design.beta_cov(resid);
  rec.beta_se = (bcov.diagonal() / design.units()).cwiseMax(0.0).cwiseSqrt();

  rec.alpha.resize(nl, nt);
  rec.alpha_se.resize(nl, nt);
  rec.z.resize(nl);
  for (int l = 0; l < nl; ++l) {
    const PenaltySpec pen = PenaltySpec::ridge(
        PenaltySpec::lambda_rule(cfg.lambda_c[l], cfg.n), basis.size());
    const Eigen::VectorXd theta = design.fit_theta(cfg.s_eval, pen);
    const Eigen::MatrixXd acov = design.alpha_cov_matrix(pen, resid);
    for (int j = 0; j < nt; ++j) {
      const Eigen::VectorXd phi_t = basis.eval(tvals[j]);
      rec.alpha(l, j) = phi_t.dot(theta);
      rec.alpha_se(l, j) =
          std::sqrt(std::max(0.0, phi_t.dot(acov * phi_t)) / design.units());
    }
    const double t_n =
        wald_statistic(design, theta, cfg.interval_lo, cfg.interval_hi);
    const auto [mu, v] =
        wald_moments(design, resid, cfg.interval_lo, cfg.interval_hi, pen);
    if (!(v > 0.0)) throw NumericalError("replication: wald variance not positive");
    rec.z(l) = (t_n - mu) / std::sqrt(v);
  }
  rec.ok = true;
  return rec;
}

}  // namespace

MonteCarloReport run_montecarlo(const RunConfig& config,
                                const std::function<void(int, int)>& progress) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  if (config.d != 7)
    throw ConfigError("monte carlo runs use the d = 7 coefficient design");
  const KernelSpec kernel = config.kernel();
  const CoefSpec coefs = CoefSpec::simulation_defaults();
  const Grid grid = Grid::uniform(config.grid_size);
  std::vector<double> interior(config.interior_knots);
  for (int j = 0; j < config.interior_knots; ++j)
    interior[j] = static_cast<double>(j + 1) / (config.interior_knots + 1);
  const BSplineBasis basis(config.degree, interior);
  const std::vector<double> tvals = config.t_values();

  const int reps = config.replications;
  std::vector<RepRecord> records(reps);
  std::atomic<int> next{0};
  std::atomic<int> done{0};

  int n_threads = config.threads > 0
                      ? config.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min(n_threads, reps);

  auto worker = [&]() {
    for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
      const std::uint64_t rep_seed = derive_seed(config.seed, r);
      try {
        records[r] = run_replication(config, kernel, coefs, grid, basis, tvals,
                                     rep_seed);
      } catch (const std::exception& e) {
        records[r].ok = false;
        records[r].error = e.what();
      }
      done.fetch_add(1);
    }
  };

  if (n_threads == 1) {
    worker();
    if (progress) progress(reps, reps);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    if (progress) {
      int last = -1;
      while (done.load() < reps) {
        const int cur = done.load();
        if (cur != last) { progress(cur, reps); last = cur; }
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
      }
      progress(reps, reps);
    }
    for (auto& th : pool) th.join();
  }

  MonteCarloReport rep;
  rep.config = config;
  rep.t_values = tvals;

  for (int r = 0; r < reps; ++r) {
    if (!records[r].ok) {
      if (!config.lenient)
        throw NumericalError("replication " + std::to_string(r) +
                             " failed: " + records[r].error);
      ++rep.failed;
      if (rep.failure_messages.size() < 5)
        rep.failure_messages.push_back("replication " + std::to_string(r) +
                                       ": " + records[r].error);
    } else {
      ++rep.completed;
    }
  }
  if (rep.completed == 0)
    throw NumericalError("all replications failed");

  // Truth at the evaluation point.
  const int d_est = config.add_intercept ? config.d + 1 : config.d;
  Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(d_est);
  {
    const int off = d_est - config.d;  // 1 when an intercept was estimated
    for (int j = 0; j < config.d; ++j)
      beta_true(off + j) = coefs(j, config.s_eval);
  }
  const int nt = static_cast<int>(tvals.size());
  Eigen::VectorXd alpha_true(nt);
  for (int j = 0; j < nt; ++j)
    alpha_true(j) = kernel(tvals[j], config.s_eval);
  int t_mid = 0;
  for (int j = 1; j < nt; ++j)
    if (std::abs(tvals[j] - 0.5) < std::abs(tvals[t_mid] - 0.5)) t_mid = j;

  // Aggregate the coefficient metrics over the config.d model covariates
  // (the intercept, when present, is excluded from bias / rmse).
  {
    const int off = d_est - config.d;
    Eigen::VectorXd mean_err = Eigen::VectorXd::Zero(config.d);
    Eigen::VectorXd mse = Eigen::VectorXd::Zero(config.d);
    double cover = 0.0;
    for (const auto& r : records) {
      if (!r.ok) continue;
      for (int j = 0; j < config.d; ++j) {
        const double err = r.beta(off + j) - beta_true(off + j);
        mean_err(j) += err;
        mse(j) += err * err;
      }
      const double e1 = r.beta(off) - beta_true(off);
      if (std::abs(e1) <= 1.959963984540054 * r.beta_se(off)) cover += 1.0;
    }
    mean_err /= rep.completed;
    mse /= rep.completed;
    rep.beta_bias = mean_err.mean();
    rep.beta_rmse = mse.cwiseSqrt().mean();
    rep.beta_cover = cover / rep.completed;
  }

  const int nl = static_cast<int>(config.lambda_c.size());
  for (int l = 0; l < nl; ++l) {
    MonteCarloCell cell;
    cell.lambda_c = config.lambda_c[l];
    Eigen::VectorXd mean_err = Eigen::VectorXd::Zero(nt);
    Eigen::VectorXd mse = Eigen::VectorXd::Zero(nt);
    double cover = 0.0, r10 = 0.0, r05 = 0.0, r01 = 0.0;
    for (const auto& r : records) {
      if (!r.ok) continue;
      for (int j = 0; j < nt; ++j) {
        const double err = r.alpha(l, j) - alpha_true(j);
        mean_err(j) += err;
        mse(j) += err * err;
      }
      const double em = r.alpha(l, t_mid) - alpha_true(t_mid);
      if (std::abs(em) <= 1.959963984540054 * r.alpha_se(l, t_mid)) cover += 1.0;
      if (r.z(l) > normal_upper_quantile(0.10)) r10 += 1.0;
      if (r.z(l) > normal_upper_quantile(0.05)) r05 += 1.0;
      if (r.z(l) > normal_upper_quantile(0.01)) r01 += 1.0;
    }
    mean_err /= rep.completed;
    mse /= rep.completed;
    cell.alpha_bias = mean_err.mean();
    cell.alpha_rmse = mse.cwiseSqrt().mean();
    cell.alpha_cover = cover / rep.completed;
    cell.reject_10 = r10 / rep.completed;
    cell.reject_05 = r05 / rep.completed;
    cell.reject_01 = r01 / rep.completed;
    rep.cells.push_back(cell);
  }

  rep.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

EstimateResult run_estimate(const RunConfig& config,
                            const FunctionalSample& outcomes,
                            const SpatialWeights& weights,
                            const Eigen::MatrixXd& covariates,
                            const std::vector<std::string>& covariate_names,
                            const std::vector<double>& s_values) {
  if (s_values.empty())
    throw ConfigError("run_estimate: need at least one s value");
  std::vector<double> interior(config.interior_knots);
  for (int j = 0; j < config.interior_knots; ++j)
    interior[j] = static_cast<double>(j + 1) / (config.interior_knots + 1);
  const BSplineBasis basis(config.degree, interior);

  DesignSet design(outcomes, weights, covariates, basis, config.max_iv_order,
                   config.add_intercept, Eigen::MatrixXd(), covariate_names);
  const PenaltySpec pen = PenaltySpec::ridge(
      PenaltySpec::lambda_rule(config.lambda_c.front(), design.units()),
      basis.size());

  EstimateResult out;
  out.fit = estimate_curve(design, s_values, config.t_values(), pen);
  for (double s : s_values) {
    try {
      out.tests.push_back(
          wald_test(design, s, config.interval_lo, config.interval_hi, pen));
    } catch (const NumericalError& e) {
      WaldResult bad;
      bad.s = s;
      bad.interval_lo = config.interval_lo;
      bad.interval_hi = config.interval_hi;
      bad.t_n = bad.mu_hat = bad.v_hat = bad.z = std::nan("");
      bad.p_value = std::nan("");
      out.tests.push_back(bad);
      out.warnings.push_back("wald test failed at s=" + std::to_string(s) +
                             ": " + e.what());
    }
  }
  out.w_inf_norm = weights.inf_norm();
  out.min_eig_concentration = design.min_eig_concentration();
  out.warnings.insert(out.warnings.end(), design.warnings().begin(),
                      design.warnings().end());

  // Rough invertibility diagnostic from the fitted kernel itself: the sup of
  // |alpha_hat| over the (t, s) pairs actually estimated.
  double sup = 0.0;
  for (const auto& p : out.fit.points)
    if (p.ok() && p.alpha.size() > 0)
      sup = std::max(sup, p.alpha.cwiseAbs().maxCoeff());
  out.est_kernel_sup = sup;
  out.est_product_ok = sup * out.w_inf_norm < 1.0;
  return out;
}

}  // namespace fsar
