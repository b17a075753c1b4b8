// Command line front end: simulate / estimate / test / montecarlo.
// Exit codes: 0 success, 2 invalid configuration or input data, 3 numerical
// failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fsar/dgp.hpp"
#include "fsar/harness.hpp"
#include "fsar/io.hpp"
#include "fsar/rng.hpp"

namespace fs = std::filesystem;
using namespace fsar;

namespace {

struct CommonArgs {
  RunConfig cfg;
  std::string out_dir = ".";
};

// Shared model / estimator flags.  Defaults differ per subcommand, so the
// caller seeds cfg before registering.
void add_estimator_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--grid", cfg.grid_size, "number of grid points")
      ->capture_default_str();
  cmd->add_option("--degree", cfg.degree, "B-spline degree")
      ->capture_default_str();
  cmd->add_option("--knots", cfg.interior_knots, "number of interior knots")
      ->capture_default_str();
  cmd->add_option("--iv-order", cfg.max_iv_order, "highest spatial lag used as instrument")
      ->capture_default_str();
  cmd->add_flag("--intercept,!--no-intercept", cfg.add_intercept,
                "include an intercept column");
  cmd->add_option("--interval", [&cfg](const std::vector<std::string>& vals) {
        cfg.interval_lo = std::stod(vals.at(0));
        cfg.interval_hi = std::stod(vals.at(1));
        return true;
      }, "test interval lo hi")->expected(2);
  cmd->add_option("--t-points", cfg.t_points,
                  "alpha evaluation points j/(count+1)")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

void add_dgp_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--dgp", cfg.dgp, "interaction kernel: 1 linear, 2 gaussian, 3 sine")
      ->capture_default_str();
  cmd->add_option("--rho", [&cfg](const std::vector<std::string>& vals) {
        cfg.rho = std::stod(vals.at(0));
        return true;
      }, "scale of the gaussian test kernel (dgp 2)");
  cmd->add_option("--n", cfg.n, "number of units")->capture_default_str();
  cmd->add_option("--rows", cfg.lattice_rows, "lattice rows (0 = n/20)")
      ->capture_default_str();
  cmd->add_option("--cols", cfg.lattice_cols, "lattice columns")
      ->capture_default_str();
  cmd->add_option("--m", cfg.m, "observations per curve (0 = full curves)")
      ->capture_default_str();
  cmd->add_option("--neumann-tol", cfg.neumann_tol, "fixed point tolerance")
      ->capture_default_str();
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int run_simulate_cmd(CommonArgs& args) {
  RunConfig& cfg = args.cfg;
  cfg.validate();
  fs::create_directories(args.out_dir);
  SimulatedDataset data =
      simulate(cfg.n, cfg.d, cfg.resolved_rows(), cfg.lattice_cols,
               cfg.kernel(), CoefSpec::simulation_defaults(), ErrorSpec{},
               Grid::uniform(cfg.grid_size), cfg.seed, cfg.neumann_tol,
               cfg.neumann_max_iter);
  std::vector<std::string> names;
  for (int j = 0; j < cfg.d; ++j) names.push_back("x" + std::to_string(j + 1));
  write_units_csv(path_in(args.out_dir, "units.csv"), data.x, names);
  if (cfg.m > 0)
    write_quantiles_csv(path_in(args.out_dir, "quantiles.csv"),
                        sample_discrete(data.q, cfg.m, derive_seed(cfg.seed, 3)));
  else
    write_quantiles_csv(path_in(args.out_dir, "quantiles.csv"), data.q);
  write_edges_csv(path_in(args.out_dir, "edges.csv"), data.w);
  write_manifest(
      path_in(args.out_dir, "manifest.json"),
      manifest_json(cfg,
                    {{"w_inf_norm", data.w.inf_norm()},
                     {"neumann_iterations", double(data.neumann_iterations)},
                     {"isolated_units", double(data.isolated_units)},
                     {"completeness_product", data.completeness.product},
                     {"completeness_alt_product", data.completeness.alt_product}},
                    {}));
  std::cout << "simulated " << cfg.n << " units on a " << cfg.resolved_rows()
            << "x" << cfg.lattice_cols << " lattice ("
            << data.neumann_iterations << " fixed-point iterations, "
            << data.isolated_units << " isolated units) -> " << args.out_dir
            << "\n";
  return 0;
}

struct DataArgs {
  std::string units, quantiles, edges, sizes;
  bool no_row_normalize = false;
};

int run_estimate_cmd(CommonArgs& args, DataArgs& data_args,
                     std::vector<double>& s_values, bool tests_only) {
  RunConfig& cfg = args.cfg;
  cfg.validate();
  fs::create_directories(args.out_dir);
  LoadedData data = load_dataset(data_args.units, data_args.quantiles,
                                 data_args.edges, data_args.sizes,
                                 !data_args.no_row_normalize);
  const Grid grid = Grid::uniform(cfg.grid_size);
  FunctionalSample q = interpolate_sample(data.obs, grid);
  EstimateResult res = run_estimate(cfg, q, data.w, data.x,
                                    data.covariate_names, s_values);

  for (const auto& warning : res.warnings)
    std::cerr << "warning: " << warning << "\n";
  write_test_csv(path_in(args.out_dir, "test_results.csv"), res.tests);
  if (!tests_only) {
    write_beta_csv(path_in(args.out_dir, "beta_estimates.csv"), res.fit);
    write_alpha_csv(path_in(args.out_dir, "alpha_surface.csv"), res.fit);
    emit_plot_data(path_in(args.out_dir, "plot_data.csv"), res.fit);
  }
  write_manifest(
      path_in(args.out_dir, "manifest.json"),
      manifest_json(cfg,
                    {{"n_units", double(q.units())},
                     {"w_inf_norm", res.w_inf_norm},
                     {"min_eig_concentration", res.min_eig_concentration},
                     {"estimated_kernel_sup", res.est_kernel_sup},
                     {"estimated_product_ok", double(res.est_product_ok)}},
                    res.warnings));
  for (const auto& t : res.tests) {
    std::printf("s=%.4g  T_n=%.6g  z=%.4f  p=%.4g%s\n", t.s, t.t_n, t.z,
                t.p_value,
                t.reject_at.count(0.05) && t.reject_at.at(0.05)
                    ? "  [reject at 5%]"
                    : "");
  }
  std::cout << "wrote results to " << args.out_dir << "\n";
  return 0;
}

int run_montecarlo_cmd(CommonArgs& args, bool quiet) {
  RunConfig& cfg = args.cfg;
  cfg.validate();
  fs::create_directories(args.out_dir);
  auto progress = [&](int done, int total) {
    if (quiet) return;
    std::fprintf(stderr, "\r%d / %d replications", done, total);
    if (done == total) std::fprintf(stderr, "\n");
    std::fflush(stderr);
  };
  MonteCarloReport report = run_montecarlo(cfg, progress);
  write_mc_csv(path_in(args.out_dir, "mc_report.csv"), report);
  write_manifest(path_in(args.out_dir, "manifest.json"),
                 manifest_json(cfg,
                               {{"completed", double(report.completed)},
                                {"failed", double(report.failed)},
                                {"wall_seconds", report.wall_seconds}},
                               report.failure_messages));
  std::printf("beta: bias %.4f rmse %.4f cover %.3f\n", report.beta_bias,
              report.beta_rmse, report.beta_cover);
  for (const auto& c : report.cells)
    std::printf(
        "lambda_c=%-4g alpha bias %+.4f rmse %.4f cover %.3f  reject "
        "10/5/1%%: %.3f %.3f %.3f\n",
        c.lambda_c, c.alpha_bias, c.alpha_rmse, c.alpha_cover, c.reject_10,
        c.reject_05, c.reject_01);
  std::printf("%d replications (%d failed) in %.1fs -> %s\n", report.completed,
              report.failed, report.wall_seconds, args.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"functional spatial autoregression: simulation, estimation and inference"};
  app.require_subcommand(1);

  // A config file, when present, seeds the defaults of every subcommand;
  // explicit flags still win.
  RunConfig file_cfg;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        file_cfg = RunConfig::from_file(argv[i + 1]);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
    }
  }
  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file")
      ->check(CLI::ExistingFile);

  // simulate
  CommonArgs sim_args;
  sim_args.cfg = file_cfg;
  auto* sim = app.add_subcommand("simulate", "draw one dataset and write it as CSV");
  add_dgp_flags(sim, sim_args.cfg);
  add_estimator_flags(sim, sim_args.cfg);
  sim->add_option("--out", sim_args.out_dir, "output directory")
      ->capture_default_str();

  // estimate
  CommonArgs est_args;
  est_args.cfg = file_cfg;
  est_args.cfg.grid_size = 399;
  est_args.cfg.interior_knots = 3;
  est_args.cfg.lambda_c = {3.0};
  est_args.cfg.add_intercept = true;
  DataArgs est_data;
  std::vector<double> est_s = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  auto* est = app.add_subcommand("estimate", "fit the model to CSV data");
  est->add_option("--units", est_data.units, "units.csv path")->required();
  est->add_option("--quantiles", est_data.quantiles, "quantiles.csv path")->required();
  est->add_option("--edges", est_data.edges, "edges.csv path")->required();
  est->add_option("--sizes", est_data.sizes,
                  "sizes.csv path (switches to size-based weights)");
  est->add_flag("--no-row-normalize", est_data.no_row_normalize,
                "keep explicit edge weights unnormalized");
  est->add_option("--s", est_s, "evaluation points s");
  est->add_option("--lambda-c", est_args.cfg.lambda_c,
                  "penalty constant(s); the first is used for estimation");
  add_estimator_flags(est, est_args.cfg);
  est->add_option("--out", est_args.out_dir, "output directory")
      ->capture_default_str();

  // test
  CommonArgs test_args;
  test_args.cfg = file_cfg;
  test_args.cfg.grid_size = 399;
  test_args.cfg.interior_knots = 3;
  test_args.cfg.lambda_c = {3.0};
  test_args.cfg.add_intercept = true;
  DataArgs test_data;
  std::vector<double> test_s = {0.5};
  auto* tst = app.add_subcommand("test", "test alpha(.,s) = 0 on an interval");
  tst->add_option("--units", test_data.units, "units.csv path")->required();
  tst->add_option("--quantiles", test_data.quantiles, "quantiles.csv path")->required();
  tst->add_option("--edges", test_data.edges, "edges.csv path")->required();
  tst->add_option("--sizes", test_data.sizes, "sizes.csv path");
  tst->add_flag("--no-row-normalize", test_data.no_row_normalize,
                "keep explicit edge weights unnormalized");
  tst->add_option("--s", test_s, "evaluation points s");
  tst->add_option("--lambda-c", test_args.cfg.lambda_c, "penalty constant(s)");
  add_estimator_flags(tst, test_args.cfg);
  tst->add_option("--out", test_args.out_dir, "output directory")
      ->capture_default_str();

  // montecarlo
  CommonArgs mc_args;
  mc_args.cfg = file_cfg;
  bool mc_quiet = false;
  auto* mc = app.add_subcommand("montecarlo", "replicate the simulation study");
  add_dgp_flags(mc, mc_args.cfg);
  add_estimator_flags(mc, mc_args.cfg);
  mc->add_option("--reps", mc_args.cfg.replications, "number of replications")
      ->capture_default_str();
  mc->add_option("--lambda-c", mc_args.cfg.lambda_c, "penalty constants");
  mc->add_option("--s", mc_args.cfg.s_eval, "evaluation point")
      ->capture_default_str();
  mc->add_option("--threads", mc_args.cfg.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  mc->add_flag("--lenient", mc_args.cfg.lenient,
               "skip failed replications instead of aborting");
  mc->add_flag("--quiet", mc_quiet, "no progress output");
  mc->add_option("--out", mc_args.out_dir, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate_cmd(sim_args);
    if (est->parsed()) return run_estimate_cmd(est_args, est_data, est_s, false);
    if (tst->parsed()) return run_estimate_cmd(test_args, test_data, test_s, true);
    if (mc->parsed()) return run_montecarlo_cmd(mc_args, mc_quiet);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
