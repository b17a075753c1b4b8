// Python bindings for the core operations: grids and bases, spatial weights,
// simulation, the two-stage estimator, and the specification test.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fsar/dgp.hpp"
#include "fsar/estimator.hpp"
#include "fsar/harness.hpp"
#include "fsar/inference.hpp"
#include "fsar/io.hpp"

namespace py = pybind11;
using namespace fsar;

namespace {

DiscreteFunctionObservations obs_from_lists(
    const std::vector<std::vector<std::pair<double, double>>>& units) {
  std::vector<std::vector<ObsPoint>> pts(units.size());
  for (std::size_t i = 0; i < units.size(); ++i)
    for (const auto& [s, y] : units[i]) pts[i].push_back({s, y});
  return DiscreteFunctionObservations::from_points(std::move(pts));
}

}  // namespace

PYBIND11_MODULE(_fsar, m) {
  m.doc() = "functional spatial autoregression core";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<Grid>(m, "Grid")
      .def_static("uniform", &Grid::uniform, py::arg("size"))
      .def_static("from_points", &Grid::from_points, py::arg("points"))
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("step", &Grid::step)
      .def_property_readonly("points", &Grid::points)
      .def("point", &Grid::point, py::arg("index"));

  m.def("quadrature", &quadrature, py::arg("values"), py::arg("grid"));
  m.def("interp_on_grid",
        [](const Eigen::VectorXd& v, const Grid& g, double t) {
          return interp_on_grid(v, g, t);
        },
        py::arg("values"), py::arg("grid"), py::arg("t"));
  m.def("wasserstein2_sq", &wasserstein2_sq, py::arg("a"), py::arg("b"),
        py::arg("grid"));

  py::class_<BSplineBasis>(m, "BSplineBasis")
      .def(py::init<int, std::vector<double>>(), py::arg("degree"),
           py::arg("interior_knots"))
      .def_static("cubic", &BSplineBasis::cubic, py::arg("interior_knot_count"))
      .def_property_readonly("degree", &BSplineBasis::degree)
      .def_property_readonly("size", &BSplineBasis::size)
      .def_property_readonly("knots", &BSplineBasis::knots)
      .def("eval", &BSplineBasis::eval, py::arg("t"))
      .def("eval_on", &BSplineBasis::eval_on, py::arg("grid"))
      .def("gram", &BSplineBasis::gram, py::arg("grid"))
      .def("gram_on", &BSplineBasis::gram_on, py::arg("a"), py::arg("b"),
           py::arg("grid"));

  m.def("project", &project, py::arg("f"), py::arg("basis"), py::arg("grid"));

  py::class_<FunctionalSample>(m, "FunctionalSample")
      .def(py::init<Grid, Eigen::MatrixXd>(), py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid", &FunctionalSample::grid)
      .def_property_readonly("values", &FunctionalSample::values)
      .def_property_readonly("units", &FunctionalSample::units)
      .def("values_at", &FunctionalSample::values_at, py::arg("s"));

  py::class_<DiscreteFunctionObservations>(m, "DiscreteFunctionObservations")
      .def_static("from_points", &obs_from_lists, py::arg("units"))
      .def_property_readonly("units", &DiscreteFunctionObservations::units)
      .def("unit", [](const DiscreteFunctionObservations& o, int i) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : o.unit(i)) out.emplace_back(p.s, p.y);
        return out;
      }, py::arg("i"));

  m.def("interpolate",
        [](const DiscreteFunctionObservations& o, int unit, double s) {
          return interpolate(o, unit, s);
        },
        py::arg("obs"), py::arg("unit"), py::arg("s"));
  m.def("interpolate_sample", &interpolate_sample, py::arg("obs"), py::arg("grid"));
  m.def("basis_scores",
        [](const FunctionalSample& q, const BSplineBasis& b) {
          return basis_scores(q, b);
        },
        py::arg("sample"), py::arg("basis"));

  py::class_<SpatialWeights>(m, "SpatialWeights")
      .def_static("from_edges",
                  [](int n, const std::vector<std::tuple<int, int, double>>& entries,
                     bool row_normalized) {
                    std::vector<Eigen::Triplet<double>> t;
                    for (const auto& [i, j, w] : entries) t.emplace_back(i, j, w);
                    return SpatialWeights::from_entries(n, t, row_normalized);
                  },
                  py::arg("n"), py::arg("entries"),
                  py::arg("row_normalized") = false)
      .def_static("rook_lattice", &SpatialWeights::rook_lattice, py::arg("rows"),
                  py::arg("cols"), py::arg("cells"))
      .def_static("size_weighted", &SpatialWeights::size_weighted, py::arg("n"),
                  py::arg("edges"), py::arg("sizes"))
      .def("row_normalized", &SpatialWeights::row_normalized)
      .def_property_readonly("size", &SpatialWeights::size)
      .def_property_readonly("is_row_normalized", &SpatialWeights::is_row_normalized)
      .def("dense", &SpatialWeights::dense)
      .def("lag", &SpatialWeights::lag, py::arg("m"))
      .def("inf_norm", &SpatialWeights::inf_norm)
      .def("isolated_count", &SpatialWeights::isolated_count);

  m.def("build_instruments", &build_instruments, py::arg("w"), py::arg("x"),
        py::arg("max_order"));

  py::class_<CompletenessReport>(m, "CompletenessReport")
      .def_readonly("kernel_sup", &CompletenessReport::kernel_sup)
      .def_readonly("row_sum_norm", &CompletenessReport::row_sum_norm)
      .def_readonly("product", &CompletenessReport::product)
      .def_readonly("product_ok", &CompletenessReport::product_ok)
      .def_readonly("alt_product", &CompletenessReport::alt_product)
      .def_readonly("alt_ok", &CompletenessReport::alt_ok);

  m.def("completeness_check", &completeness_check, py::arg("w"),
        py::arg("alpha_grid"), py::arg("grid"));

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("zero", &KernelSpec::zero)
      .def_static("linear", &KernelSpec::linear)
      .def_static("gaussian", &KernelSpec::gaussian)
      .def_static("sine", &KernelSpec::sine)
      .def_static("scaled_gaussian", &KernelSpec::scaled_gaussian, py::arg("rho"))
      .def_static("custom", &KernelSpec::custom, py::arg("grid_values"))
      .def("__call__", &KernelSpec::operator(), py::arg("t"), py::arg("s"))
      .def("evaluate", &KernelSpec::evaluate, py::arg("grid"));

  py::class_<CoefSpec>(m, "CoefSpec")
      .def(py::init<std::vector<std::function<double(double)>>>(), py::arg("funcs"))
      .def_static("simulation_defaults", &CoefSpec::simulation_defaults)
      .def_property_readonly("count", &CoefSpec::count)
      .def("__call__", &CoefSpec::operator(), py::arg("j"), py::arg("s"))
      .def("evaluate", &CoefSpec::evaluate, py::arg("grid"));

  py::class_<ErrorSpec>(m, "ErrorSpec")
      .def(py::init<>())
      .def(py::init([](double s1, double s2, int terms) {
             return ErrorSpec{s1, s2, terms};
           }),
           py::arg("sigma1"), py::arg("sigma2"), py::arg("terms") = 4)
      .def_readwrite("sigma1", &ErrorSpec::sigma1)
      .def_readwrite("sigma2", &ErrorSpec::sigma2)
      .def_readwrite("terms", &ErrorSpec::terms);

  py::class_<NeumannResult>(m, "NeumannResult")
      .def_readonly("q", &NeumannResult::q)
      .def_readonly("iterations", &NeumannResult::iterations)
      .def_readonly("converged", &NeumannResult::converged);

  m.def("neumann_solve", &neumann_solve, py::arg("w"), py::arg("alpha_grid"),
        py::arg("u"), py::arg("grid"), py::arg("tol") = 1e-3,
        py::arg("max_iter") = 10000);
  m.def("direct_solve_oracle", &direct_solve_oracle, py::arg("w"),
        py::arg("alpha_grid"), py::arg("u"), py::arg("grid"));

  py::class_<SimulatedDataset>(m, "SimulatedDataset")
      .def_readonly("q", &SimulatedDataset::q)
      .def_readonly("x", &SimulatedDataset::x)
      .def_readonly("errors", &SimulatedDataset::errors)
      .def_readonly("w", &SimulatedDataset::w)
      .def_readonly("cells", &SimulatedDataset::cells)
      .def_readonly("neumann_iterations", &SimulatedDataset::neumann_iterations)
      .def_readonly("neumann_converged", &SimulatedDataset::neumann_converged)
      .def_readonly("isolated_units", &SimulatedDataset::isolated_units)
      .def_readonly("completeness", &SimulatedDataset::completeness);

  m.def("simulate", &simulate, py::arg("n"), py::arg("d"), py::arg("rows"),
        py::arg("cols"), py::arg("kernel"), py::arg("coefs"), py::arg("errors"),
        py::arg("grid"), py::arg("seed"), py::arg("tol") = 1e-3,
        py::arg("max_iter") = 10000);
  m.def("marginal_effect", &marginal_effect, py::arg("data"), py::arg("kernel"),
        py::arg("coefs"), py::arg("covariate"), py::arg("unit"),
        py::arg("trunc_tol") = 1e-8);
  m.def("sample_discrete", &sample_discrete, py::arg("q"), py::arg("m"),
        py::arg("seed"), py::arg("grid_abscissae") = false);

  py::class_<PenaltySpec>(m, "PenaltySpec")
      .def(py::init([](Eigen::MatrixXd d, double lambda) {
             return PenaltySpec{std::move(d), lambda};
           }),
           py::arg("d"), py::arg("lambda_"))
      .def_static("ridge", &PenaltySpec::ridge, py::arg("lambda_"), py::arg("k"))
      .def_static("lambda_rule", &PenaltySpec::lambda_rule, py::arg("lambda_c"),
                  py::arg("n"))
      .def_readwrite("d", &PenaltySpec::d)
      .def_readwrite("lambda_", &PenaltySpec::lambda);

  py::class_<DesignSet>(m, "DesignSet")
      .def(py::init<FunctionalSample, SpatialWeights, Eigen::MatrixXd,
                    BSplineBasis, int, bool, Eigen::MatrixXd,
                    std::vector<std::string>>(),
           py::arg("outcomes"), py::arg("weights"), py::arg("covariates"),
           py::arg("basis"), py::arg("max_iv_order") = 2,
           py::arg("add_intercept") = true,
           py::arg("extra_instruments") = Eigen::MatrixXd(),
           py::arg("covariate_names") = std::vector<std::string>())
      .def_property_readonly("units", &DesignSet::units)
      .def_property_readonly("n_basis", &DesignSet::n_basis)
      .def_property_readonly("n_instruments", &DesignSet::n_instruments)
      .def_property_readonly("covariate_names", &DesignSet::covariate_names)
      .def_property_readonly("warnings", &DesignSet::warnings)
      .def_property_readonly("min_eig_concentration",
                             &DesignSet::min_eig_concentration)
      .def("fit_beta", &DesignSet::fit_beta, py::arg("s"))
      .def("fit_theta", &DesignSet::fit_theta, py::arg("s"), py::arg("penalty"))
      .def("theta_check", &DesignSet::theta_check, py::arg("s"))
      .def("residuals",
           py::overload_cast<double>(&DesignSet::residuals, py::const_),
           py::arg("s"))
      .def("beta_cov", &DesignSet::beta_cov, py::arg("resid"))
      .def("alpha_cov_matrix", &DesignSet::alpha_cov_matrix, py::arg("penalty"),
           py::arg("resid"))
      .def("alpha_se", &DesignSet::alpha_se, py::arg("t"), py::arg("penalty"),
           py::arg("resid"))
      .def("eval_alpha", &DesignSet::eval_alpha, py::arg("theta"), py::arg("t"));

  py::class_<PointFit>(m, "PointFit")
      .def_readonly("s", &PointFit::s)
      .def_readonly("beta", &PointFit::beta)
      .def_readonly("beta_se", &PointFit::beta_se)
      .def_readonly("theta", &PointFit::theta)
      .def_readonly("theta_chk", &PointFit::theta_chk)
      .def_readonly("alpha", &PointFit::alpha)
      .def_readonly("alpha_se", &PointFit::alpha_se)
      .def_readonly("error", &PointFit::error)
      .def("ok", &PointFit::ok);

  py::class_<CurveFit>(m, "CurveFit")
      .def_readonly("t_values", &CurveFit::t_values)
      .def_readonly("covariate_names", &CurveFit::covariate_names)
      .def_readonly("points", &CurveFit::points);

  m.def("estimate_curve", &estimate_curve, py::arg("design"),
        py::arg("s_values"), py::arg("t_values"), py::arg("penalty"));
  m.def("fit_feasible", &fit_feasible, py::arg("obs"), py::arg("weights"),
        py::arg("covariates"), py::arg("basis"), py::arg("grid"),
        py::arg("s_values"), py::arg("t_values"), py::arg("penalty"),
        py::arg("max_iv_order") = 2, py::arg("add_intercept") = true);

  py::class_<WaldResult>(m, "WaldResult")
      .def_readonly("s", &WaldResult::s)
      .def_readonly("interval_lo", &WaldResult::interval_lo)
      .def_readonly("interval_hi", &WaldResult::interval_hi)
      .def_readonly("t_n", &WaldResult::t_n)
      .def_readonly("mu_hat", &WaldResult::mu_hat)
      .def_readonly("v_hat", &WaldResult::v_hat)
      .def_readonly("z", &WaldResult::z)
      .def_readonly("p_value", &WaldResult::p_value)
      .def_readonly("reject_at", &WaldResult::reject_at);

  m.def("wald_statistic", &wald_statistic, py::arg("design"), py::arg("theta"),
        py::arg("lo"), py::arg("hi"));
  m.def("wald_moments", &wald_moments, py::arg("design"), py::arg("resid"),
        py::arg("lo"), py::arg("hi"), py::arg("penalty"));
  m.def("wald_test", &wald_test, py::arg("design"), py::arg("s"), py::arg("lo"),
        py::arg("hi"), py::arg("penalty"));
  m.def("wald_test_general", &wald_test_general, py::arg("design"),
        py::arg("s"), py::arg("lo"), py::arg("hi"), py::arg("penalty"),
        py::arg("null_curve"));

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("from_file", &RunConfig::from_file, py::arg("path"))
      .def("apply", &RunConfig::apply, py::arg("key"), py::arg("value"))
      .def("validate", &RunConfig::validate)
      .def_readwrite("dgp", &RunConfig::dgp)
      .def_readwrite("rho", &RunConfig::rho)
      .def_readwrite("n", &RunConfig::n)
      .def_readwrite("d", &RunConfig::d)
      .def_readwrite("lattice_rows", &RunConfig::lattice_rows)
      .def_readwrite("lattice_cols", &RunConfig::lattice_cols)
      .def_readwrite("grid_size", &RunConfig::grid_size)
      .def_readwrite("m", &RunConfig::m)
      .def_readwrite("neumann_tol", &RunConfig::neumann_tol)
      .def_readwrite("neumann_max_iter", &RunConfig::neumann_max_iter)
      .def_readwrite("degree", &RunConfig::degree)
      .def_readwrite("interior_knots", &RunConfig::interior_knots)
      .def_readwrite("max_iv_order", &RunConfig::max_iv_order)
      .def_readwrite("add_intercept", &RunConfig::add_intercept)
      .def_readwrite("lambda_c", &RunConfig::lambda_c)
      .def_readwrite("s_eval", &RunConfig::s_eval)
      .def_readwrite("t_points", &RunConfig::t_points)
      .def_readwrite("interval_lo", &RunConfig::interval_lo)
      .def_readwrite("interval_hi", &RunConfig::interval_hi)
      .def_readwrite("replications", &RunConfig::replications)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("lenient", &RunConfig::lenient);

  py::class_<MonteCarloCell>(m, "MonteCarloCell")
      .def_readonly("lambda_c", &MonteCarloCell::lambda_c)
      .def_readonly("alpha_bias", &MonteCarloCell::alpha_bias)
      .def_readonly("alpha_rmse", &MonteCarloCell::alpha_rmse)
      .def_readonly("alpha_cover", &MonteCarloCell::alpha_cover)
      .def_readonly("reject_10", &MonteCarloCell::reject_10)
      .def_readonly("reject_05", &MonteCarloCell::reject_05)
      .def_readonly("reject_01", &MonteCarloCell::reject_01);

  py::class_<MonteCarloReport>(m, "MonteCarloReport")
      .def_readonly("completed", &MonteCarloReport::completed)
      .def_readonly("failed", &MonteCarloReport::failed)
      .def_readonly("beta_bias", &MonteCarloReport::beta_bias)
      .def_readonly("beta_rmse", &MonteCarloReport::beta_rmse)
      .def_readonly("beta_cover", &MonteCarloReport::beta_cover)
      .def_readonly("cells", &MonteCarloReport::cells)
      .def_readonly("t_values", &MonteCarloReport::t_values)
      .def_readonly("wall_seconds", &MonteCarloReport::wall_seconds);

  m.def("run_montecarlo",
        [](const RunConfig& cfg) { return run_montecarlo(cfg); },
        py::arg("config"), py::call_guard<py::gil_scoped_release>());
}
