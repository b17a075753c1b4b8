#include "fsar/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fsar {

int CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<int>(j);
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  const int j = column(name);
  if (j < 0) throw DataError("missing required CSV column '" + name + "'");
  return j;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line))
    throw DataError("'" + path + "' is empty");
  table.header = split_line(line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != table.header.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(row.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < table.header.size(); ++j)
    out << (j ? "," : "") << table.header[j];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << "\n";
  }
  if (!out) throw DataError("error while writing '" + path + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
      throw DataError("trailing characters in number '" + text + "' (" +
                      context + ")");
    return v;
  } catch (const std::invalid_argument&) {
    throw DataError("cannot parse number '" + text + "' (" + context + ")");
  } catch (const std::out_of_range&) {
    throw DataError("number out of range '" + text + "' (" + context + ")");
  }
}

LoadedData load_dataset(const std::string& units_path,
                        const std::string& quantiles_path,
                        const std::string& edges_path,
                        const std::string& sizes_path, bool row_normalize) {
  // units
  const CsvTable units = read_csv(units_path);
  const int id_col = units.require_column("unit_id");
  std::vector<std::string> unit_ids;
  std::vector<std::string> covariate_names;
  std::vector<int> cov_cols;
  for (std::size_t j = 0; j < units.header.size(); ++j) {
    if (static_cast<int>(j) == id_col) continue;
    covariate_names.push_back(units.header[j]);
    cov_cols.push_back(static_cast<int>(j));
  }
  if (cov_cols.empty())
    throw DataError(units_path + ": no covariate columns besides unit_id");
  const int n = static_cast<int>(units.rows.size());
  if (n < 1) throw DataError(units_path + ": no units");
  Eigen::MatrixXd x(n, static_cast<int>(cov_cols.size()));
  std::map<std::string, int> index;
  for (int i = 0; i < n; ++i) {
    const auto& row = units.rows[i];
    if (!index.emplace(row[id_col], i).second)
      throw DataError(units_path + ": duplicate unit_id '" + row[id_col] + "'");
    unit_ids.push_back(row[id_col]);
    for (std::size_t j = 0; j < cov_cols.size(); ++j)
      x(i, static_cast<int>(j)) =
          parse_double(row[cov_cols[j]], units_path + " row " + std::to_string(i + 2));
  }

  // quantile observations
  const CsvTable quant = read_csv(quantiles_path);
  const int q_id = quant.require_column("unit_id");
  const int q_s = quant.require_column("s");
  const int q_q = quant.require_column("q");
  std::vector<std::vector<ObsPoint>> points(n);
  for (std::size_t r = 0; r < quant.rows.size(); ++r) {
    const auto& row = quant.rows[r];
    const auto it = index.find(row[q_id]);
    if (it == index.end())
      throw DataError(quantiles_path + ": unknown unit_id '" + row[q_id] + "'");
    const std::string ctx = quantiles_path + " row " + std::to_string(r + 2);
    points[it->second].push_back(
        {parse_double(row[q_s], ctx), parse_double(row[q_q], ctx)});
  }
  {
    std::string missing;
    int count = 0;
    for (int i = 0; i < n; ++i)
      if (points[i].empty() && count++ < 10)
        missing += (missing.empty() ? "" : ", ") + unit_ids[i];
    if (count > 0)
      throw DataError(quantiles_path + ": " + std::to_string(count) +
                      " units have no observations (" + missing +
                      (count > 10 ? ", ..." : "") + ")");
  }
  DiscreteFunctionObservations obs =
      DiscreteFunctionObservations::from_points(std::move(points));

  // edges
  const CsvTable edges = read_csv(edges_path);
  const int e_i = edges.require_column("i");
  const int e_j = edges.require_column("j");
  const int e_w = edges.column("w");
  auto lookup = [&](const std::string& id) {
    const auto it = index.find(id);
    if (it == index.end())
      throw DataError(edges_path + ": unknown unit_id '" + id + "'");
    return it->second;
  };

  SpatialWeights w = [&]() {
    if (!sizes_path.empty()) {
      const CsvTable sizes = read_csv(sizes_path);
      const int s_id = sizes.require_column("unit_id");
      const int s_sz = sizes.require_column("size");
      Eigen::VectorXd size_vec = Eigen::VectorXd::Zero(n);
      for (std::size_t r = 0; r < sizes.rows.size(); ++r) {
        const auto& row = sizes.rows[r];
        const auto it = index.find(row[s_id]);
        if (it == index.end())
          throw DataError(sizes_path + ": unknown unit_id '" + row[s_id] + "'");
        size_vec(it->second) = parse_double(
            row[s_sz], sizes_path + " row " + std::to_string(r + 2));
      }
      std::vector<std::pair<int, int>> edge_list;
      for (const auto& row : edges.rows)
        edge_list.emplace_back(lookup(row[e_i]), lookup(row[e_j]));
      return SpatialWeights::size_weighted(n, edge_list, size_vec);
    }
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t r = 0; r < edges.rows.size(); ++r) {
      const auto& row = edges.rows[r];
      const int i = lookup(row[e_i]);
      const int j = lookup(row[e_j]);
      const double wt =
          e_w >= 0 ? parse_double(row[e_w], edges_path + " row " +
                                                std::to_string(r + 2))
                   : 1.0;
      entries.emplace_back(i, j, wt);
      if (e_w < 0) entries.emplace_back(j, i, wt);  // 0/1 adjacency: symmetrize
    }
    SpatialWeights raw = SpatialWeights::from_entries(n, entries);
    return row_normalize ? raw.row_normalized() : raw;
  }();

  return LoadedData{std::move(unit_ids), std::move(x),
                    std::move(covariate_names), std::move(obs), std::move(w)};
}

void write_units_csv(const std::string& path, const Eigen::MatrixXd& x,
                     const std::vector<std::string>& covariate_names) {
  CsvTable t;
  t.header.push_back("unit_id");
  for (int j = 0; j < x.cols(); ++j)
    t.header.push_back(j < static_cast<int>(covariate_names.size())
                           ? covariate_names[j]
                           : "x" + std::to_string(j + 1));
  for (int i = 0; i < x.rows(); ++i) {
    std::vector<std::string> row{"u" + std::to_string(i)};
    for (int j = 0; j < x.cols(); ++j) row.push_back(format_double(x(i, j)));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

void write_quantiles_csv(const std::string& path,
                         const DiscreteFunctionObservations& obs) {
  CsvTable t;
  t.header = {"unit_id", "s", "q"};
  for (int i = 0; i < obs.units(); ++i)
    for (const auto& p : obs.unit(i))
      t.rows.push_back({"u" + std::to_string(i), format_double(p.s),
                        format_double(p.y)});
  write_csv(path, t);
}

void write_quantiles_csv(const std::string& path, const FunctionalSample& q) {
  CsvTable t;
  t.header = {"unit_id", "s", "q"};
  for (int i = 0; i < q.units(); ++i)
    for (int g = 0; g < q.grid().size(); ++g)
      t.rows.push_back({"u" + std::to_string(i), format_double(q.grid().point(g)),
                        format_double(q.values()(i, g))});
  write_csv(path, t);
}

void write_edges_csv(const std::string& path, const SpatialWeights& w) {
  CsvTable t;
  t.header = {"i", "j", "w"};
  const auto& m = w.matrix();
  for (int i = 0; i < m.rows(); ++i)
    for (SpatialWeights::Sparse::InnerIterator it(m, i); it; ++it)
      t.rows.push_back({"u" + std::to_string(i),
                        "u" + std::to_string(it.col()),
                        format_double(it.value())});
  write_csv(path, t);
}

void write_beta_csv(const std::string& path, const CurveFit& fit) {
  CsvTable t;
  t.header = {"s", "covariate", "estimate", "std_error"};
  for (const auto& p : fit.points) {
    if (!p.ok()) continue;
    for (std::size_t j = 0; j < fit.covariate_names.size(); ++j)
      t.rows.push_back({format_double(p.s), fit.covariate_names[j],
                        format_double(p.beta(static_cast<int>(j))),
                        format_double(p.beta_se(static_cast<int>(j)))});
  }
  write_csv(path, t);
}

void write_alpha_csv(const std::string& path, const CurveFit& fit) {
  CsvTable t;
  t.header = {"s", "t", "estimate", "std_error"};
  for (const auto& p : fit.points) {
    if (!p.ok()) continue;
    for (std::size_t j = 0; j < fit.t_values.size(); ++j)
      t.rows.push_back({format_double(p.s), format_double(fit.t_values[j]),
                        format_double(p.alpha(static_cast<int>(j))),
                        format_double(p.alpha_se(static_cast<int>(j)))});
  }
  write_csv(path, t);
}

void write_test_csv(const std::string& path,
                    const std::vector<WaldResult>& tests) {
  CsvTable t;
  t.header = {"s", "interval_lo", "interval_hi", "T_n", "mu_hat",
              "v_hat", "z", "p_value"};
  for (const auto& w : tests)
    t.rows.push_back({format_double(w.s), format_double(w.interval_lo),
                      format_double(w.interval_hi), format_double(w.t_n),
                      format_double(w.mu_hat), format_double(w.v_hat),
                      format_double(w.z), format_double(w.p_value)});
  write_csv(path, t);
}

void emit_plot_data(const std::string& path, const CurveFit& fit) {
  CsvTable t;
  t.header = {"s", "t", "alpha_hat", "ci_lo", "ci_hi"};
  for (const auto& p : fit.points) {
    if (!p.ok()) continue;
    for (std::size_t j = 0; j < fit.t_values.size(); ++j) {
      const double est = p.alpha(static_cast<int>(j));
      const double half = 1.959963984540054 * p.alpha_se(static_cast<int>(j));
      t.rows.push_back({format_double(p.s), format_double(fit.t_values[j]),
                        format_double(est), format_double(est - half),
                        format_double(est + half)});
    }
  }
  write_csv(path, t);
}

void write_mc_csv(const std::string& path, const MonteCarloReport& report) {
  CsvTable t;
  t.header = {"dgp",        "rho",       "n",          "m",
              "knots",      "lambda_c",  "reps",       "failed",
              "beta_bias",  "beta_rmse", "beta_cover", "alpha_bias",
              "alpha_rmse", "alpha_cover", "reject_10", "reject_05",
              "reject_01",  "wall_seconds"};
  const auto& c = report.config;
  for (const auto& cell : report.cells)
    t.rows.push_back({std::to_string(c.dgp),
                      c.rho ? format_double(*c.rho) : "",
                      std::to_string(c.n), std::to_string(c.m),
                      std::to_string(c.interior_knots),
                      format_double(cell.lambda_c),
                      std::to_string(report.completed),
                      std::to_string(report.failed),
                      format_double(report.beta_bias),
                      format_double(report.beta_rmse),
                      format_double(report.beta_cover),
                      format_double(cell.alpha_bias),
                      format_double(cell.alpha_rmse),
                      format_double(cell.alpha_cover),
                      format_double(cell.reject_10),
                      format_double(cell.reject_05),
                      format_double(cell.reject_01),
                      format_double(report.wall_seconds)});
  write_csv(path, t);
}

std::string manifest_json(
    const RunConfig& config,
    const std::vector<std::pair<std::string, double>>& diagnostics,
    const std::vector<std::string>& warnings) {
  nlohmann::json j;
  j["config"] = {
      {"dgp", config.dgp},
      {"n", config.n},
      {"d", config.d},
      {"lattice_rows", config.resolved_rows()},
      {"lattice_cols", config.lattice_cols},
      {"grid_size", config.grid_size},
      {"m", config.m},
      {"neumann_tol", config.neumann_tol},
      {"neumann_max_iter", config.neumann_max_iter},
      {"degree", config.degree},
      {"interior_knots", config.interior_knots},
      {"max_iv_order", config.max_iv_order},
      {"add_intercept", config.add_intercept},
      {"lambda_c", config.lambda_c},
      {"s_eval", config.s_eval},
      {"t_points", config.t_points},
      {"interval", {config.interval_lo, config.interval_hi}},
      {"replications", config.replications},
      {"seed", config.seed},
      {"threads", config.threads},
      {"lenient", config.lenient},
  };
  if (config.rho) j["config"]["rho"] = *config.rho;
  for (const auto& [k, v] : diagnostics) j["diagnostics"][k] = v;
  j["warnings"] = warnings;
  return j.dump(2);
}

void write_manifest(const std::string& path, const std::string& json_text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << json_text << "\n";
  if (!out) throw DataError("error while writing '" + path + "'");
}

}  // namespace fsar
