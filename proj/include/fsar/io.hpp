#pragma once

#include <string>
#include <vector>

#include "fsar/harness.hpp"

namespace fsar {

// Minimal CSV support: comma separation, no quoting (ids and numbers only),
// one header row.  Numbers are written with 17 significant digits so files
// round-trip doubles exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;          // -1 if absent
  int require_column(const std::string& name) const;  // throws DataError
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& context);

// A dataset in the external CSV layout: units with covariates, per-unit
// curve observations, an edge list, optional sizes for size-based weights.
struct LoadedData {
  std::vector<std::string> unit_ids;
  Eigen::MatrixXd x;
  std::vector<std::string> covariate_names;
  DiscreteFunctionObservations obs;
  SpatialWeights w;
};

// units.csv:      unit_id, <covariate columns...>
// quantiles.csv:  unit_id, s, q          (any number of rows per unit)
// edges.csv:      i, j[, w]              (unit ids; w optional)
// sizes.csv:      unit_id, size          (optional; switches to size weights)
// Unknown ids and units without observations are errors that name the ids.
LoadedData load_dataset(const std::string& units_path,
                        const std::string& quantiles_path,
                        const std::string& edges_path,
                        const std::string& sizes_path = "",
                        bool row_normalize = true);

void write_units_csv(const std::string& path, const Eigen::MatrixXd& x,
                     const std::vector<std::string>& covariate_names);
void write_quantiles_csv(const std::string& path,
                         const DiscreteFunctionObservations& obs);
void write_quantiles_csv(const std::string& path, const FunctionalSample& q);
void write_edges_csv(const std::string& path, const SpatialWeights& w);

void write_beta_csv(const std::string& path, const CurveFit& fit);
void write_alpha_csv(const std::string& path, const CurveFit& fit);
void write_test_csv(const std::string& path,
                    const std::vector<WaldResult>& tests);

// s, t, alpha_hat, ci_lo, ci_hi with a pointwise 95% band.
void emit_plot_data(const std::string& path, const CurveFit& fit);

void write_mc_csv(const std::string& path, const MonteCarloReport& report);

// JSON manifest describing a run: configuration, seed, diagnostics.
std::string manifest_json(const RunConfig& config,
                          const std::vector<std::pair<std::string, double>>& diagnostics,
                          const std::vector<std::string>& warnings);
void write_manifest(const std::string& path, const std::string& json_text);

}  // namespace fsar
