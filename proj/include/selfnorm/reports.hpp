#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "selfnorm/estimation.hpp"
#include "selfnorm/experiments.hpp"
#include "selfnorm/geometry.hpp"

namespace selfnorm {

/// Shortest round-trip decimal form, identical on every run.
std::string format_double(double v);

struct BoundCheckRow {
  std::string bound_name;
  std::uint64_t inputs_hash = 0;
  double bound_value = 0.0;
  double observed_value = 0.0;
  bool satisfied = false;
};

struct VarianceRow {
  int d = 0;
  int K = 0;
  double alpha = 0.0;
  double V_star = 0.0;
  double V_E_star = 0.0;
  double thm_bound = 0.0;        // proof form
  double thm_bound_statement = 0.0;
  double corollary_bound = 0.0;
  bool corollary_valid = false;
  double margin = 0.0;
  double deviation_centered = 0.0;
  double deviation_bound = 0.0;
};

void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& out);
void write_bounds_csv(const std::vector<BoundCheckRow>& rows, std::ostream& out);
void write_variance_csv(const std::vector<VarianceRow>& rows, std::ostream& out);
/// Metadata (box, resolution, level, degenerate) goes in leading '#' lines.
void write_contour_csv(const ContourSet& contours, double level, std::ostream& out);

nlohmann::json fit_result_json(const FitResult& fit);

}  // namespace selfnorm
