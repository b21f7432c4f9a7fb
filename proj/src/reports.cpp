#include "selfnorm/reports.hpp"

#include <charconv>
#include <ostream>

namespace selfnorm {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& out) {
  out << "tau,delta,loglik_mle,loglik_constrained,gap,sqrtV,kl_uniform,bound_thm1,seed,flags,source\n";
  for (const ExperimentRow& r : rows) {
    out << format_double(r.tau) << ',' << format_double(r.delta) << ','
        << format_double(r.loglik_mle) << ',' << format_double(r.loglik_constrained) << ','
        << format_double(r.gap) << ',' << format_double(r.sqrtV) << ','
        << format_double(r.kl_uniform) << ',' << format_double(r.bound_thm1) << ',' << r.seed
        << ',' << r.flags << ',' << r.source << '\n';
  }
}

void write_bounds_csv(const std::vector<BoundCheckRow>& rows, std::ostream& out) {
  out << "bound_name,inputs_hash,bound_value,observed_value,satisfied\n";
  for (const BoundCheckRow& r : rows)
    out << r.bound_name << ',' << r.inputs_hash << ',' << format_double(r.bound_value) << ','
        << format_double(r.observed_value) << ',' << (r.satisfied ? "true" : "false") << '\n';
}

void write_variance_csv(const std::vector<VarianceRow>& rows, std::ostream& out) {
  out << "d,K,alpha,V_star,V_E_star,thm_bound,thm_bound_statement,corollary_bound,"
         "corollary_valid,margin,deviation_centered,deviation_bound\n";
  for (const VarianceRow& r : rows)
    out << r.d << ',' << r.K << ',' << format_double(r.alpha) << ',' << format_double(r.V_star)
        << ',' << format_double(r.V_E_star) << ',' << format_double(r.thm_bound) << ','
        << format_double(r.thm_bound_statement) << ',' << format_double(r.corollary_bound) << ','
        << (r.corollary_valid ? "true" : "false") << ',' << format_double(r.margin) << ','
        << format_double(r.deviation_centered) << ',' << format_double(r.deviation_bound) << '\n';
}

void write_contour_csv(const ContourSet& contours, double level, std::ostream& out) {
  const Box2& b = contours.box;
  out << "# bbox=" << format_double(b.x_min) << ',' << format_double(b.x_max) << ','
      << format_double(b.y_min) << ',' << format_double(b.y_max)
      << " resolution=" << contours.resolution << " level=" << format_double(level)
      << " degenerate=" << (contours.degenerate ? "true" : "false")
      << " covers_box=" << (contours.covers_box ? "true" : "false") << '\n';
  out << "polyline_id,vertex_index,coord1,coord2\n";
  for (std::size_t p = 0; p < contours.polylines.size(); ++p) {
    const Polyline& line = contours.polylines[p];
    for (std::size_t v = 0; v < line.vertices.size(); ++v)
      out << p << ',' << v << ',' << format_double(line.vertices[v](0)) << ','
          << format_double(line.vertices[v](1)) << '\n';
  }
}

nlohmann::json fit_result_json(const FitResult& fit) {
  const auto& values = fit.eta.values();
  std::vector<double> eta(values.data(), values.data() + values.size());
  nlohmann::json j = {{"eta", eta},
                      {"num_blocks", fit.eta.num_blocks()},
                      {"block_dim", fit.eta.block_dim()},
                      {"loglik", fit.log_likelihood},
                      {"V", fit.V},
                      {"iterations", fit.iterations},
                      {"converged", fit.converged},
                      {"diverged", fit.diverged},
                      {"gradient_norm", fit.gradient_norm},
                      {"alpha_penalty", fit.alpha_penalty ? nlohmann::json(*fit.alpha_penalty)
                                                          : nlohmann::json(nullptr)},
                      {"dataset_hash", fit.dataset_hash},
                      {"origin", fit.origin}};
  return j;
}

}  // namespace selfnorm
